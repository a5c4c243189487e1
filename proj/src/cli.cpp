#include "subflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "subflow/errors.hpp"
#include "subflow/flow.hpp"
#include "subflow/rng.hpp"
#include "subflow/sampling.hpp"
#include "subflow/stability.hpp"
#include "subflow/variational.hpp"

namespace subflow::cli {

namespace {

using nlohmann::json;

// Residuals this close to the combined magnitude of both sides are rounding
// noise; convergence orders measured below it are meaningless.
constexpr double rounding_floor_factor = 1e-11;

void write_json(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

json report_to_json(const VariationReport& r) {
  return json{{"check", r.check},
              {"grid", {r.grid[0], r.grid[1], r.grid[2]}},
              {"h", r.h},
              {"dt", r.dt},
              {"analytic", r.analytic},
              {"fd", r.fd},
              {"residual", r.residual}};
}

// One residual check refined across grid levels. A diagnostic study inverts
// the usual reading: its residual must stay pinned at a known nonzero limit
// instead of decaying.
struct Study {
  std::string name;
  double gate = 0.0;
  std::vector<VariationReport> levels;
  std::vector<double> interval_orders;
  std::optional<double> fit_order;
  bool at_floor = false;
  bool passed = false;
  bool diagnostic = false;
  double expected_limit = 0.0;
};

double rounding_floor(const VariationReport& r) {
  return rounding_floor_factor * (1.0 + std::fabs(r.analytic) + std::fabs(r.fd));
}

void evaluate_study(Study& s) {
  const std::size_t nl = s.levels.size();
  s.interval_orders.clear();
  for (std::size_t k = 0; k + 1 < nl; ++k) {
    const VariationReport& a = s.levels[k];
    const VariationReport& b = s.levels[k + 1];
    if (a.residual > 0.0 && b.residual > 0.0)
      s.interval_orders.push_back(std::log(a.residual / b.residual) /
                                  std::log(a.h / b.h));
    else
      s.interval_orders.push_back(0.0);
  }

  // Least-squares slope of log residual against log h over the levels that
  // sit above the rounding floor.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const VariationReport& r : s.levels) {
    if (r.residual <= rounding_floor(r)) continue;
    const double x = std::log(r.h);
    const double y = std::log(r.residual);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  if (m >= 2 && sxx * m - sx * sx > 0.0)
    s.fit_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  // A residual that refined below rounding level converged faster than the
  // stencil can resolve, which clears any order gate.
  s.at_floor = s.levels.back().residual <= rounding_floor(s.levels.back());
  if (s.at_floor) {
    s.passed = true;
    return;
  }
  s.passed = !s.interval_orders.empty() && s.interval_orders.back() >= s.gate;
}

json study_to_json(const Study& s) {
  json rows = json::array();
  for (const auto& r : s.levels) rows.push_back(report_to_json(r));
  json j{{"name", s.name},
         {"gate", s.gate},
         {"levels", rows},
         {"interval_orders", s.interval_orders},
         {"at_rounding_floor", s.at_floor},
         {"passed", s.passed}};
  if (s.fit_order) j["fit_order"] = *s.fit_order;
  if (s.diagnostic) {
    j["diagnostic"] = true;
    j["expected_limit"] = s.expected_limit;
  }
  return j;
}

void print_study(const Study& s) {
  if (s.diagnostic) {
    std::printf("[%s] %s: flipped residual %.6g against pinned limit %.6g\n",
                s.passed ? "PASS" : "FAIL", s.name.c_str(),
                s.levels.back().residual, s.expected_limit);
    return;
  }
  if (s.at_floor) {
    std::printf("[%s] %s: residual %.3g at rounding floor\n",
                s.passed ? "PASS" : "FAIL", s.name.c_str(),
                s.levels.back().residual);
    return;
  }
  const double last = s.interval_orders.empty() ? 0.0 : s.interval_orders.back();
  std::printf("[%s] %s: observed order %.2f (gate %.2f), residual %.3g -> %.3g\n",
              s.passed ? "PASS" : "FAIL", s.name.c_str(), last, s.gate,
              s.levels.front().residual, s.levels.back().residual);
}

std::string order_tag(FdOrder order) {
  return order == FdOrder::second ? "order-2" : "order-4";
}

}  // namespace

int cmd_check(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const Target target = make_target(cfg.target);
  const Potential G = make_potential(cfg.potential);
  const std::uint64_t map_seed = derive_seed(cfg.seed, "check-map");
  const std::uint64_t var_seed = derive_seed(cfg.seed, "check-variation");
  const std::uint64_t pair_seed = derive_seed(cfg.seed, "check-pairing");

  std::vector<Study> studies;
  json diagnostic;

  for (int o : cfg.checks.orders) {
    const FdOrder order = o == 2 ? FdOrder::second : FdOrder::fourth;
    const double gate = o == 2 ? cfg.checks.order_gate_2 : cfg.checks.order_gate_4;
    for (const std::string& suite : cfg.checks.suites) {
      // The divergence identity is a statement about the domain geometry, so
      // it is pinned to the two chart regimes (vanishing and non-vanishing
      // vertical mean curvature) independent of the configured domain.
      const std::vector<std::string> charts =
          suite == "divergence"
              ? std::vector<std::string>{"twisted-torus", "weighted-torus"}
              : std::vector<std::string>{cfg.domain.name};
      for (const std::string& chart_name : charts) {
        Study s;
        s.name = suite + "/" + chart_name + "/" + order_tag(order);
        s.gate = gate;
        std::optional<Study> flipped;
        if (suite == "second-variation" && cfg.checks.sign_flip_diagnostic) {
          flipped.emplace();
          flipped->name = suite + "-flipped/" + chart_name + "/" + order_tag(order);
          flipped->gate = gate;
          flipped->diagnostic = true;
        }

        for (int L : cfg.checks.levels) {
          ChartPtr chart = build_chart(chart_name, {L, L, L}, cfg.domain.periods);
          MapField f = random_smooth_map(chart, target, map_seed);
          const double dt =
              cfg.checks.dt > 0.0 ? cfg.checks.dt : chart->grid.max_spacing();
          if (suite == "first-variation") {
            SectionField V = random_smooth_section(f, var_seed);
            s.levels.push_back(first_variation_residual(f, V, G, dt, order));
          } else if (suite == "divergence") {
            SectionField W = random_smooth_section(f, pair_seed);
            s.levels.push_back(divergence_identity_residual(f, W, order));
          } else if (suite == "second-variation") {
            SectionField V = random_smooth_section(f, var_seed);
            s.levels.push_back(second_variation_residual(f, V, G, dt, order));
            if (flipped) {
              flipped->levels.push_back(
                  second_variation_residual_flipped(f, V, G, dt, order));
              if (L == cfg.checks.levels.back()) {
                // The mis-signed form misses the true second derivative by
                // exactly twice the integrated Hessian term.
                const IndexParts parts = index_form_parts(f, V, G, order);
                flipped->expected_limit = std::fabs(2.0 * parts.hessian);
              }
            }
          } else {
            throw ConfigError("unknown check suite '" + suite + "'");
          }
        }
        evaluate_study(s);
        studies.push_back(std::move(s));
        if (flipped) {
          // The diagnostic passes when the pinned residual is detected, that
          // is, when a mis-signed Hessian term could not slip through.
          const double got = flipped->levels.back().residual;
          const bool detected =
              flipped->expected_limit > 0.0 &&
              std::fabs(got - flipped->expected_limit) <=
                  0.05 * flipped->expected_limit;
          flipped->passed = detected;
          diagnostic[flipped->name] =
              json{{"flipped_residual", got},
                   {"expected_limit", flipped->expected_limit},
                   {"detected", detected}};
          studies.push_back(std::move(*flipped));
        }
      }
    }
  }

  bool all_passed = true;
  json study_rows = json::array();
  for (const Study& s : studies) {
    print_study(s);
    study_rows.push_back(study_to_json(s));
    all_passed = all_passed && s.passed;
  }

  json report{{"command", "check"},
              {"seed", cfg.seed},
              {"domain", cfg.domain.name},
              {"target", cfg.target.kind},
              {"potential", G.label()},
              {"levels", cfg.checks.levels},
              {"studies", study_rows},
              {"passed", all_passed}};
  if (!diagnostic.is_null()) report["sign_flip_diagnostic"] = diagnostic;
  write_json(out_dir / "check_report.json", report);
  return all_passed ? 0 : 1;
}

int cmd_flow(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  ChartPtr chart = make_chart(cfg.domain);
  const Target target = make_target(cfg.target);
  const Potential G = make_potential(cfg.potential);

  MapField f0 = initial_map(cfg.flow_initial, chart, target,
                            derive_seed(cfg.seed, "flow-initial"), cfg.constant_point);

  FlowCallback checkpoints;
  if (cfg.flow.checkpoint_every > 0) {
    checkpoints = [&](int step, const MapField& f) {
      if (step % cfg.flow.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof name, "checkpoint_%06d.field", step);
        dump_map(out_dir / name, f);
      }
    };
  }

  const FlowOutcome outcome = flow_until(f0, G, cfg.flow, checkpoints);

  write_file_atomic(out_dir / "trace.csv", trace_to_csv(outcome.trace));
  dump_map(out_dir / "final.field", outcome.field);

  const FlowStep& last = outcome.trace.steps.back();
  json summary{{"command", "flow"},
               {"status", to_string(outcome.status)},
               {"steps", last.step},
               {"final_energy", last.energy},
               {"final_tension_sup", last.tension_sup},
               {"rejected_steps", outcome.trace.rejected_steps},
               {"max_sphere_drift", outcome.trace.max_sphere_drift},
               {"trace", "trace.csv"},
               {"field", "final.field"}};
  write_json(out_dir / "flow_summary.json", summary);

  std::printf("flow %s after %d steps: E = %.12g, |tension| = %.3g\n",
              to_string(outcome.status).c_str(), last.step, last.energy,
              last.tension_sup);

  switch (outcome.status) {
    case FlowStatus::converged: return 0;
    case FlowStatus::max_steps: return 1;
    case FlowStatus::blowup: return 3;
  }
  return 3;
}

int cmd_stability(const RunConfig& cfg, const std::filesystem::path& field_path,
                  const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const FieldDump dump = load_field_dump(field_path);
  const MapField f = map_from_dump(dump);
  const Potential G = make_potential(cfg.potential);
  const FdOrder order = cfg.flow.order;

  const double margin = cfg.stability.margin > 0.0
                            ? cfg.stability.margin
                            : default_certification_margin(f, G, order);

  CertificateOptions copts;
  copts.tension_threshold = cfg.stability.tension_factor * cfg.flow.tol;
  copts.rayleigh_iters = cfg.stability.rayleigh_iters;
  copts.seed = derive_seed(cfg.seed, "stability-rayleigh");
  copts.order = order;

  StabilityVerdict verdict = instability_certificate(f, G, margin, copts);

  if (cfg.stability.samples > 0) {
    const StabilityVerdict probe = stability_probe(
        f, G, cfg.stability.samples, derive_seed(cfg.seed, "stability-probe"), order);
    verdict.probes += probe.probes;
    if (probe.min_index < verdict.min_index) verdict.min_index = probe.min_index;
    if (verdict.verdict != Verdict::unstable_certified &&
        probe.verdict == Verdict::unstable_certified) {
      verdict.verdict = probe.verdict;
      verdict.witness = probe.witness;
      verdict.witness_label = probe.witness_label;
    }
  }

  std::string witness_ref;
  if (verdict.witness) {
    witness_ref = "witness.field";
    dump_section(out_dir / witness_ref, *verdict.witness, f.target());
  }

  json record{{"command", "stability"},
              {"verdict", to_string(verdict.verdict)},
              {"min_index", verdict.min_index},
              {"witness_ref", witness_ref},
              {"witness_label", verdict.witness_label},
              {"probes", verdict.probes},
              {"tension_sup", verdict.tension_sup},
              {"tension_threshold", copts.tension_threshold},
              {"margin", margin},
              {"hessian_min_eig", hessian_min_eigen(f, G)}};
  if (verdict.lambda_min) record["lambda_min"] = *verdict.lambda_min;
  write_json(out_dir / "stability_verdict.json", record);

  std::printf("stability: %s (min index %.6g over %d probes)\n",
              to_string(verdict.verdict).c_str(), verdict.min_index, verdict.probes);
  return 0;
}

int cmd_leung(const RunConfig& cfg, const std::filesystem::path& field_path,
              const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const FieldDump dump = load_field_dump(field_path);
  const MapField f = map_from_dump(dump);
  const Potential G = make_potential(cfg.potential);
  const FdOrder order = cfg.flow.order;

  if (!f.target().is_sphere())
    throw UnsupportedTargetError("the conformal identity suite needs a sphere target");

  bool all_ok = true;
  json rows = json::array();
  std::vector<double> axis(static_cast<std::size_t>(f.dim()), 0.0);
  for (int s = 0; s < f.dim(); ++s) {
    axis.assign(axis.size(), 0.0);
    axis[static_cast<std::size_t>(s)] = 1.0;
    const IdentityReport rep = sphere_index_identity(f, G, axis, order);
    const bool ok = rep.diff <= 1e-10 * rep.scale;
    all_ok = all_ok && ok;
    rows.push_back(json{{"axis", s},
                        {"lhs", rep.lhs},
                        {"rhs", rep.rhs},
                        {"diff", rep.diff},
                        {"scale", rep.scale},
                        {"passed", ok}});
    std::printf("[%s] axis %d: I = %.10g, grouped = %.10g, diff = %.3g\n",
                ok ? "PASS" : "FAIL", s, rep.lhs, rep.rhs, rep.diff);
  }

  const LeungReport sum = leung_sum(f, G, order);
  const bool sum_ok = sum.diff <= 1e-10 * sum.scale;
  all_ok = all_ok && sum_ok;
  std::printf("[%s] sum: direct = %.10g, reduced = %.10g, diff = %.3g\n",
              sum_ok ? "PASS" : "FAIL", sum.sum_direct, sum.sum_reduced, sum.diff);

  json report{{"command", "leung"},
              {"potential", G.label()},
              {"axes", rows},
              {"sum_direct", sum.sum_direct},
              {"sum_reduced", sum.sum_reduced},
              {"sum_diff", sum.diff},
              {"sum_scale", sum.scale},
              {"horizontal_energy", sum.horizontal_energy},
              {"passed", all_ok}};
  write_json(out_dir / "leung_report.json", report);
  return all_ok ? 0 : 1;
}

int subflow_main(int argc, const char* const* argv) {
  CLI::App app{"Subelliptic harmonic map flow and stability toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string field_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;

  auto* check = app.add_subcommand("check", "residual suites with grid refinement");
  auto* flow = app.add_subcommand("flow", "run the gradient flow");
  auto* stability =
      app.add_subcommand("stability", "stability verdict for a dumped field");
  auto* leung = app.add_subcommand("leung", "conformal index identities");

  for (CLI::App* sub : {check, flow, stability, leung}) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed_override, "seed (overrides config)");
  }
  stability->add_option("--field", field_path, "field dump from a flow run")
      ->required();
  leung->add_option("--field", field_path, "field dump from a flow run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.flow.seed = *seed_override;
    }
    const std::filesystem::path out = out_dir.empty() ? cfg.output : out_dir;

    if (check->parsed()) return cmd_check(cfg, out);
    if (flow->parsed()) return cmd_flow(cfg, out);
    if (stability->parsed()) return cmd_stability(cfg, field_path, out);
    if (leung->parsed()) return cmd_leung(cfg, field_path, out);
    return 2;
  } catch (const SubflowError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

}  // namespace subflow::cli
