#include "subflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "subflow/errors.hpp"
#include "subflow/sampling.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::max_steps: return "max-steps";
    case FlowStatus::blowup: return "blowup";
  }
  return "unknown";
}

MapField initial_map(std::string_view kind, ChartPtr chart, const Target& target,
                     std::uint64_t seed, std::span<const double> constant_point) {
  if (kind == "constant") {
    if (constant_point.empty()) {
      std::vector<double> pole(static_cast<std::size_t>(target.ambient_dim()), 0.0);
      pole.back() = 1.0;
      return constant_map(std::move(chart), target, pole);
    }
    return constant_map(std::move(chart), target, constant_point);
  }
  if (kind == "wrap") {
    if (target.ambient_dim() < 3)
      throw ConfigError("wrap initial data needs at least three ambient dimensions");
    const Grid& g = chart->grid;
    VectorField v(g, target.ambient_dim());
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        for (int k = 0; k < g.n[2]; ++k) {
          const auto x = g.coords(i, j, k);
          const double a = two_pi * x[0] / g.period[0];
          const double b = two_pi * x[1] / g.period[1];
          auto slot = v.at(g.index(i, j, k));
          vo::fill(slot, 0.0);
          slot[0] = std::cos(a);
          slot[1] = std::sin(a) * std::cos(b);
          slot[2] = std::sin(a) * std::sin(b);
        }
    return MapField(std::move(chart), target, std::move(v));
  }
  if (kind == "random-smooth") {
    return random_smooth_map(std::move(chart), target, seed);
  }
  throw ConfigError("unknown initial map kind: " + std::string(kind));
}

namespace {

StepResult try_step(const MapField& f, const SectionField& tau, const Potential& G,
                    double dt, double current_energy, FdOrder order) {
  MapField candidate = exp_map(f, tau, dt);
  const double e = total_energy(candidate, G, order);
  if (!std::isfinite(e))
    throw NumericalError("non-finite energy in flow step");
  StepResult r{std::move(candidate), e, e <= current_energy};
  return r;
}

double sphere_drift(const MapField& f) {
  if (!f.target().is_sphere()) return 0.0;
  double worst = 0.0;
  for (int p = 0; p < f.chart().grid.npoints; ++p)
    worst = std::max(worst, std::fabs(vo::norm(f.at(p)) - 1.0));
  return worst;
}

}  // namespace

StepResult flow_step(const MapField& f, const Potential& G, double dt, FdOrder order) {
  if (!(dt > 0.0)) throw ValidationError("flow step dt must be positive");
  const SectionField tau = tension_with_potential(f, G, order);
  const double e0 = total_energy(f, G, order);
  return try_step(f, tau, G, dt, e0, order);
}

FlowOutcome flow_until(const MapField& f0, const Potential& G, const FlowOptions& opts,
                       const FlowCallback& on_accept) {
  if (!(opts.tol > 0.0)) throw ValidationError("flow tolerance must be positive");
  if (!(opts.backtrack > 0.0 && opts.backtrack < 1.0))
    throw ValidationError("backtracking factor must lie in (0,1)");
  if (opts.max_steps < 0) throw ValidationError("flow step budget must be nonnegative");

  const double hmin = std::min({f0.chart().grid.h[0], f0.chart().grid.h[1],
                                f0.chart().grid.h[2]});
  const double dt0 = opts.dt > 0.0 ? opts.dt : 0.2 * hmin * hmin;

  FlowOutcome out{f0, {}, FlowStatus::max_steps};
  double energy = total_energy(out.field, G, opts.order);
  double dt = dt0;
  int consecutive_accepts = 0;

  auto record = [&](int step, double e, double tension, double used_dt) {
    out.trace.steps.push_back({step, e, tension, used_dt});
  };

  try {
    SectionField tau = tension_with_potential(out.field, G, opts.order);
    double tension = section_sup_norm(tau);
    if (!std::isfinite(tension) || !std::isfinite(energy))
      throw NumericalError("non-finite initial state");
    record(0, energy, tension, 0.0);
    out.trace.max_sphere_drift = sphere_drift(out.field);

    for (int step = 1; step <= opts.max_steps; ++step) {
      if (tension <= opts.tol) {
        out.status = FlowStatus::converged;
        return out;
      }
      StepResult res = try_step(out.field, tau, G, dt, energy, opts.order);
      int shrink = 0;
      while (!res.accepted && shrink < opts.max_backtracks) {
        dt *= opts.backtrack;
        ++shrink;
        ++out.trace.rejected_steps;
        consecutive_accepts = 0;
        if (dt < 1e-13 * dt0) break;
        res = try_step(out.field, tau, G, dt, energy, opts.order);
      }
      if (!res.accepted) {
        // No acceptable step at any reachable dt: out of budget for progress.
        out.status = FlowStatus::max_steps;
        return out;
      }
      out.field = std::move(res.next);
      energy = res.energy;
      tau = tension_with_potential(out.field, G, opts.order);
      tension = section_sup_norm(tau);
      if (!std::isfinite(tension))
        throw NumericalError("non-finite tension during flow");
      record(step, energy, tension, dt);
      out.trace.max_sphere_drift =
          std::max(out.trace.max_sphere_drift, sphere_drift(out.field));
      if (on_accept) on_accept(step, out.field);
      if (++consecutive_accepts >= opts.grow_after && dt < dt0) {
        dt = std::min(dt0, dt / opts.backtrack);
        consecutive_accepts = 0;
      }
    }
    SectionField tau_final = tension_with_potential(out.field, G, opts.order);
    out.status = section_sup_norm(tau_final) <= opts.tol ? FlowStatus::converged
                                                         : FlowStatus::max_steps;
    return out;
  } catch (const NumericalError&) {
    out.status = FlowStatus::blowup;
    return out;
  }
}

std::string trace_to_csv(const FlowTrace& trace) {
  std::string csv = "step,energy,tension_sup,dt\n";
  char line[160];
  for (const FlowStep& s : trace.steps) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", s.step, s.energy,
                  s.tension_sup, s.dt);
    csv += line;
  }
  return csv;
}

}  // namespace subflow
