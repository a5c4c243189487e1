#include "subflow/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "subflow/errors.hpp"
#include "subflow/numerics.hpp"
#include "subflow/rng.hpp"
#include "subflow/sampling.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable_probed: return "stable-probed";
    case Verdict::unstable_certified: return "unstable-certified";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

ConformalField conformal_field(const MapField& f, std::span<const double> direction) {
  if (!f.target().is_sphere())
    throw UnsupportedTargetError("conformal fields are defined for sphere targets only");
  if (static_cast<int>(direction.size()) != f.dim())
    throw ValidationError("conformal direction has wrong ambient dimension");

  const Grid& g = f.chart().grid;
  ConformalField out{std::vector<double>(direction.begin(), direction.end()),
                     zero_section(f), ScalarField(g)};
  for (int p = 0; p < g.npoints; ++p) {
    auto y = f.at(p);
    const double phi = vo::dot(direction, y);
    out.height[p] = phi;
    auto slot = out.section.at(p);
    for (int c = 0; c < f.dim(); ++c) slot[c] = direction[static_cast<std::size_t>(c)] - phi * y[c];
  }
  return out;
}

std::vector<VectorField> conformal_derivatives(const MapField& f,
                                               const ConformalField& v,
                                               const std::vector<VectorField>& dfs) {
  std::vector<VectorField> out;
  out.reserve(dfs.size());
  for (const VectorField& df : dfs) {
    VectorField d(f.chart().grid, f.dim());
    for (int p = 0; p < f.chart().grid.npoints; ++p) {
      auto src = df.at(p);
      auto dst = d.at(p);
      const double phi = v.height[p];
      for (int c = 0; c < f.dim(); ++c) dst[c] = -phi * src[c];
    }
    out.push_back(std::move(d));
  }
  return out;
}

IdentityReport sphere_index_identity(const MapField& f, const Potential& G,
                                     std::span<const double> direction, FdOrder order) {
  const ConformalField v = conformal_field(f, direction);
  const auto dfs = horizontal_differential(f, order);
  const auto derivs = conformal_derivatives(f, v, dfs);

  IdentityReport rep;
  rep.lhs = index_form_parts_given(f, v.section, derivs, G, order).value();

  // Grouped form: 2 e_H (phi^2 - |v|^2) + sum_i <df(e_i), v>^2 - Hess G(v,v).
  const DomainChart& chart = f.chart();
  ScalarField integrand(chart.grid);
  const Target& tgt = f.target();
  for (int p = 0; p < chart.grid.npoints; ++p) {
    double two_e = 0.0;
    double pair_sq = 0.0;
    for (const auto& df : dfs) {
      two_e += vo::norm_sq(df.at(p));
      const double pr = vo::dot(df.at(p), v.section.at(p));
      pair_sq += pr * pr;
    }
    const double phi = v.height[p];
    const double vsq = vo::norm_sq(v.section.at(p));
    integrand[p] = two_e * (phi * phi - vsq) + pair_sq -
                   G.hessian(tgt, f.at(p), v.section.at(p), v.section.at(p));
  }
  rep.rhs = integrate(chart, integrand);
  rep.diff = std::fabs(rep.lhs - rep.rhs);
  rep.scale = 1.0 + std::fabs(rep.lhs) + std::fabs(rep.rhs);
  return rep;
}

LeungReport leung_sum(const MapField& f, const Potential& G, FdOrder order) {
  if (!f.target().is_sphere())
    throw UnsupportedTargetError("the conformal-sum reduction needs a sphere target");
  const int ambient = f.dim();
  const int n = f.target().dim();
  const DomainChart& chart = f.chart();
  const auto dfs = horizontal_differential(f, order);

  LeungReport rep;
  ExactAccumulator direct;
  ScalarField hess_sum(chart.grid);
  std::vector<double> axis(static_cast<std::size_t>(ambient), 0.0);
  for (int s = 0; s < ambient; ++s) {
    axis.assign(static_cast<std::size_t>(ambient), 0.0);
    axis[static_cast<std::size_t>(s)] = 1.0;
    const ConformalField v = conformal_field(f, axis);
    const auto derivs = conformal_derivatives(f, v, dfs);
    const double val = index_form_parts_given(f, v.section, derivs, G, order).value();
    rep.per_direction.push_back(val);
    direct.add(val);
    for (int p = 0; p < chart.grid.npoints; ++p)
      hess_sum[p] += G.hessian(f.target(), f.at(p), v.section.at(p), v.section.at(p));
  }
  rep.sum_direct = direct.result();

  ScalarField e = energy_density(f, order);
  rep.horizontal_energy = integrate(chart, e);
  rep.sum_reduced =
      2.0 * (2.0 - n) * rep.horizontal_energy - integrate(chart, hess_sum);
  rep.diff = std::fabs(rep.sum_direct - rep.sum_reduced);
  rep.scale = 1.0 + std::fabs(rep.sum_direct) + std::fabs(rep.sum_reduced);
  return rep;
}

double default_certification_margin(const MapField& f, const Potential& G,
                                    FdOrder order) {
  return 1e-6 * (1.0 + std::fabs(total_energy(f, G, order)));
}

namespace {

// L2-normalize a section in place; returns false when its norm is degenerate.
bool l2_normalize(const DomainChart& chart, SectionField& V) {
  const double nsq = section_l2_inner(chart, V, V);
  if (!(nsq > 1e-24)) return false;
  const double inv = 1.0 / std::sqrt(nsq);
  auto data = V.values().data();
  for (auto& x : data) x *= inv;
  return true;
}

// Deterministic probe pool: ambient-axis conformal sections first (sphere
// targets), then seeded smooth sections. Index k is stable across calls, so
// enlarging the sample count only appends probes.
SectionField probe_section(const MapField& f, int k, std::uint64_t seed) {
  if (f.target().is_sphere() && k < f.dim()) {
    std::vector<double> axis(static_cast<std::size_t>(f.dim()), 0.0);
    axis[static_cast<std::size_t>(k)] = 1.0;
    return conformal_field(f, axis).section;
  }
  return random_smooth_section(f, derive_seed(seed, "probe-" + std::to_string(k)));
}

struct PoolEntry {
  SectionField section;
  std::string label;
};

std::vector<PoolEntry> rayleigh_pool(const MapField& f, std::uint64_t seed, int size) {
  std::vector<PoolEntry> pool;
  if (f.target().is_sphere()) {
    for (int s = 0; s < f.dim(); ++s) {
      std::vector<double> axis(static_cast<std::size_t>(f.dim()), 0.0);
      axis[static_cast<std::size_t>(s)] = 1.0;
      pool.push_back({conformal_field(f, axis).section,
                      "conformal-axis-" + std::to_string(s)});
    }
  } else {
    for (int s = 0; s < f.dim(); ++s) {
      VectorField constant(f.chart().grid, f.dim());
      for (int p = 0; p < f.chart().grid.npoints; ++p) constant.at(p)[s] = 1.0;
      pool.push_back({SectionField(f.chart_ptr(), std::move(constant)),
                      "constant-axis-" + std::to_string(s)});
    }
  }
  int k = 0;
  while (static_cast<int>(pool.size()) < size) {
    pool.push_back(
        {random_smooth_section(f, derive_seed(seed, "pool-" + std::to_string(k))),
         "smooth-" + std::to_string(k)});
    ++k;
  }
  return pool;
}

}  // namespace

StabilityVerdict stability_probe(const MapField& f, const Potential& G, int samples,
                                 std::uint64_t seed, FdOrder order) {
  if (samples < 0) throw ValidationError("probe sample count must be nonnegative");
  StabilityVerdict out;
  out.probes = samples;
  out.tension_sup = tension_sup_norm(f, G, order);
  if (samples == 0) {
    out.verdict = Verdict::inconclusive;
    return out;
  }
  bool first = true;
  for (int k = 0; k < samples; ++k) {
    SectionField v = probe_section(f, k, seed);
    const bool normalized = l2_normalize(f.chart(), v);
    const IndexParts parts = index_form_parts(f, v, G, order);
    const double val = parts.value();
    const double slack = 1e-8 * (1.0 + parts.gross());
    if (first || val < out.min_index) {
      out.min_index = val;
      if (val < -slack) {
        out.witness = v;
        out.witness_label = "probe-" + std::to_string(k);
      }
      first = false;
    }
    if (val < -slack) out.verdict = Verdict::unstable_certified;
    (void)normalized;
  }
  if (out.verdict != Verdict::unstable_certified) out.verdict = Verdict::stable_probed;
  return out;
}

RayleighResult rayleigh_minimize(const MapField& f, const Potential& G, int iters,
                                 std::uint64_t seed, FdOrder order) {
  if (iters < 0) throw ValidationError("iteration budget must be nonnegative");
  RayleighResult res;
  const DomainChart& chart = f.chart();

  const int pool_size = std::max(f.dim() + 1, 10);
  std::vector<PoolEntry> raw = rayleigh_pool(f, seed, pool_size);

  // L2 Gram-Schmidt; drop directions that are numerically dependent.
  std::vector<SectionField> basis;
  for (PoolEntry& entry : raw) {
    SectionField v = std::move(entry.section);
    for (const SectionField& b : basis) {
      const double c = section_l2_inner(chart, v, b);
      v = section_combine(1.0, v, -c, b);
    }
    const double nsq = section_l2_inner(chart, v, v);
    if (nsq > 1e-10) {
      auto data = v.values().data();
      const double inv = 1.0 / std::sqrt(nsq);
      for (auto& x : data) x *= inv;
      basis.push_back(std::move(v));
    }
  }
  const int K = static_cast<int>(basis.size());
  if (K == 0) throw ValidationError("no usable directions for the Rayleigh minimizer");

  // Index form as a K x K matrix over the orthonormal basis.
  std::vector<double> A(static_cast<std::size_t>(K) * K, 0.0);
  for (int a = 0; a < K; ++a) {
    A[static_cast<std::size_t>(a) * K + a] = index_form(f, basis[static_cast<std::size_t>(a)], G, order);
    for (int b = a + 1; b < K; ++b) {
      const double val = index_form_polarized(f, basis[static_cast<std::size_t>(a)],
                                              basis[static_cast<std::size_t>(b)], G, order);
      A[static_cast<std::size_t>(a) * K + b] = val;
      A[static_cast<std::size_t>(b) * K + a] = val;
    }
  }

  auto rayleigh = [&](const std::vector<double>& c) {
    double num = 0.0;
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b)
        num += c[static_cast<std::size_t>(a)] * A[static_cast<std::size_t>(a) * K + b] * c[static_cast<std::size_t>(b)];
    return num;  // basis is orthonormal, |c| is kept at 1
  };

  // Warm start at the pool direction with the smallest diagonal value.
  std::vector<double> c(static_cast<std::size_t>(K), 0.0);
  int best_axis = 0;
  for (int a = 1; a < K; ++a)
    if (A[static_cast<std::size_t>(a) * K + a] < A[static_cast<std::size_t>(best_axis) * K + best_axis])
      best_axis = a;
  c[static_cast<std::size_t>(best_axis)] = 1.0;

  double value = rayleigh(c);
  res.history.push_back(value);
  double eta = 0.5;
  std::uint64_t restart_state = derive_seed(seed, "rayleigh-restart");

  std::vector<double> grad(static_cast<std::size_t>(K));
  std::vector<double> trial(static_cast<std::size_t>(K));
  for (int it = 0; it < iters; ++it) {
    // grad of c'Ac on the unit sphere: 2(Ac - value c)
    for (int a = 0; a < K; ++a) {
      double s = 0.0;
      for (int b = 0; b < K; ++b) s += A[static_cast<std::size_t>(a) * K + b] * c[static_cast<std::size_t>(b)];
      grad[static_cast<std::size_t>(a)] = 2.0 * (s - value * c[static_cast<std::size_t>(a)]);
    }
    bool improved = false;
    for (int bt = 0; bt < 40 && !improved; ++bt) {
      double nsq = 0.0;
      for (int a = 0; a < K; ++a) {
        trial[static_cast<std::size_t>(a)] = c[static_cast<std::size_t>(a)] - eta * grad[static_cast<std::size_t>(a)];
        nsq += trial[static_cast<std::size_t>(a)] * trial[static_cast<std::size_t>(a)];
      }
      if (nsq < 1e-28) {
        // Degenerate collapse: deterministic restart from a fresh direction.
        ++res.restarts;
        Rng rng(splitmix64(restart_state));
        for (int a = 0; a < K; ++a) trial[static_cast<std::size_t>(a)] = rng.uniform(-1.0, 1.0);
        nsq = 0.0;
        for (int a = 0; a < K; ++a) nsq += trial[static_cast<std::size_t>(a)] * trial[static_cast<std::size_t>(a)];
      }
      const double inv = 1.0 / std::sqrt(nsq);
      for (int a = 0; a < K; ++a) trial[static_cast<std::size_t>(a)] *= inv;
      const double tv = rayleigh(trial);
      if (tv <= value) {
        c = trial;
        value = tv;
        improved = true;
        eta = std::min(eta * 1.3, 10.0);
      } else {
        eta *= 0.5;
      }
    }
    res.history.push_back(value);
    if (!improved) break;
  }

  res.lambda_min = value;
  SectionField arg = zero_section(f);
  for (int a = 0; a < K; ++a)
    arg = section_combine(1.0, arg, c[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(a)]);
  res.argmin = std::move(arg);
  return res;
}

StabilityVerdict instability_certificate(const MapField& f, const Potential& G,
                                         double margin, const CertificateOptions& opts) {
  StabilityVerdict out;
  out.margin = margin;
  out.tension_threshold = opts.tension_threshold;
  out.tension_sup = tension_sup_norm(f, G, opts.order);
  if (!(out.tension_sup <= opts.tension_threshold)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "map is not close enough to critical: |tension| = %.3g > %.3g",
                  out.tension_sup, opts.tension_threshold);
    throw PreconditionError(buf);
  }

  bool have_min = false;
  if (f.target().is_sphere()) {
    const auto dfs = horizontal_differential(f, opts.order);
    std::vector<double> axis(static_cast<std::size_t>(f.dim()), 0.0);
    for (int s = 0; s < f.dim(); ++s) {
      axis.assign(static_cast<std::size_t>(f.dim()), 0.0);
      axis[static_cast<std::size_t>(s)] = 1.0;
      const ConformalField v = conformal_field(f, axis);
      const auto derivs = conformal_derivatives(f, v, dfs);
      const double val = index_form_parts_given(f, v.section, derivs, G, opts.order).value();
      ++out.probes;
      if (!have_min || val < out.min_index) {
        out.min_index = val;
        have_min = true;
        if (val < -margin) {
          out.witness = v.section;
          out.witness_label = "conformal-axis-" + std::to_string(s);
        }
      }
    }
    if (have_min && out.min_index < -margin) {
      out.verdict = Verdict::unstable_certified;
      return out;
    }
  }

  if (opts.rayleigh_iters > 0) {
    RayleighResult ray = rayleigh_minimize(f, G, opts.rayleigh_iters, opts.seed, opts.order);
    out.lambda_min = ray.lambda_min;
    out.restarts = ray.restarts;
    if (!have_min || ray.lambda_min < out.min_index) out.min_index = ray.lambda_min;
    if (ray.lambda_min < -margin) {
      out.verdict = Verdict::unstable_certified;
      out.witness = std::move(ray.argmin);
      out.witness_label = "rayleigh-argmin";
    } else {
      out.verdict = Verdict::stable_probed;
    }
    return out;
  }

  out.verdict = have_min ? Verdict::stable_probed : Verdict::inconclusive;
  return out;
}

double hessian_min_eigen(const MapField& f, const Potential& G) {
  const Target& tgt = f.target();
  const int ambient = f.dim();
  double global_min = 1e300;

  std::vector<std::vector<double>> basis;
  std::vector<double> h;
  for (int p = 0; p < f.chart().grid.npoints; ++p) {
    auto y = f.at(p);
    basis.clear();
    if (tgt.is_sphere()) {
      // Orthonormal tangent basis from projected coordinate axes.
      for (int a = 0; a < ambient && static_cast<int>(basis.size()) < tgt.dim(); ++a) {
        std::vector<double> cand(static_cast<std::size_t>(ambient), 0.0);
        cand[static_cast<std::size_t>(a)] = 1.0;
        std::vector<double> proj(static_cast<std::size_t>(ambient));
        tgt.project_tangent(y, cand, proj);
        for (const auto& b : basis) vo::axpy(-vo::dot(proj, b), b, proj);
        const double nrm = vo::norm(proj);
        if (nrm > 1e-8) {
          vo::scale(1.0 / nrm, proj);
          basis.push_back(std::move(proj));
        }
      }
    } else {
      for (int a = 0; a < ambient; ++a) {
        std::vector<double> cand(static_cast<std::size_t>(ambient), 0.0);
        cand[static_cast<std::size_t>(a)] = 1.0;
        basis.push_back(std::move(cand));
      }
    }
    const int n = static_cast<int>(basis.size());
    h.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double val = G.hessian(tgt, y, basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]);
        h[static_cast<std::size_t>(a) * n + b] = val;
        h[static_cast<std::size_t>(b) * n + a] = val;
      }
    global_min = std::min(global_min, symmetric_min_eigenvalue(h, n));
  }
  return global_min;
}

}  // namespace subflow
