#include "subflow/variational.hpp"

#include <cmath>

#include "subflow/errors.hpp"
#include "subflow/parallel.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

namespace {

VariationReport make_report(std::string check, const MapField& f, double dt) {
  VariationReport r;
  r.check = std::move(check);
  r.grid = f.chart().grid.n;
  r.h = f.chart().grid.max_spacing();
  r.dt = dt;
  return r;
}

double energy_along(const MapField& f, const SectionField& V, const Potential& G,
                    double t, FdOrder order) {
  return total_energy(exp_map(f, V, t), G, order);
}

}  // namespace

ScalarField energy_density(const MapField& f, FdOrder order) {
  const auto dfs = horizontal_differential(f, order);
  ScalarField e(f.chart().grid);
  for (int p = 0; p < f.chart().grid.npoints; ++p) {
    double s = 0.0;
    for (const auto& df : dfs) s += vo::norm_sq(df.at(p));
    e[p] = 0.5 * s;
  }
  return e;
}

double total_energy(const MapField& f, const Potential& G, FdOrder order) {
  ScalarField integrand = energy_density(f, order);
  const Target& t = f.target();
  for (int p = 0; p < f.chart().grid.npoints; ++p)
    integrand[p] -= G.value(t, f.at(p));
  return integrate(f.chart(), integrand);
}

SectionField tension_with_potential(const MapField& f, const Potential& G, FdOrder order) {
  const DomainChart& chart = f.chart();
  const Target& tgt = f.target();
  const int m = chart.m;
  const int dim = f.dim();
  const auto dfs = horizontal_differential(f, order);

  VectorField acc(chart.grid, dim);
  // Trace of the horizontal second fundamental form: project the frame
  // derivative of df(e_i) and subtract df along the horizontal part of
  // nabla_{e_i} e_i.
  for (int i = 0; i < m; ++i) {
    VectorField ddf = frame_derivative(chart, dfs[static_cast<std::size_t>(i)], i, order);
    parallel_for(chart.grid.npoints, [&](int begin, int end) {
      std::vector<double> tmp(static_cast<std::size_t>(dim));
      for (int p = begin; p < end; ++p) {
        tgt.project_tangent(f.at(p), ddf.at(p), tmp);
        auto out = acc.at(p);
        for (int c = 0; c < dim; ++c) out[c] += tmp[static_cast<std::size_t>(c)];
      }
    });
  }

  parallel_for(chart.grid.npoints, [&](int begin, int end) {
    std::vector<double> grad(static_cast<std::size_t>(dim));
    for (int p = begin; p < end; ++p) {
      auto out = acc.at(p);
      for (int i = 0; i < m; ++i) {
        // - df(pi_H nabla_{e_i} e_i)  and  - df(vertical mean curvature)
        for (int j = 0; j < m; ++j) {
          const double coef = chart.connection_coef(p, i, i, j);
          if (coef != 0.0) vo::axpy(-coef, dfs[static_cast<std::size_t>(j)].at(p), out);
        }
      }
      for (int j = 0; j < m; ++j) {
        const double zeta = chart.vert_mean_curvature_coef(p, j);
        if (zeta != 0.0) vo::axpy(-zeta, dfs[static_cast<std::size_t>(j)].at(p), out);
      }
      G.gradient(tgt, f.at(p), grad);
      vo::axpy(1.0, grad, out);
    }
  });
  return SectionField(f.chart_ptr(), std::move(acc));
}

double tension_sup_norm(const MapField& f, const Potential& G, FdOrder order) {
  return section_sup_norm(tension_with_potential(f, G, order));
}

VariationReport first_variation_residual(const MapField& f, const SectionField& V,
                                         const Potential& G, double dt, FdOrder order) {
  if (!(dt > 0.0)) throw ValidationError("variation step dt must be positive");
  VariationReport r = make_report("first-variation", f, dt);

  SectionField tau = tension_with_potential(f, G, order);
  ScalarField pairing(f.chart().grid);
  for (int p = 0; p < f.chart().grid.npoints; ++p)
    pairing[p] = vo::dot(V.at(p), tau.at(p));
  r.analytic = -integrate(f.chart(), pairing);

  const double em2 = energy_along(f, V, G, -2.0 * dt, order);
  const double em1 = energy_along(f, V, G, -dt, order);
  const double ep1 = energy_along(f, V, G, dt, order);
  const double ep2 = energy_along(f, V, G, 2.0 * dt, order);
  r.fd = (em2 - 8.0 * em1 + 8.0 * ep1 - ep2) / (12.0 * dt);
  if (!std::isfinite(r.fd)) throw NumericalError("non-finite energy in variation probe");

  r.residual = std::fabs(r.analytic - r.fd);
  return r;
}

VariationReport divergence_identity_residual(const MapField& f, const SectionField& W,
                                             FdOrder order) {
  const DomainChart& chart = f.chart();
  VariationReport r = make_report("divergence-identity", f, 0.0);
  const auto dfs = horizontal_differential(f, order);
  const int m = chart.m;

  ScalarField lhs(chart.grid);
  for (int i = 0; i < m; ++i) {
    ScalarField s(chart.grid);
    for (int p = 0; p < chart.grid.npoints; ++p)
      s[p] = vo::dot(W.at(p), dfs[static_cast<std::size_t>(i)].at(p));
    ScalarField ds = frame_derivative(chart, s, i, order);
    for (int p = 0; p < chart.grid.npoints; ++p) {
      double corr = 0.0;
      for (int j = 0; j < m; ++j) {
        const double coef = chart.connection_coef(p, i, i, j);
        if (coef != 0.0)
          corr += coef * vo::dot(W.at(p), dfs[static_cast<std::size_t>(j)].at(p));
      }
      lhs[p] += ds[p] - corr;
    }
  }

  ScalarField rhs(chart.grid);
  for (int p = 0; p < chart.grid.npoints; ++p) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double zeta = chart.vert_mean_curvature_coef(p, j);
      if (zeta != 0.0) s += zeta * vo::dot(W.at(p), dfs[static_cast<std::size_t>(j)].at(p));
    }
    rhs[p] = s;
  }

  r.analytic = integrate(chart, lhs);
  r.fd = integrate(chart, rhs);
  r.residual = std::fabs(r.analytic - r.fd);
  return r;
}

double IndexParts::gross() const {
  return std::fabs(dirichlet) + std::fabs(curvature) + std::fabs(hessian);
}

namespace {

IndexParts index_parts_impl(const MapField& f, const SectionField& V,
                            const std::vector<VectorField>* given_derivs,
                            const Potential& G, FdOrder order) {
  const DomainChart& chart = f.chart();
  const Target& tgt = f.target();
  const auto dfs = horizontal_differential(f, order);
  const int m = chart.m;

  std::vector<VectorField> derivs;
  const std::vector<VectorField>* dv = given_derivs;
  if (dv == nullptr) {
    derivs.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      derivs.push_back(pullback_covariant_derivative(f, V, i, order).values());
    dv = &derivs;
  } else if (static_cast<int>(dv->size()) != m) {
    throw ValidationError("derivative fields must match the horizontal rank");
  }

  ScalarField dir(chart.grid), curv(chart.grid), hess(chart.grid);
  for (int p = 0; p < chart.grid.npoints; ++p) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += vo::norm_sq((*dv)[static_cast<std::size_t>(i)].at(p));
    dir[p] = s;
    double c = 0.0;
    for (int i = 0; i < m; ++i)
      c += tgt.curvature_term(f.at(p), dfs[static_cast<std::size_t>(i)].at(p), V.at(p));
    curv[p] = c;
    hess[p] = G.hessian(tgt, f.at(p), V.at(p), V.at(p));
  }

  IndexParts parts;
  parts.dirichlet = integrate(chart, dir);
  parts.curvature = integrate(chart, curv);
  parts.hessian = integrate(chart, hess);
  return parts;
}

}  // namespace

IndexParts index_form_parts(const MapField& f, const SectionField& V, const Potential& G,
                            FdOrder order) {
  return index_parts_impl(f, V, nullptr, G, order);
}

IndexParts index_form_parts_given(const MapField& f, const SectionField& V,
                                  const std::vector<VectorField>& derivs,
                                  const Potential& G, FdOrder order) {
  return index_parts_impl(f, V, &derivs, G, order);
}

double index_form(const MapField& f, const SectionField& V, const Potential& G,
                  FdOrder order) {
  return index_form_parts(f, V, G, order).value();
}

double index_form_polarized(const MapField& f, const SectionField& V,
                            const SectionField& W, const Potential& G, FdOrder order) {
  const SectionField plus = section_combine(1.0, V, 1.0, W);
  const SectionField minus = section_combine(1.0, V, -1.0, W);
  return 0.25 * (index_form(f, plus, G, order) - index_form(f, minus, G, order));
}

namespace {

VariationReport second_variation_impl(const MapField& f, const SectionField& V,
                                      const Potential& G, double dt, FdOrder order,
                                      bool flip_hessian) {
  if (!(dt > 0.0)) throw ValidationError("variation step dt must be positive");
  VariationReport r = make_report(
      flip_hessian ? "second-variation-flipped" : "second-variation", f, dt);

  const IndexParts parts = index_form_parts(f, V, G, order);
  r.analytic = flip_hessian ? parts.dirichlet - parts.curvature + parts.hessian
                            : parts.value();

  const double e0 = total_energy(f, G, order);
  const double em2 = energy_along(f, V, G, -2.0 * dt, order);
  const double em1 = energy_along(f, V, G, -dt, order);
  const double ep1 = energy_along(f, V, G, dt, order);
  const double ep2 = energy_along(f, V, G, 2.0 * dt, order);
  r.fd = (-em2 + 16.0 * em1 - 30.0 * e0 + 16.0 * ep1 - ep2) / (12.0 * dt * dt);
  if (!std::isfinite(r.fd)) throw NumericalError("non-finite energy in variation probe");

  r.residual = std::fabs(r.analytic - r.fd);
  return r;
}

}  // namespace

VariationReport second_variation_residual(const MapField& f, const SectionField& V,
                                          const Potential& G, double dt, FdOrder order) {
  return second_variation_impl(f, V, G, dt, order, false);
}

VariationReport second_variation_residual_flipped(const MapField& f,
                                                  const SectionField& V,
                                                  const Potential& G, double dt,
                                                  FdOrder order) {
  return second_variation_impl(f, V, G, dt, order, true);
}

}  // namespace subflow
