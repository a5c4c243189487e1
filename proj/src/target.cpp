#include "subflow/target.hpp"

#include <cmath>

#include "subflow/errors.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

Target Target::unit_sphere(int n) {
  if (n < 1) throw ValidationError("sphere dimension must be at least 1");
  return Target(Kind::unit_sphere, n + 1);
}

Target Target::flat_space(int n) {
  if (n < 1) throw ValidationError("flat target dimension must be at least 1");
  return Target(Kind::flat_space, n);
}

void Target::check_point(std::span<const double> y, double tol) const {
  if (static_cast<int>(y.size()) != ambient_dim_)
    throw ValidationError("point has wrong ambient dimension");
  if (is_sphere()) {
    const double drift = std::fabs(vo::norm(y) - 1.0);
    if (!(drift <= tol))
      throw StateError("point is off the unit sphere beyond tolerance");
  }
}

void Target::check_tangent(std::span<const double> y, std::span<const double> v,
                           double tol) const {
  if (v.size() != y.size())
    throw ValidationError("vector has wrong ambient dimension");
  if (!is_sphere()) return;
  const double misalign = std::fabs(vo::dot(y, v));
  if (!(misalign <= tol * std::max(1.0, vo::norm(v))))
    throw ValidationError("vector is not tangent to the sphere at the base point");
}

void Target::project_tangent(std::span<const double> y, std::span<const double> w,
                             std::span<double> out) const {
  check_point(y);
  if (w.size() != y.size() || out.size() != y.size())
    throw ValidationError("projection operands have mismatched dimensions");
  if (!is_sphere()) {
    vo::copy(w, out);
    return;
  }
  // Dividing by <y,y> (instead of assuming it is exactly 1) keeps the
  // projection idempotent even with constraint drift at the tolerance edge.
  const double c = vo::dot(w, y) / vo::dot(y, y);
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - c * y[i];
}

void Target::exp(std::span<const double> y, std::span<const double> v,
                 std::span<double> out) const {
  check_point(y);
  check_tangent(y, v);
  if (!is_sphere()) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + v[i];
    return;
  }
  const double theta = vo::norm(v);
  if (theta == 0.0) {
    // Exact identity; renormalizing here would perturb a fixed point.
    vo::copy(y, out);
    return;
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta) / theta;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = c * y[i] + s * v[i];
  const double inv = 1.0 / vo::norm(out);
  vo::scale(inv, out);
}

double Target::curvature_term(std::span<const double> y, std::span<const double> X,
                              std::span<const double> V) const {
  if (!is_sphere()) return 0.0;
  check_tangent(y, X);
  check_tangent(y, V);
  const double xv = vo::dot(X, V);
  return vo::norm_sq(X) * vo::norm_sq(V) - xv * xv;
}

// ---------------------------------------------------------------------------

Potential Potential::constant(double c) {
  Potential g(Kind::constant, "constant");
  g.constant_ = c;
  return g;
}

Potential Potential::height() { return Potential(Kind::height, "height"); }

Potential Potential::squared_distance() {
  return Potential(Kind::squared_distance, "squared-distance");
}

Potential Potential::ambient(AmbientValue value, AmbientGrad grad, AmbientHess hess,
                             std::string label) {
  Potential g(Kind::ambient, std::move(label));
  g.ambient_value_ = std::move(value);
  g.ambient_grad_ = std::move(grad);
  g.ambient_hess_ = std::move(hess);
  return g;
}

Potential Potential::ambient_quadratic(double coeff) {
  return ambient(
      [coeff](std::span<const double> y) { return coeff * vo::norm_sq(y); },
      [coeff](std::span<const double> y, std::span<double> out) {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = 2.0 * coeff * y[i];
      },
      [coeff](std::span<const double>, std::span<const double> v,
              std::span<const double> w) { return 2.0 * coeff * vo::dot(v, w); },
      "ambient-quadratic");
}

namespace {

void require_sphere(const Target& t, const char* what) {
  if (!t.is_sphere())
    throw ValidationError(std::string(what) + " potential requires a sphere target");
}

// Polar distance data for the squared-distance potential: r = arccos<y, p>
// with p the north pole. Only defined on the open upper hemisphere.
struct PolarData {
  double r;
  double sin_r;  // |tangential part of p|
  double u;      // <y, p>
};

PolarData polar_data(std::span<const double> y) {
  PolarData pd;
  pd.u = y[y.size() - 1];
  if (!(pd.u > 0.0))
    throw DomainError("squared-distance potential evaluated at or below the equator");
  const double u = std::min(pd.u, 1.0);
  pd.r = std::acos(u);
  pd.sin_r = std::sqrt(std::max(0.0, 1.0 - u * u));
  return pd;
}

// dr applied to a tangent vector: -<p, V>/sin(r) = -V_last/sin(r).
double dr_of(const PolarData& pd, std::span<const double> v) {
  return -v[v.size() - 1] / pd.sin_r;
}

}  // namespace

double Potential::value(const Target& t, std::span<const double> y) const {
  switch (kind_) {
    case Kind::constant:
      return constant_;
    case Kind::height:
      require_sphere(t, "height");
      t.check_point(y);
      return -y[y.size() - 1];
    case Kind::squared_distance: {
      require_sphere(t, "squared-distance");
      t.check_point(y);
      const PolarData pd = polar_data(y);
      return pd.r * pd.r;
    }
    case Kind::ambient:
      t.check_point(y);
      return ambient_value_(y);
  }
  return 0.0;
}

void Potential::gradient(const Target& t, std::span<const double> y,
                         std::span<double> out) const {
  switch (kind_) {
    case Kind::constant:
      vo::fill(out, 0.0);
      return;
    case Kind::height: {
      require_sphere(t, "height");
      t.check_point(y);
      // tangential part of -e_last
      const double ylast = y[y.size() - 1];
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = ylast * y[i];
      out[out.size() - 1] -= 1.0;
      return;
    }
    case Kind::squared_distance: {
      require_sphere(t, "squared-distance");
      t.check_point(y);
      const PolarData pd = polar_data(y);
      if (pd.r < 1e-8) {
        vo::fill(out, 0.0);
        return;
      }
      // grad = 2 r * grad r, with grad r the unit tangent pointing away from p.
      const double c = 2.0 * pd.r / pd.sin_r;
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = c * pd.u * y[i];
      out[out.size() - 1] -= c;
      return;
    }
    case Kind::ambient: {
      t.check_point(y);
      std::vector<double> raw(y.size());
      ambient_grad_(y, raw);
      t.project_tangent(y, raw, out);
      return;
    }
  }
}

double Potential::hessian(const Target& t, std::span<const double> y,
                          std::span<const double> V, std::span<const double> W) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::height:
      require_sphere(t, "height");
      t.check_point(y);
      // Hess G = -G(y) <.,.> for this G; linear functions restricted to the
      // sphere pick up exactly the second-fundamental-form term.
      return vo::dot(V, W) * y[y.size() - 1];
    case Kind::squared_distance: {
      require_sphere(t, "squared-distance");
      t.check_point(y);
      const PolarData pd = polar_data(y);
      const double vw = vo::dot(V, W);
      if (pd.r < 1e-8) return 2.0 * vw;
      const double drv = dr_of(pd, V);
      const double drw = dr_of(pd, W);
      const double rcot = pd.r * (pd.u / pd.sin_r);
      return 2.0 * drv * drw + 2.0 * rcot * (vw - drv * drw);
    }
    case Kind::ambient: {
      t.check_point(y);
      double h = ambient_hess_(y, V, W);
      if (t.is_sphere()) {
        std::vector<double> raw(y.size());
        ambient_grad_(y, raw);
        h -= vo::dot(raw, y) * vo::dot(V, W);
      }
      return h;
    }
  }
  return 0.0;
}

PotentialSample potential_eval(const Potential& G, const Target& t,
                               std::span<const double> y) {
  PotentialSample s;
  s.value = G.value(t, y);
  s.gradient.resize(y.size());
  G.gradient(t, y, s.gradient);
  std::vector<double> base(y.begin(), y.end());
  s.hessian = [&G, t, base = std::move(base)](std::span<const double> V,
                                              std::span<const double> W) {
    return G.hessian(t, base, V, W);
  };
  return s;
}

}  // namespace subflow
