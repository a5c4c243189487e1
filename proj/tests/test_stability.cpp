#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "subflow/domain.hpp"
#include "subflow/errors.hpp"
#include "subflow/fields.hpp"
#include "subflow/flow.hpp"
#include "subflow/sampling.hpp"
#include "subflow/stability.hpp"
#include "subflow/variational.hpp"

using namespace subflow;

namespace {

MapField great_circle(ChartPtr chart, int ambient) {
  const Grid& g = chart->grid;
  VectorField vals(g, ambient);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        auto y = vals.at(g.index(i, j, k));
        const double x = g.coords(i, j, k)[0];
        y[0] = std::cos(x);
        y[1] = std::sin(x);
      }
  return MapField(chart, Target::unit_sphere(ambient - 1), std::move(vals));
}

double fourth_order_factor(double h) {
  return (8.0 * std::sin(h) - std::sin(2.0 * h)) / (6.0 * h);
}

double closed_vs_numeric_gap(int n) {
  ChartPtr chart = build_chart("twisted-torus", {n, n, n});
  const MapField f = random_smooth_map(chart, Target::unit_sphere(2), 9);
  std::vector<double> axis{0.6, 0.0, 0.8};
  const ConformalField v = conformal_field(f, axis);
  const auto dfs = horizontal_differential(f);
  const auto closed = conformal_derivatives(f, v, dfs);

  double worst = 0.0;
  for (int i = 0; i < chart->m; ++i) {
    const SectionField numeric = pullback_covariant_derivative(f, v.section, i);
    for (int p = 0; p < chart->grid.npoints; ++p) {
      const auto a = numeric.values().at(p);
      const auto b = closed[static_cast<std::size_t>(i)].at(p);
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(a[c] - b[c]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("conformal fields satisfy the pointwise sphere algebra") {
  ChartPtr chart = build_chart("weighted-torus", {8, 8, 8});
  const MapField f = random_smooth_map(chart, Target::unit_sphere(2), 9);

  std::vector<ConformalField> axes;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> axis(3, 0.0);
    axis[static_cast<std::size_t>(s)] = 1.0;
    axes.push_back(conformal_field(f, axis));
  }

  const std::vector<double> probe{0.3, -1.1, 0.7};
  for (int p = 0; p < chart->grid.npoints; ++p) {
    const auto y = f.at(p);
    double phi_sq = 0.0, v_sq = 0.0, x_sq = 0.0;

    // X: tangential part of a fixed ambient vector.
    double xdot = 0.0;
    for (int c = 0; c < 3; ++c) xdot += probe[static_cast<std::size_t>(c)] * y[c];
    std::vector<double> x(3);
    for (int c = 0; c < 3; ++c) x[static_cast<std::size_t>(c)] =
        probe[static_cast<std::size_t>(c)] - xdot * y[c];

    double x_norm = 0.0;
    for (double c : x) x_norm += c * c;

    for (const ConformalField& cf : axes) {
      phi_sq += cf.height[p] * cf.height[p];
      const auto v = cf.section.values().at(p);
      double xv = 0.0;
      for (int c = 0; c < 3; ++c) {
        v_sq += v[c] * v[c];
        xv += x[static_cast<std::size_t>(c)] * v[c];
      }
      x_sq += xv * xv;
    }

    CHECK(std::fabs(phi_sq - 1.0) <= 1e-12);
    CHECK(std::fabs(v_sq - 2.0) <= 1e-12);
    CHECK(std::fabs(x_sq - x_norm) <= 1e-12);
  }
}

TEST_CASE("conformal construction validates its inputs") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const std::vector<double> a3{1.0, 0.0, 0.0};
  const std::vector<double> a2{1.0, 0.0};

  const MapField flat = initial_map("constant", chart, Target::flat_space(3), 0);
  CHECK_THROWS_AS(conformal_field(flat, a3), UnsupportedTargetError);
  CHECK_THROWS_AS(sphere_index_identity(flat, Potential::constant(0.0), a3),
                  UnsupportedTargetError);
  CHECK_THROWS_AS(leung_sum(flat, Potential::constant(0.0)), UnsupportedTargetError);

  const MapField f = initial_map("constant", chart, Target::unit_sphere(2), 0);
  CHECK_THROWS_AS(conformal_field(f, a2), ValidationError);
}

TEST_CASE("closed-form conformal derivatives match the numeric route") {
  const double gap8 = closed_vs_numeric_gap(8);
  const double gap16 = closed_vs_numeric_gap(16);
  REQUIRE(gap8 > 1e-10);
  CHECK(std::log2(gap8 / gap16) >= 3.5);
}

TEST_CASE("index identity and dimension reduction hold to rounding") {
  ChartPtr chart = build_chart("twisted-torus", {16, 16, 16});
  const MapField f = random_smooth_map(chart, Target::unit_sphere(2), 10);

  for (const Potential& G : {Potential::height(), Potential::constant(0.25)}) {
    for (int s = 0; s < 3; ++s) {
      std::vector<double> axis(3, 0.0);
      axis[static_cast<std::size_t>(s)] = 1.0;
      const IdentityReport rep = sphere_index_identity(f, G, axis);
      CHECK(rep.diff <= 1e-10 * rep.scale);
    }

    const LeungReport rep = leung_sum(f, G);
    CHECK(rep.per_direction.size() == 3);
    CHECK(rep.horizontal_energy > 0.0);
    CHECK(rep.diff <= 1e-10 * rep.scale);

    double direct = 0.0;
    for (double v : rep.per_direction) direct += v;
    CHECK(std::fabs(direct - rep.sum_direct) <= 1e-12 * rep.scale);
  }
}

TEST_CASE("vertical axes certify the great circle as unstable") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const MapField f = great_circle(chart, 4);
  const Potential none = Potential::constant(0.0);
  const double vol = two_pi * two_pi * two_pi;
  const double s = fourth_order_factor(chart->grid.h[0]);

  const double margin = default_certification_margin(f, none);
  const double energy = total_energy(f, none);
  CHECK(std::fabs(margin - 1e-6 * (1.0 + std::fabs(energy))) <= 1e-18);

  const StabilityVerdict cert = instability_certificate(f, none, margin);
  CHECK(cert.verdict == Verdict::unstable_certified);
  CHECK(cert.witness_label == "conformal-axis-2");
  CHECK(cert.probes == 4);
  CHECK(cert.tension_sup <= 1e-12);
  CHECK(!cert.lambda_min.has_value());
  CHECK(std::fabs(cert.min_index + s * s * vol) <= 1e-10 * vol);
  REQUIRE(cert.witness.has_value());

  // The certified direction is a genuinely negative direction for the
  // numeric-route quadratic form as well.
  CHECK(index_form(f, *cert.witness, none) < -0.9 * s * s * vol);
}

TEST_CASE("the certificate refuses maps that are far from critical") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const MapField f = random_smooth_map(chart, Target::unit_sphere(2), 12);
  CHECK_THROWS_AS(instability_certificate(f, Potential::height(), 1e-6),
                  PreconditionError);
}

TEST_CASE("probes find the unstable direction and stay deterministic") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const MapField f = great_circle(chart, 4);
  const Potential none = Potential::constant(0.0);
  const double s = fourth_order_factor(chart->grid.h[0]);

  const StabilityVerdict a = stability_probe(f, none, 8, 1);
  CHECK(a.verdict == Verdict::unstable_certified);
  CHECK(a.witness_label == "probe-2");
  CHECK(a.probes == 8);
  // Probes are L2-normalized, so the vertical axis scores -s^2.
  CHECK(std::fabs(a.min_index + s * s) <= 1e-10);

  const StabilityVerdict b = stability_probe(f, none, 8, 1);
  CHECK(b.min_index == a.min_index);
  CHECK(b.witness_label == a.witness_label);

  const StabilityVerdict wider = stability_probe(f, none, 16, 1);
  CHECK(wider.min_index <= a.min_index);

  CHECK(stability_probe(f, none, 0, 1).verdict == Verdict::inconclusive);
  CHECK_THROWS_AS(stability_probe(f, none, -1, 1), ValidationError);
}

TEST_CASE("a stable minimum is probed as stable") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const std::vector<double> south{0.0, 0.0, -1.0};
  const MapField f = constant_map(chart, Target::unit_sphere(2), south);

  const StabilityVerdict probe = stability_probe(f, Potential::height(), 12, 3);
  CHECK(probe.verdict == Verdict::stable_probed);
  CHECK(probe.min_index == 0.0);  // the degenerate south-pole axis
  CHECK(!probe.witness.has_value());

  const StabilityVerdict cert =
      instability_certificate(f, Potential::height(),
                              default_certification_margin(f, Potential::height()));
  CHECK(cert.verdict == Verdict::stable_probed);
  CHECK(cert.min_index >= 0.0);
}

TEST_CASE("flat targets without the minimizer are inconclusive") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const std::vector<double> origin{0.0, 0.0, 0.0};
  const MapField f = constant_map(chart, Target::flat_space(3), origin);
  const Potential concave = Potential::ambient_quadratic(-1.0);

  const StabilityVerdict cert = instability_certificate(f, concave, 1e-6);
  CHECK(cert.verdict == Verdict::inconclusive);
  CHECK(cert.probes == 0);
}

TEST_CASE("rayleigh descent reaches the exact concave-potential floor") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const MapField f = random_smooth_map(chart, Target::flat_space(3), 4);
  const Potential concave = Potential::ambient_quadratic(-1.0);

  // I(V) = dirichlet + 2 |V|^2, so the Rayleigh quotient floor is exactly 2,
  // attained on constant sections.
  const RayleighResult ray = rayleigh_minimize(f, concave, 60, 7);
  CHECK(std::fabs(ray.lambda_min - 2.0) <= 1e-9);
  CHECK(ray.restarts == 0);
  REQUIRE(!ray.history.empty());
  for (std::size_t i = 1; i < ray.history.size(); ++i)
    CHECK(ray.history[i] <= ray.history[i - 1]);

  REQUIRE(ray.argmin.has_value());
  const double quotient = index_form(f, *ray.argmin, concave) /
                          section_l2_inner(*chart, *ray.argmin, *ray.argmin);
  CHECK(std::fabs(quotient - ray.lambda_min) <= 1e-9);

  const StabilityVerdict cert = instability_certificate(
      f, concave, 1e-6, {.tension_threshold = 1e9, .rayleigh_iters = 60, .seed = 7});
  CHECK(cert.verdict == Verdict::stable_probed);
  REQUIRE(cert.lambda_min.has_value());
  CHECK(*cert.lambda_min == ray.lambda_min);
}

TEST_CASE("hessian floor scans reproduce closed forms") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});

  const MapField flat = initial_map("random-smooth", chart, Target::flat_space(3), 6);
  CHECK(hessian_min_eigen(flat, Potential::ambient_quadratic(-1.0)) ==
        doctest::Approx(-2.0).epsilon(1e-12));

  const MapField north = initial_map("constant", chart, Target::unit_sphere(2), 0);
  CHECK(hessian_min_eigen(north, Potential::height()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hessian_min_eigen(north, Potential::constant(3.0)) == 0.0);
}
