#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "subflow/domain.hpp"
#include "subflow/errors.hpp"
#include "subflow/fields.hpp"

using namespace subflow;

namespace {

// Smooth periodic scalar with energy in a few low modes; no symmetry that
// could hide a wrong structure constant.
ScalarField probe_scalar(const Grid& g) {
  ScalarField u(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const auto x = g.coords(i, j, k);
        u[g.index(i, j, k)] = std::sin(x[0]) * std::cos(x[1]) + 0.5 * std::cos(x[0] + x[2]) +
                              0.3 * std::sin(x[1] + 2.0 * x[2]);
      }
  return u;
}

// Sup-norm defect of the discrete commutator [e_A, e_B]u against the
// structure-function expansion sum_C c^C_AB e_C u.
double commutator_defect(const DomainChart& chart, int A, int B) {
  const Grid& g = chart.grid;
  const ScalarField u = probe_scalar(g);
  const int nf = chart.m + chart.d;

  const ScalarField bu = frame_derivative(chart, u, B);
  const ScalarField au = frame_derivative(chart, u, A);
  const ScalarField abu = frame_derivative(chart, bu, A);
  const ScalarField bau = frame_derivative(chart, au, B);

  std::vector<ScalarField> cu;
  for (int C = 0; C < nf; ++C) cu.push_back(frame_derivative(chart, u, C));

  double worst = 0.0;
  for (int p = 0; p < g.npoints; ++p) {
    double rhs = 0.0;
    for (int C = 0; C < nf; ++C) rhs += chart.structure_coef(p, A, B, C) * cu[C][p];
    worst = std::max(worst, std::fabs((abu[p] - bau[p]) - rhs));
  }
  return worst;
}

}  // namespace

TEST_CASE("structure functions reproduce the discrete frame commutators") {
  for (const char* name : {"twisted-torus", "weighted-torus", "abelian-torus"}) {
    CAPTURE(name);
    ChartPtr coarse = build_chart(name, {16, 16, 16});
    ChartPtr fine = build_chart(name, {32, 32, 32});
    for (int A = 0; A < 3; ++A)
      for (int B = A + 1; B < 3; ++B) {
        CAPTURE(A);
        CAPTURE(B);
        const double dc = commutator_defect(*coarse, A, B);
        const double df = commutator_defect(*fine, A, B);
        if (dc < 1e-12) {
          // Constant-coefficient bracket: the stencils commute exactly.
          CHECK(df < 1e-12);
        } else {
          const double order = std::log2(dc / df);
          CHECK(order >= 3.5);
        }
      }
  }
}

TEST_CASE("twisted torus carries the pinned frame data") {
  ChartPtr chart = build_chart("twisted-torus", {16, 16, 16});
  CHECK(chart->m == 2);
  CHECK(chart->d == 1);
  const Grid& g = chart->grid;

  for (int i = 0; i < g.n[0]; i += 3)
    for (int j = 0; j < g.n[1]; j += 5)
      for (int k = 0; k < g.n[2]; k += 7) {
        const int p = g.index(i, j, k);
        const double x = g.coords(i, j, k)[0];
        const double c = std::cos(x);

        // e1 = dx, e2 = dy + sin(x) dz, e3 = dz
        CHECK(chart->frame_coef(p, 0, 0) == 1.0);
        CHECK(chart->frame_coef(p, 1, 1) == 1.0);
        CHECK(chart->frame_coef(p, 1, 2) == doctest::Approx(std::sin(x)).epsilon(1e-15));
        CHECK(chart->frame_coef(p, 2, 2) == 1.0);

        // [e1, e2] = cos(x) e3 is the only bracket.
        CHECK(chart->structure_coef(p, 0, 1, 2) == doctest::Approx(c).epsilon(1e-15));
        CHECK(chart->structure_coef(p, 1, 0, 2) == doctest::Approx(-c).epsilon(1e-15));
        CHECK(chart->structure_coef(p, 0, 1, 0) == 0.0);
        CHECK(chart->structure_coef(p, 1, 2, 0) == 0.0);

        // Koszul coefficients of the bracket: the cos(x)/2 triple.
        CHECK(chart->connection_coef(p, 0, 1, 2) == doctest::Approx(0.5 * c).epsilon(1e-14));
        CHECK(chart->connection_coef(p, 0, 2, 1) == doctest::Approx(-0.5 * c).epsilon(1e-14));
        CHECK(chart->connection_coef(p, 1, 0, 2) == doctest::Approx(-0.5 * c).epsilon(1e-14));
        CHECK(chart->connection_coef(p, 1, 1, 1) == 0.0);
        CHECK(chart->connection_coef(p, 2, 2, 0) == 0.0);

        // Flat volume density and no vertical mean curvature.
        CHECK(chart->vol[p] == 1.0);
        for (int A = 0; A < 3; ++A) CHECK(chart->vert_mean_curvature_coef(p, A) == 0.0);
      }
}

TEST_CASE("weighted torus carries the pinned frame data") {
  ChartPtr chart = build_chart("weighted-torus", {16, 16, 16});
  const Grid& g = chart->grid;

  for (int i = 0; i < g.n[0]; i += 3)
    for (int j = 0; j < g.n[1]; j += 5)
      for (int k = 0; k < g.n[2]; k += 7) {
        const int p = g.index(i, j, k);
        const double x = g.coords(i, j, k)[0];
        const double w = 1.0 + 0.5 * std::sin(x);
        const double wp = 0.5 * std::cos(x);

        CHECK(chart->frame_coef(p, 2, 2) == doctest::Approx(w).epsilon(1e-15));

        // [e1, e3] = (w'/w) e3 and [e1, e2] = (cos x / w) e3.
        CHECK(chart->structure_coef(p, 0, 2, 2) == doctest::Approx(wp / w).epsilon(1e-14));
        CHECK(chart->structure_coef(p, 0, 1, 2) ==
              doctest::Approx(std::cos(x) / w).epsilon(1e-14));

        // The vertical direction bends into e1: <grad_{e3} e3, e1> = w'/w.
        CHECK(chart->connection_coef(p, 2, 2, 0) == doctest::Approx(wp / w).epsilon(1e-14));

        // zeta = (w'/w) e1, expressed in frame components.
        CHECK(chart->vert_mean_curvature_coef(p, 0) ==
              doctest::Approx(wp / w).epsilon(1e-14));
        CHECK(chart->vert_mean_curvature_coef(p, 1) == 0.0);
        CHECK(chart->vert_mean_curvature_coef(p, 2) == 0.0);

        CHECK(chart->vol[p] == doctest::Approx(1.0 / w).epsilon(1e-14));
      }
}

TEST_CASE("abelian torus is completely flat") {
  ChartPtr chart = build_chart("abelian-torus", {8, 8, 8});
  const ChartInvariantReport inv = chart_invariants(*chart);
  CHECK(inv.max_metric_compat == 0.0);
  CHECK(inv.max_torsion_defect == 0.0);
  CHECK(inv.min_frame_det == 1.0);
  for (int p = 0; p < chart->grid.npoints; ++p) {
    CHECK(chart->vol[p] == 1.0);
    for (int A = 0; A < 3; ++A)
      for (int B = 0; B < 3; ++B)
        for (int C = 0; C < 3; ++C) {
          CHECK(chart->structure_coef(p, A, B, C) == 0.0);
          CHECK(chart->connection_coef(p, A, B, C) == 0.0);
        }
  }
}

TEST_CASE("connection invariants hold on every built-in chart") {
  for (const char* name : {"twisted-torus", "weighted-torus", "abelian-torus"}) {
    CAPTURE(name);
    ChartPtr chart = build_chart(name, {12, 12, 12});
    const ChartInvariantReport inv = chart_invariants(*chart);
    CHECK(inv.max_metric_compat <= 1e-14);
    CHECK(inv.max_torsion_defect <= 1e-14);
    CHECK(inv.min_frame_det > 0.0);
  }
}

TEST_CASE("integration oracles") {
  SUBCASE("unit density on the twisted torus gives the box volume") {
    ChartPtr chart = build_chart("twisted-torus", {16, 16, 16});
    ScalarField one(chart->grid, 1.0);
    const double box = two_pi * two_pi * two_pi;
    CHECK(integrate(*chart, one) == doctest::Approx(box).epsilon(1e-14));
  }

  SUBCASE("weighted torus total volume matches the closed form") {
    // integral of dx/(1 + sin(x)/2) over a period is 2pi / sqrt(3/4).
    const double expected = two_pi * two_pi * (two_pi / std::sqrt(0.75));
    // The trapezoid rule converges spectrally for this analytic density:
    // roughly exp(-1.3 n), so 32 points already reach rounding level.
    ChartPtr coarse = build_chart("weighted-torus", {16, 16, 16});
    ScalarField one16(coarse->grid, 1.0);
    CHECK(integrate(*coarse, one16) == doctest::Approx(expected).epsilon(1e-8));
    ChartPtr fine = build_chart("weighted-torus", {32, 32, 32});
    ScalarField one32(fine->grid, 1.0);
    CHECK(integrate(*fine, one32) == doctest::Approx(expected).epsilon(1e-13));
  }

  SUBCASE("pure Fourier modes below Nyquist integrate to zero") {
    ChartPtr chart = build_chart("abelian-torus", {16, 16, 16});
    const Grid& g = chart->grid;
    for (int mode : {1, 2, 5, 7}) {
      ScalarField u(g);
      for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
          for (int k = 0; k < g.n[2]; ++k)
            u[g.index(i, j, k)] = std::cos(mode * g.coords(i, j, k)[0]);
      CHECK(std::fabs(integrate(*chart, u)) <= 1e-13);
    }
  }

  SUBCASE("summation is order-independent") {
    ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
    const Grid& g = chart->grid;
    ScalarField u(g);
    for (int p = 0; p < g.npoints; ++p)
      u[p] = std::sin(0.37 * p) * std::pow(10.0, (p % 13) - 6);
    const double forward = integrate(*chart, u);

    // Reversing the data must reproduce the exact same rounded sum.
    ScalarField rev(g);
    for (int p = 0; p < g.npoints; ++p) rev[p] = u[g.npoints - 1 - p];
    // vol is constant 1 on this chart, so reversal only permutes the terms.
    CHECK(integrate(*chart, rev) == forward);
  }
}

TEST_CASE("chart construction rejects bad input") {
  CHECK_THROWS_AS(build_chart("moebius", {16, 16, 16}), ConfigError);
  CHECK_THROWS_AS(build_chart("twisted-torus", {6, 16, 16}), ValidationError);
  CHECK_THROWS_AS(build_chart("twisted-torus", {16, 15, 16}), ValidationError);
  CHECK_THROWS_AS(build_chart("twisted-torus", {16, 16, 16}, {0.0, two_pi, two_pi}),
                  ValidationError);
}
