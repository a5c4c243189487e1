#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "subflow/domain.hpp"
#include "subflow/errors.hpp"
#include "subflow/fields.hpp"
#include "subflow/sampling.hpp"
#include "subflow/variational.hpp"
#include "subflow/vecops.hpp"

using namespace subflow;

namespace {

ScalarField smooth_scalar(const Grid& g) {
  ScalarField u(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const auto x = g.coords(i, j, k);
        u[g.index(i, j, k)] =
            std::sin(x[0]) * std::cos(x[1]) + 0.4 * std::cos(x[2] - x[0]);
      }
  return u;
}

// e2 = dy + sin(x) dz on the twisted torus, applied analytically.
double twisted_e2(const std::array<double, 3>& x) {
  return -std::sin(x[0]) * std::sin(x[1]) - 0.4 * std::sin(x[0]) * std::sin(x[2] - x[0]);
}

double derivative_error(int n, FdOrder order) {
  ChartPtr chart = build_chart("twisted-torus", {n, n, n});
  const Grid& g = chart->grid;
  const ScalarField u = smooth_scalar(g);
  const ScalarField du = frame_derivative(*chart, u, 1, order);
  double worst = 0.0;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        worst = std::max(worst,
                         std::fabs(du[g.index(i, j, k)] - twisted_e2(g.coords(i, j, k))));
  return worst;
}

std::filesystem::path temp_file(const char* tag) {
  return std::filesystem::temp_directory_path() /
         (std::string("subflow_test_") + tag + ".field");
}

}  // namespace

TEST_CASE("frame derivatives converge at stencil order") {
  const double e16_2 = derivative_error(16, FdOrder::second);
  const double e32_2 = derivative_error(32, FdOrder::second);
  CHECK(std::log2(e16_2 / e32_2) >= 1.9);

  const double e16_4 = derivative_error(16, FdOrder::fourth);
  const double e32_4 = derivative_error(32, FdOrder::fourth);
  CHECK(std::log2(e16_4 / e32_4) >= 3.8);
  CHECK(e32_4 < e32_2);
}

TEST_CASE("frame derivatives of periodic data integrate to zero") {
  // Central differences telescope over a periodic grid whenever the frame
  // coefficient is constant along the differenced axis; combined with the
  // exact reduction this puts the integral at rounding level.
  ChartPtr chart = build_chart("twisted-torus", {16, 16, 16});
  const ScalarField u = smooth_scalar(chart->grid);
  for (int A = 0; A < 3; ++A) {
    CAPTURE(A);
    for (FdOrder order : {FdOrder::second, FdOrder::fourth}) {
      const ScalarField du = frame_derivative(*chart, u, A, order);
      CHECK(std::fabs(integrate(*chart, du)) <= 1e-14);
    }
  }
}

TEST_CASE("horizontal differential is exactly tangent along the map") {
  ChartPtr chart = build_chart("twisted-torus", {12, 12, 12});
  const Target s2 = Target::unit_sphere(2);
  const MapField f = random_smooth_map(chart, s2, 21);
  const auto dfs = horizontal_differential(f);
  REQUIRE(dfs.size() == 2);
  for (const VectorField& df : dfs) {
    double worst = 0.0;
    for (int p = 0; p < chart->grid.npoints; ++p)
      worst = std::max(worst, std::fabs(vo::dot(df.at(p), f.at(p))));
    CHECK(worst <= 1e-14);
  }
}

TEST_CASE("section algebra") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const Target s2 = Target::unit_sphere(2);
  const MapField f = random_smooth_map(chart, s2, 22);
  const SectionField V = random_smooth_section(f, 23);
  const SectionField W = random_smooth_section(f, 24);

  SUBCASE("combine is pointwise linear") {
    const SectionField sum = section_combine(2.0, V, -0.5, W);
    for (int p = 0; p < chart->grid.npoints; ++p)
      for (int c = 0; c < 3; ++c)
        CHECK(sum.at(p)[c] == 2.0 * V.at(p)[c] - 0.5 * W.at(p)[c]);
  }

  SUBCASE("l2 pairing is symmetric and positive") {
    CHECK(section_l2_inner(*chart, V, W) == section_l2_inner(*chart, W, V));
    CHECK(section_l2_inner(*chart, V, V) > 0.0);
  }

  SUBCASE("tangency validation gates sections") {
    VectorField off(chart->grid, 3);
    for (int p = 0; p < chart->grid.npoints; ++p) vo::copy(f.at(p), off.at(p));
    CHECK_THROWS_AS(make_section(f, std::move(off)), ValidationError);
    CHECK(max_tangency_defect(f, V.values()) <= 1e-14);
  }

  SUBCASE("projection of an ambient field is tangent") {
    VectorField raw(chart->grid, 3, 0.7);
    const SectionField proj = project_section(f, raw);
    CHECK(max_tangency_defect(f, proj.values()) <= 1e-14);
  }

  SUBCASE("covariant derivative outputs tangent sections") {
    for (int A = 0; A < 2; ++A) {
      const SectionField DV = pullback_covariant_derivative(f, V, A);
      CHECK(max_tangency_defect(f, DV.values()) <= 1e-14);
    }
  }
}

TEST_CASE("exp map on fields") {
  ChartPtr chart = build_chart("twisted-torus", {8, 8, 8});
  const Target s2 = Target::unit_sphere(2);
  const MapField f = random_smooth_map(chart, s2, 25);
  const SectionField V = random_smooth_section(f, 26);

  SUBCASE("zero time reproduces the map bitwise") {
    const MapField g = exp_map(f, V, 0.0);
    for (int p = 0; p < chart->grid.npoints; ++p)
      for (int c = 0; c < 3; ++c) CHECK(g.at(p)[c] == f.at(p)[c]);
  }

  SUBCASE("constraint drift stays at rounding level") {
    const MapField g = exp_map(f, V, 0.3);
    for (int p = 0; p < chart->grid.npoints; ++p)
      CHECK(std::fabs(vo::norm(g.at(p)) - 1.0) <= 1e-15);
  }
}

TEST_CASE("field dumps round-trip bitwise") {
  ChartPtr chart = build_chart("weighted-torus", {8, 8, 8});
  const Target s3 = Target::unit_sphere(3);
  const MapField f = random_smooth_map(chart, s3, 27);
  const auto path = temp_file("roundtrip");

  dump_map(path, f);
  const FieldDump dump = load_field_dump(path);
  CHECK(dump.field_kind == "map");
  CHECK(dump.chart_name == "weighted-torus");
  CHECK(dump.target_kind == "unit-sphere");
  CHECK(dump.target_n == 3);
  CHECK(dump.dim == 4);

  const MapField g = map_from_dump(dump);
  CHECK(g.chart().name == f.chart().name);
  for (int p = 0; p < chart->grid.npoints; ++p)
    for (int c = 0; c < 4; ++c) CHECK(g.at(p)[c] == f.at(p)[c]);

  // The atomic writer must not leave its temporary behind.
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("field dump loader rejects malformed input") {
  const auto path = temp_file("malformed");

  SUBCASE("rows before the header") {
    std::ofstream out(path);
    out << "0 0 0 1.0\n";
    out.close();
    CHECK_THROWS_AS(load_field_dump(path), ConfigError);
  }

  SUBCASE("row index out of range") {
    ChartPtr chart = build_chart("abelian-torus", {8, 8, 8});
    const Target s2 = Target::unit_sphere(2);
    dump_map(path, constant_map(chart, s2, std::vector<double>{0.0, 0.0, 1.0}));
    std::ofstream out(path, std::ios::app);
    out << "9 0 0 0.0 0.0 1.0\n";
    out.close();
    CHECK_THROWS_AS(load_field_dump(path), ConfigError);
  }

  SUBCASE("missing rows") {
    ChartPtr chart = build_chart("abelian-torus", {8, 8, 8});
    const Target s2 = Target::unit_sphere(2);
    dump_map(path, constant_map(chart, s2, std::vector<double>{0.0, 0.0, 1.0}));
    // Truncate the final row.
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    in.close();
    all.erase(all.rfind('\n', all.size() - 2) + 1);
    std::ofstream out(path, std::ios::trunc);
    out << all;
    out.close();
    CHECK_THROWS_AS(load_field_dump(path), ConfigError);
  }

  SUBCASE("nonexistent file") {
    CHECK_THROWS_AS(load_field_dump("/nonexistent/subflow.field"), ConfigError);
  }

  std::filesystem::remove(path);
}

TEST_CASE("grid shifts leave the discrete energy exactly invariant") {
  // Frame coefficients on the twisted torus depend on x only, so shifting the
  // sampled map in y or z permutes every per-point summand. The exactly
  // rounded reduction then returns the identical double.
  ChartPtr chart = build_chart("twisted-torus", {12, 12, 12});
  const Grid& g = chart->grid;
  const Target s2 = Target::unit_sphere(2);
  const MapField f = random_smooth_map(chart, s2, 28);
  const Potential G = Potential::height();

  const double base = total_energy(f, G);

  for (const auto [dj, dk] : {std::pair{1, 0}, {0, 1}, {5, 9}}) {
    VectorField shifted(g, 3);
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        for (int k = 0; k < g.n[2]; ++k) {
          const int src = g.index(i, (j + dj) % g.n[1], (k + dk) % g.n[2]);
          vo::copy(f.at(src), shifted.at(g.index(i, j, k)));
        }
    const MapField fs(chart, s2, std::move(shifted));
    CHECK(total_energy(fs, G) == base);
  }

  SUBCASE("abelian chart is invariant in every direction") {
    ChartPtr flat = build_chart("abelian-torus", {12, 12, 12});
    const MapField h = random_smooth_map(flat, s2, 29);
    const double e0 = total_energy(h, G);
    VectorField shifted(flat->grid, 3);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        for (int k = 0; k < 12; ++k)
          vo::copy(h.at(flat->grid.index((i + 7) % 12, j, (k + 3) % 12)),
                   shifted.at(flat->grid.index(i, j, k)));
    const MapField hs(flat, s2, std::move(shifted));
    CHECK(total_energy(hs, G) == e0);
  }
}

TEST_CASE("map construction validates the sphere constraint") {
  ChartPtr chart = build_chart("abelian-torus", {8, 8, 8});
  const Target s2 = Target::unit_sphere(2);
  VectorField bad(chart->grid, 3);
  for (int p = 0; p < chart->grid.npoints; ++p) bad.at(p)[0] = 1.0 + 1e-6;
  CHECK_THROWS_AS(MapField(chart, s2, std::move(bad)), ValidationError);
}
