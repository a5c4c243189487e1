#include "subflow/domain.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>

#include "subflow/errors.hpp"
#include "subflow/numerics.hpp"
#include "subflow/parallel.hpp"

namespace subflow {

namespace {

// Analytic description of a built-in chart at one coordinate point.
struct FramePoint {
  // e[A][k]: coefficient of d/dx_k in e_A
  std::array<std::array<double, 3>, 3> e{};
  // c[A][B][C]: coefficient of e_C in [e_A, e_B]
  std::array<std::array<std::array<double, 3>, 3>, 3> c{};
};

using FrameFn = std::function<FramePoint(const std::array<double, 3>&)>;

FramePoint twisted_point(const std::array<double, 3>& x) {
  FramePoint f;
  f.e[0] = {1.0, 0.0, 0.0};
  f.e[1] = {0.0, 1.0, std::sin(x[0])};
  f.e[2] = {0.0, 0.0, 1.0};
  const double cx = std::cos(x[0]);
  f.c[0][1][2] = cx;  // [e1,e2] = cos(x) e3
  f.c[1][0][2] = -cx;
  return f;
}

FramePoint weighted_point(const std::array<double, 3>& x) {
  FramePoint f;
  const double w = 1.0 + 0.5 * std::sin(x[0]);
  const double dw = 0.5 * std::cos(x[0]);
  f.e[0] = {1.0, 0.0, 0.0};
  f.e[1] = {0.0, 1.0, std::sin(x[0])};
  f.e[2] = {0.0, 0.0, w};
  f.c[0][1][2] = std::cos(x[0]) / w;  // [e1,e2] = cos(x) d/dz
  f.c[1][0][2] = -f.c[0][1][2];
  f.c[0][2][2] = dw / w;  // [e1,e3] = w' d/dz
  f.c[2][0][2] = -f.c[0][2][2];
  return f;
}

FramePoint abelian_point(const std::array<double, 3>&) {
  FramePoint f;
  f.e[0] = {1.0, 0.0, 0.0};
  f.e[1] = {0.0, 1.0, 0.0};
  f.e[2] = {0.0, 0.0, 1.0};
  return f;
}

}  // namespace

std::vector<double> koszul_connection(const Grid& grid, int nframe,
                                      const std::vector<double>& structure) {
  const int nf = nframe;
  const auto expected =
      static_cast<std::size_t>(grid.npoints) * nf * nf * nf;
  if (structure.size() != expected)
    throw ValidationError("structure tensor has wrong shape for this grid");

  auto idx = [nf](int p, int A, int B, int C) {
    return ((static_cast<std::size_t>(p) * nf + A) * nf + B) * nf + C;
  };

  for (int p = 0; p < grid.npoints; ++p)
    for (int A = 0; A < nf; ++A)
      for (int B = 0; B < nf; ++B)
        for (int C = 0; C < nf; ++C) {
          double defect = structure[idx(p, A, B, C)] + structure[idx(p, B, A, C)];
          if (std::fabs(defect) > 1e-12)
            throw ValidationError(
                "structure functions must be antisymmetric in the first two labels");
        }

  std::vector<double> conn(expected);
  parallel_for(grid.npoints, [&](int begin, int end) {
    for (int p = begin; p < end; ++p)
      for (int A = 0; A < nf; ++A)
        for (int B = 0; B < nf; ++B)
          for (int C = 0; C < nf; ++C) {
            conn[idx(p, A, B, C)] = 0.5 * (structure[idx(p, A, B, C)] -
                                           structure[idx(p, B, C, A)] +
                                           structure[idx(p, C, A, B)]);
          }
  });
  return conn;
}

ChartPtr build_chart(std::string_view name, const std::array<int, 3>& resolution,
                     const std::array<double, 3>& periods) {
  for (int k = 0; k < 3; ++k) {
    if (resolution[k] < 8 || resolution[k] % 2 != 0)
      throw ValidationError("chart resolution must be even and at least 8 per axis");
  }

  FrameFn fn;
  int m = 2, d = 1;
  if (name == "twisted-torus") {
    fn = twisted_point;
  } else if (name == "weighted-torus") {
    fn = weighted_point;
  } else if (name == "abelian-torus") {
    fn = abelian_point;
  } else {
    throw ConfigError("unknown chart name: " + std::string(name));
  }

  auto chart = std::make_shared<DomainChart>();
  chart->name = std::string(name);
  chart->grid = Grid::uniform(resolution, periods);
  chart->m = m;
  chart->d = d;
  const Grid& g = chart->grid;
  const int nf = chart->nf();

  chart->frame.assign(static_cast<std::size_t>(g.npoints) * nf * 3, 0.0);
  chart->structure.assign(static_cast<std::size_t>(g.npoints) * nf * nf * nf, 0.0);
  chart->vol = ScalarField(g);

  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const int p = g.index(i, j, k);
        const FramePoint fp = fn(g.coords(i, j, k));
        double mat[9];
        for (int A = 0; A < nf; ++A)
          for (int ax = 0; ax < 3; ++ax) {
            chart->frame[(static_cast<std::size_t>(p) * nf + A) * 3 + ax] = fp.e[A][ax];
            mat[A * 3 + ax] = fp.e[A][ax];
          }
        for (int A = 0; A < nf; ++A)
          for (int B = 0; B < nf; ++B)
            for (int C = 0; C < nf; ++C)
              chart->structure[chart->tensor_index(p, A, B, C)] = fp.c[A][B][C];
        const double det = det3(mat);
        if (std::fabs(det) < 1e-14)
          throw NumericalError("frame is singular at a grid point");
        chart->vol[p] = 1.0 / std::fabs(det);
      }

  chart->connection = koszul_connection(g, nf, chart->structure);

  // Horizontal mean curvature of the vertical distribution:
  // component A (< m) is sum over vertical alpha of <nabla_{e_alpha} e_alpha, e_A>.
  chart->vert_mean_curvature.assign(static_cast<std::size_t>(g.npoints) * nf, 0.0);
  for (int p = 0; p < g.npoints; ++p)
    for (int A = 0; A < m; ++A) {
      double s = 0.0;
      for (int alpha = m; alpha < nf; ++alpha)
        s += chart->connection_coef(p, alpha, alpha, A);
      chart->vert_mean_curvature[static_cast<std::size_t>(p) * nf + A] = s;
    }

  for (int A = 0; A < nf; ++A)
    for (int ax = 0; ax < 3; ++ax) {
      bool used = false;
      for (int p = 0; p < g.npoints && !used; ++p)
        used = chart->frame_coef(p, A, ax) != 0.0;
      chart->frame_axis_used[static_cast<std::size_t>(A)][static_cast<std::size_t>(ax)] = used;
    }

  return chart;
}

double integrate(const DomainChart& chart, const ScalarField& u) {
  if (!(u.grid() == chart.grid))
    throw ValidationError("integrand does not match the chart grid");
  const double cell = chart.grid.cell_volume();
  ExactAccumulator acc;
  for (int p = 0; p < chart.grid.npoints; ++p) acc.add(u[p] * chart.vol[p] * cell);
  return acc.result();
}

ChartInvariantReport chart_invariants(const DomainChart& chart) {
  ChartInvariantReport rep;
  rep.min_frame_det = 1e300;
  const int nf = chart.nf();
  for (int p = 0; p < chart.grid.npoints; ++p) {
    double mat[9];
    for (int A = 0; A < nf; ++A)
      for (int ax = 0; ax < 3; ++ax) mat[A * 3 + ax] = chart.frame_coef(p, A, ax);
    rep.min_frame_det = std::min(rep.min_frame_det, std::fabs(det3(mat)));
    for (int A = 0; A < nf; ++A)
      for (int B = 0; B < nf; ++B)
        for (int C = 0; C < nf; ++C) {
          rep.max_metric_compat =
              std::max(rep.max_metric_compat,
                       std::fabs(chart.connection_coef(p, A, B, C) +
                                 chart.connection_coef(p, A, C, B)));
          rep.max_torsion_defect =
              std::max(rep.max_torsion_defect,
                       std::fabs(chart.connection_coef(p, A, B, C) -
                                 chart.connection_coef(p, B, A, C) -
                                 chart.structure_coef(p, A, B, C)));
        }
  }
  return rep;
}

}  // namespace subflow
