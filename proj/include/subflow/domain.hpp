#ifndef SUBFLOW_DOMAIN_HPP
#define SUBFLOW_DOMAIN_HPP

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "subflow/grid.hpp"

namespace subflow {

/// Discretized compact sub-Riemannian domain: a periodic grid carrying an
/// adapted orthonormal frame (the first `m` vectors span the horizontal
/// distribution), the frame's structure functions and Levi-Civita
/// coefficients, the horizontal mean-curvature vector of the vertical
/// distribution, and the coordinate density of the volume element.
///
/// Index convention: frame labels A,B,C run over 0..m+d-1; labels < m are
/// horizontal. Tensor storage is (point, A, B, C) with C fastest.
struct DomainChart {
  std::string name;
  Grid grid;
  int m = 0;  // horizontal rank
  int d = 0;  // vertical rank

  std::vector<double> frame;       // npoints*nf*3, e_A = frame(p,A,k) d/dx_k
  std::vector<double> structure;   // npoints*nf^3, [e_A,e_B] = structure(p,A,B,C) e_C
  std::vector<double> connection;  // npoints*nf^3, <nabla_{e_A} e_B, e_C>
  std::vector<double> vert_mean_curvature;  // npoints*nf frame components, vertical entries zero
  ScalarField vol;

  // Which coordinate axes each frame vector actually touches; lets the
  // stencil code skip identically-zero directional pieces.
  std::array<std::array<bool, 3>, 8> frame_axis_used{};

  int nf() const { return m + d; }

  std::size_t tensor_index(int p, int A, int B, int C) const {
    return ((static_cast<std::size_t>(p) * nf() + A) * nf() + B) * nf() + C;
  }

  double frame_coef(int p, int A, int k) const {
    return frame[(static_cast<std::size_t>(p) * nf() + A) * 3 + k];
  }
  double structure_coef(int p, int A, int B, int C) const {
    return structure[tensor_index(p, A, B, C)];
  }
  double connection_coef(int p, int A, int B, int C) const {
    return connection[tensor_index(p, A, B, C)];
  }
  double vert_mean_curvature_coef(int p, int A) const {
    return vert_mean_curvature[static_cast<std::size_t>(p) * nf() + A];
  }
};

using ChartPtr = std::shared_ptr<const DomainChart>;

/// Built-in charts: "twisted-torus", "weighted-torus", "abelian-torus".
/// Resolution must be >= 8 and even in every direction.
ChartPtr build_chart(std::string_view name, const std::array<int, 3>& resolution,
                     const std::array<double, 3>& periods = {two_pi, two_pi, two_pi});

/// Levi-Civita coefficients of an orthonormal frame from its structure
/// functions: 2<nabla_{e_A} e_B, e_C> = c(A,B,C) - c(B,C,A) + c(C,A,B).
/// Throws if the input is not antisymmetric in its first two labels.
std::vector<double> koszul_connection(const Grid& grid, int nframe,
                                      const std::vector<double>& structure);

/// Riemann sum of u against the chart's volume element.
/// The reduction is exactly rounded, so the value is independent of
/// traversal order.
double integrate(const DomainChart& chart, const ScalarField& u);

struct ChartInvariantReport {
  double max_metric_compat = 0.0;   // |conn(A,B,C) + conn(A,C,B)|
  double max_torsion_defect = 0.0;  // |conn(A,B,C) - conn(B,A,C) - struct(A,B,C)|
  double min_frame_det = 0.0;
};

ChartInvariantReport chart_invariants(const DomainChart& chart);

}  // namespace subflow

#endif  // SUBFLOW_DOMAIN_HPP
