#ifndef SUBFLOW_GRID_HPP
#define SUBFLOW_GRID_HPP

#include <array>
#include <span>
#include <vector>

namespace subflow {

inline constexpr double two_pi = 6.28318530717958647692528676655900577;

/// Uniform periodic 3D grid. Point (i,j,k) sits at (i*h0, j*h1, k*h2); the
/// last point in each direction is one spacing short of the period.
struct Grid {
  std::array<int, 3> n{};
  std::array<double, 3> period{};
  std::array<double, 3> h{};
  int npoints = 0;

  static Grid uniform(const std::array<int, 3>& n, const std::array<double, 3>& period);

  int index(int i, int j, int k) const { return (i * n[1] + j) * n[2] + k; }

  std::array<double, 3> coords(int i, int j, int k) const {
    return {i * h[0], j * h[1], k * h[2]};
  }

  double cell_volume() const { return h[0] * h[1] * h[2]; }
  double max_spacing() const;

  bool operator==(const Grid&) const = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0)
      : grid_(grid), data_(static_cast<std::size_t>(grid.npoints), fill) {}

  const Grid& grid() const { return grid_; }
  double operator[](int p) const { return data_[static_cast<std::size_t>(p)]; }
  double& operator[](int p) { return data_[static_cast<std::size_t>(p)]; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return {data_.data(), data_.size()}; }

 private:
  Grid grid_;
  std::vector<double> data_;
};

/// Per-point ambient vectors, stored flat as npoints x dim.
class VectorField {
 public:
  VectorField() = default;
  VectorField(const Grid& grid, int dim, double fill = 0.0)
      : grid_(grid),
        dim_(dim),
        data_(static_cast<std::size_t>(grid.npoints) * dim, fill) {}

  const Grid& grid() const { return grid_; }
  int dim() const { return dim_; }

  std::span<const double> at(int p) const {
    return {data_.data() + static_cast<std::size_t>(p) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> at(int p) {
    return {data_.data() + static_cast<std::size_t>(p) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return {data_.data(), data_.size()}; }

 private:
  Grid grid_;
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace subflow

#endif  // SUBFLOW_GRID_HPP
