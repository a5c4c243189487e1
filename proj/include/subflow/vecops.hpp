#ifndef SUBFLOW_VECOPS_HPP
#define SUBFLOW_VECOPS_HPP

#include <cmath>
#include <cstddef>
#include <span>

// Small dense kernels for per-point ambient vectors.

namespace subflow::vo {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline void fill(std::span<double> y, double v) {
  for (auto& e : y) e = v;
}

inline void copy(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i];
}

inline void scale(double c, std::span<double> y) {
  for (auto& e : y) e *= c;
}

// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

}  // namespace subflow::vo

#endif  // SUBFLOW_VECOPS_HPP
