#ifndef SUBFLOW_NUMERICS_HPP
#define SUBFLOW_NUMERICS_HPP

#include <span>
#include <vector>

namespace subflow {

/// Streaming exactly-rounded accumulator (Shewchuk partials). The final value
/// is the correctly rounded sum of everything added, so it does not depend on
/// the order in which terms arrive. Grid reductions built on this stay
/// bit-identical under index relabeling and thread-count changes.
class ExactAccumulator {
 public:
  void add(double x);
  double result() const;

 private:
  std::vector<double> partials_;
  double special_ = 0.0;  // carries inf/nan through
  bool has_special_ = false;
};

double exact_sum(std::span<const double> xs);

double det3(const double* a);  // row-major 3x3

/// Smallest eigenvalue of a small dense symmetric matrix (cyclic Jacobi).
/// `a` is row-major n x n and is destroyed.
double symmetric_min_eigenvalue(std::vector<double> a, int n);

}  // namespace subflow

#endif  // SUBFLOW_NUMERICS_HPP
