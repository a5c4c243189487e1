#ifndef SUBFLOW_SAMPLING_HPP
#define SUBFLOW_SAMPLING_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "subflow/fields.hpp"

namespace subflow {

/// Low-frequency trigonometric polynomial on the periodic box, with
/// coefficients drawn deterministically from a seed. The same seed describes
/// the same continuum function at every grid resolution, which is what the
/// refinement studies rely on.
class TrigPoly {
 public:
  static TrigPoly random(std::uint64_t seed, int dim, int max_freq, double amplitude);

  int dim() const { return dim_; }

  /// Evaluate at box coordinates x with the given periods.
  void eval(const std::array<double, 3>& x, const std::array<double, 3>& periods,
            std::span<double> out) const;

 private:
  struct Mode {
    std::array<int, 3> k;
    std::vector<double> cos_amp;  // per component
    std::vector<double> sin_amp;
  };
  int dim_ = 0;
  std::vector<Mode> modes_;
};

/// Smooth sphere- or flat-valued map: a fixed base point plus a seeded
/// trigonometric perturbation, normalized onto the sphere when needed.
MapField random_smooth_map(ChartPtr chart, const Target& target, std::uint64_t seed,
                           double amplitude = 0.25);

/// Seeded smooth section along f: an ambient trigonometric field projected
/// tangent pointwise.
SectionField random_smooth_section(const MapField& f, std::uint64_t seed,
                                   double amplitude = 0.5);

}  // namespace subflow

#endif  // SUBFLOW_SAMPLING_HPP
