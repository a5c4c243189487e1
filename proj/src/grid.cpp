#include "subflow/grid.hpp"

#include <algorithm>
#include <string>

#include "subflow/errors.hpp"

namespace subflow {

Grid Grid::uniform(const std::array<int, 3>& n, const std::array<double, 3>& period) {
  Grid g;
  g.n = n;
  g.period = period;
  g.npoints = 1;
  for (int k = 0; k < 3; ++k) {
    if (n[k] < 1) throw ValidationError("grid resolution must be positive");
    if (!(period[k] > 0.0)) throw ValidationError("grid period must be positive");
    g.h[k] = period[k] / n[k];
    g.npoints *= n[k];
  }
  return g;
}

double Grid::max_spacing() const { return std::max({h[0], h[1], h[2]}); }

}  // namespace subflow
