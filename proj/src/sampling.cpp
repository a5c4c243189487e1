#include "subflow/sampling.hpp"

#include <cmath>

#include "subflow/errors.hpp"
#include "subflow/rng.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

TrigPoly TrigPoly::random(std::uint64_t seed, int dim, int max_freq, double amplitude) {
  if (dim < 1 || max_freq < 0) throw ValidationError("bad trig polynomial shape");
  Rng rng(seed);
  TrigPoly poly;
  poly.dim_ = dim;
  // Modes over a fixed low-frequency set; amplitudes decay with |k| so the
  // perturbation stays smooth and its sup stays near `amplitude`.
  int count = 0;
  for (int kx = 0; kx <= max_freq; ++kx)
    for (int ky = -max_freq; ky <= max_freq; ++ky)
      for (int kz = -max_freq; kz <= max_freq; ++kz) {
        if (kx == 0 && (ky < 0 || (ky == 0 && kz < 0))) continue;  // one per +/- pair
        ++count;
      }
  const double per_mode = amplitude / count;
  for (int kx = 0; kx <= max_freq; ++kx)
    for (int ky = -max_freq; ky <= max_freq; ++ky)
      for (int kz = -max_freq; kz <= max_freq; ++kz) {
        if (kx == 0 && (ky < 0 || (ky == 0 && kz < 0))) continue;
        Mode m;
        m.k = {kx, ky, kz};
        const double decay =
            1.0 / (1.0 + kx * kx + ky * ky + kz * kz);
        m.cos_amp.resize(static_cast<std::size_t>(dim));
        m.sin_amp.resize(static_cast<std::size_t>(dim));
        for (int c = 0; c < dim; ++c) {
          m.cos_amp[static_cast<std::size_t>(c)] = per_mode * decay * rng.uniform(-1.0, 1.0);
          m.sin_amp[static_cast<std::size_t>(c)] = per_mode * decay * rng.uniform(-1.0, 1.0);
        }
        poly.modes_.push_back(std::move(m));
      }
  return poly;
}

void TrigPoly::eval(const std::array<double, 3>& x, const std::array<double, 3>& periods,
                    std::span<double> out) const {
  vo::fill(out, 0.0);
  for (const Mode& m : modes_) {
    double phase = 0.0;
    for (int ax = 0; ax < 3; ++ax) phase += m.k[ax] * (two_pi * x[ax] / periods[ax]);
    const double cp = std::cos(phase);
    const double sp = std::sin(phase);
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] += m.cos_amp[c] * cp + m.sin_amp[c] * sp;
  }
}

MapField random_smooth_map(ChartPtr chart, const Target& target, std::uint64_t seed,
                           double amplitude) {
  const int dim = target.ambient_dim();
  TrigPoly poly = TrigPoly::random(seed, dim, 1, amplitude);
  // Base point: north pole on the sphere, origin-offset unit point flat.
  std::vector<double> base(static_cast<std::size_t>(dim), 0.0);
  base[static_cast<std::size_t>(dim) - 1] = 1.0;

  const Grid& g = chart->grid;
  VectorField v(g, dim);
  std::vector<double> tmp(static_cast<std::size_t>(dim));
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const int p = g.index(i, j, k);
        poly.eval(g.coords(i, j, k), g.period, tmp);
        auto slot = v.at(p);
        for (int c = 0; c < dim; ++c) slot[c] = base[static_cast<std::size_t>(c)] + tmp[static_cast<std::size_t>(c)];
        if (target.is_sphere()) {
          const double nrm = vo::norm(slot);
          if (nrm < 0.25)
            throw NumericalError("smooth map perturbation too large to normalize");
          vo::scale(1.0 / nrm, slot);
        }
      }
  return MapField(std::move(chart), target, std::move(v));
}

SectionField random_smooth_section(const MapField& f, std::uint64_t seed,
                                   double amplitude) {
  TrigPoly poly = TrigPoly::random(seed, f.dim(), 1, amplitude);
  const Grid& g = f.chart().grid;
  VectorField raw(g, f.dim());
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        poly.eval(g.coords(i, j, k), g.period, raw.at(g.index(i, j, k)));
  return project_section(f, raw);
}

}  // namespace subflow
