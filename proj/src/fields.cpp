#include "subflow/fields.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "subflow/errors.hpp"
#include "subflow/numerics.hpp"
#include "subflow/parallel.hpp"
#include "subflow/vecops.hpp"

namespace subflow {

MapField::MapField(ChartPtr chart, const Target& target, VectorField values)
    : chart_(std::move(chart)), target_(target), values_(std::move(values)) {
  if (!(values_.grid() == chart_->grid))
    throw ValidationError("map values do not match the chart grid");
  if (values_.dim() != target_.ambient_dim())
    throw ValidationError("map values have wrong ambient dimension for the target");
  if (target_.is_sphere()) {
    for (int p = 0; p < chart_->grid.npoints; ++p) {
      if (std::fabs(vo::norm(values_.at(p)) - 1.0) > 1e-12)
        throw ValidationError("map values violate the unit-sphere constraint");
    }
  }
}

MapField constant_map(ChartPtr chart, const Target& target, std::span<const double> point) {
  target.check_point(point, 1e-12);
  VectorField v(chart->grid, target.ambient_dim());
  for (int p = 0; p < chart->grid.npoints; ++p) vo::copy(point, v.at(p));
  return MapField(std::move(chart), target, std::move(v));
}

double max_tangency_defect(const MapField& f, const VectorField& values) {
  if (!f.target().is_sphere()) return 0.0;
  double worst = 0.0;
  for (int p = 0; p < f.chart().grid.npoints; ++p) {
    auto v = values.at(p);
    const double defect = std::fabs(vo::dot(f.at(p), v)) / std::max(1.0, vo::norm(v));
    worst = std::max(worst, defect);
  }
  return worst;
}

SectionField make_section(const MapField& f, VectorField values, double tol) {
  if (!(values.grid() == f.chart().grid) || values.dim() != f.dim())
    throw ValidationError("section values do not match the base map");
  if (max_tangency_defect(f, values) > tol)
    throw ValidationError("section values are not tangent along the base map");
  return SectionField(f.chart_ptr(), std::move(values));
}

SectionField zero_section(const MapField& f) {
  return SectionField(f.chart_ptr(), VectorField(f.chart().grid, f.dim()));
}

SectionField project_section(const MapField& f, const VectorField& ambient) {
  if (!(ambient.grid() == f.chart().grid) || ambient.dim() != f.dim())
    throw ValidationError("field to project does not match the base map");
  VectorField out(f.chart().grid, f.dim());
  const Target& t = f.target();
  parallel_for(f.chart().grid.npoints, [&](int begin, int end) {
    for (int p = begin; p < end; ++p) t.project_tangent(f.at(p), ambient.at(p), out.at(p));
  });
  return SectionField(f.chart_ptr(), std::move(out));
}

SectionField section_combine(double a, const SectionField& V, double b,
                             const SectionField& W) {
  if (!(V.values().grid() == W.values().grid()) || V.dim() != W.dim())
    throw ValidationError("section shapes do not match");
  VectorField out(V.values().grid(), V.dim());
  auto vs = V.values().data();
  auto ws = W.values().data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] = a * vs[i] + b * ws[i];
  return SectionField(V.chart_ptr(), std::move(out));
}

double section_sup_norm(const SectionField& V) {
  double sup = 0.0;
  for (int p = 0; p < V.chart().grid.npoints; ++p)
    sup = std::max(sup, vo::norm(V.at(p)));
  return sup;
}

double section_l2_inner(const DomainChart& chart, const SectionField& V,
                        const SectionField& W) {
  ScalarField s(chart.grid);
  for (int p = 0; p < chart.grid.npoints; ++p) s[p] = vo::dot(V.at(p), W.at(p));
  return integrate(chart, s);
}

namespace {

inline int wrap(int i, int n) {
  if (i >= n) return i - n;
  if (i < 0) return i + n;
  return i;
}

// d/dx_axis with periodic wraparound, applied to every component.
void axis_derivative(const Grid& g, const double* u, int dim, int axis, FdOrder order,
                     double* out) {
  const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
  const double h = g.h[axis];
  const bool fourth = (order == FdOrder::fourth);
  const double c1 = fourth ? 8.0 / (12.0 * h) : 1.0 / (2.0 * h);
  const double c2 = fourth ? -1.0 / (12.0 * h) : 0.0;

  parallel_for(n0, [&](int ib, int ie) {
    for (int i = ib; i < ie; ++i)
      for (int j = 0; j < n1; ++j)
        for (int k = 0; k < n2; ++k) {
          int ip1 = i, im1 = i, ip2 = i, im2 = i;
          int jp1 = j, jm1 = j, jp2 = j, jm2 = j;
          int kp1 = k, km1 = k, kp2 = k, km2 = k;
          switch (axis) {
            case 0:
              ip1 = wrap(i + 1, n0); im1 = wrap(i - 1, n0);
              ip2 = wrap(i + 2, n0); im2 = wrap(i - 2, n0);
              break;
            case 1:
              jp1 = wrap(j + 1, n1); jm1 = wrap(j - 1, n1);
              jp2 = wrap(j + 2, n1); jm2 = wrap(j - 2, n1);
              break;
            default:
              kp1 = wrap(k + 1, n2); km1 = wrap(k - 1, n2);
              kp2 = wrap(k + 2, n2); km2 = wrap(k - 2, n2);
          }
          const std::size_t p = static_cast<std::size_t>(g.index(i, j, k)) * dim;
          const std::size_t pp1 = static_cast<std::size_t>(g.index(ip1, jp1, kp1)) * dim;
          const std::size_t pm1 = static_cast<std::size_t>(g.index(im1, jm1, km1)) * dim;
          if (fourth) {
            const std::size_t pp2 = static_cast<std::size_t>(g.index(ip2, jp2, kp2)) * dim;
            const std::size_t pm2 = static_cast<std::size_t>(g.index(im2, jm2, km2)) * dim;
            for (int c = 0; c < dim; ++c)
              out[p + c] = c1 * (u[pp1 + c] - u[pm1 + c]) + c2 * (u[pp2 + c] - u[pm2 + c]);
          } else {
            for (int c = 0; c < dim; ++c)
              out[p + c] = c1 * (u[pp1 + c] - u[pm1 + c]);
          }
        }
  });
}

void frame_derivative_raw(const DomainChart& chart, const double* u, int dim, int A,
                          FdOrder order, double* out) {
  const Grid& g = chart.grid;
  const std::size_t total = static_cast<std::size_t>(g.npoints) * dim;
  for (std::size_t i = 0; i < total; ++i) out[i] = 0.0;
  std::vector<double> scratch(total);
  for (int axis = 0; axis < 3; ++axis) {
    if (!chart.frame_axis_used[static_cast<std::size_t>(A)][static_cast<std::size_t>(axis)])
      continue;
    axis_derivative(g, u, dim, axis, order, scratch.data());
    parallel_for(g.npoints, [&](int begin, int end) {
      for (int p = begin; p < end; ++p) {
        const double coef = chart.frame_coef(p, A, axis);
        if (coef == 0.0) continue;
        const std::size_t base = static_cast<std::size_t>(p) * dim;
        for (int c = 0; c < dim; ++c) out[base + c] += coef * scratch[base + c];
      }
    });
  }
}

void check_frame_index(const DomainChart& chart, int A) {
  if (A < 0 || A >= chart.nf())
    throw ValidationError("frame index out of range for this chart");
}

}  // namespace

ScalarField frame_derivative(const DomainChart& chart, const ScalarField& u, int A,
                             FdOrder order) {
  check_frame_index(chart, A);
  if (!(u.grid() == chart.grid))
    throw ValidationError("field does not match the chart grid");
  ScalarField out(chart.grid);
  frame_derivative_raw(chart, u.data().data(), 1, A, order, out.data().data());
  return out;
}

VectorField frame_derivative(const DomainChart& chart, const VectorField& u, int A,
                             FdOrder order) {
  check_frame_index(chart, A);
  if (!(u.grid() == chart.grid))
    throw ValidationError("field does not match the chart grid");
  VectorField out(chart.grid, u.dim());
  frame_derivative_raw(chart, u.data().data(), u.dim(), A, order, out.data().data());
  return out;
}

std::vector<VectorField> horizontal_differential(const MapField& f, FdOrder order) {
  const DomainChart& chart = f.chart();
  std::vector<VectorField> dfs;
  dfs.reserve(static_cast<std::size_t>(chart.m));
  for (int i = 0; i < chart.m; ++i) {
    VectorField raw = frame_derivative(chart, f.values(), i, order);
    const Target& t = f.target();
    parallel_for(chart.grid.npoints, [&](int begin, int end) {
      std::vector<double> tmp(static_cast<std::size_t>(f.dim()));
      for (int p = begin; p < end; ++p) {
        t.project_tangent(f.at(p), raw.at(p), tmp);
        vo::copy(tmp, raw.at(p));
      }
    });
    dfs.push_back(std::move(raw));
  }
  return dfs;
}

SectionField pullback_covariant_derivative(const MapField& f, const SectionField& V,
                                           int A, FdOrder order) {
  if (!(V.values().grid() == f.chart().grid) || V.dim() != f.dim())
    throw ValidationError("section does not match the base map");
  if (max_tangency_defect(f, V.values()) > 1e-8)
    throw ValidationError("section is not tangent along the base map");
  VectorField raw = frame_derivative(f.chart(), V.values(), A, order);
  return project_section(f, raw);
}

MapField exp_map(const MapField& f, const SectionField& V, double t) {
  if (!(V.values().grid() == f.chart().grid) || V.dim() != f.dim())
    throw ValidationError("section does not match the base map");
  VectorField out(f.chart().grid, f.dim());
  const Target& tgt = f.target();
  parallel_for(f.chart().grid.npoints, [&](int begin, int end) {
    std::vector<double> step(static_cast<std::size_t>(f.dim()));
    for (int p = begin; p < end; ++p) {
      vo::copy(V.at(p), step);
      vo::scale(t, step);
      tgt.exp(f.at(p), step, out.at(p));
    }
  });
  return MapField(f.chart_ptr(), tgt, std::move(out));
}

// --- serialization ---------------------------------------------------------

namespace {

std::string target_kind_name(const Target& t) {
  return t.is_sphere() ? "unit-sphere" : "flat-space";
}

std::string render_dump(const std::string& kind, const DomainChart& chart,
                        const Target& target, const VectorField& values) {
  std::string out;
  out.reserve(static_cast<std::size_t>(chart.grid.npoints) * values.dim() * 26 + 256);
  char line[512];
  std::snprintf(line, sizeof line, "# subflow-field v1\n# kind %s\n# chart %s\n",
                kind.c_str(), chart.name.c_str());
  out += line;
  std::snprintf(line, sizeof line, "# resolution %d %d %d\n", chart.grid.n[0],
                chart.grid.n[1], chart.grid.n[2]);
  out += line;
  std::snprintf(line, sizeof line, "# periods %.17g %.17g %.17g\n", chart.grid.period[0],
                chart.grid.period[1], chart.grid.period[2]);
  out += line;
  std::snprintf(line, sizeof line, "# target %s %d\n# dim %d\n",
                target_kind_name(target).c_str(), target.dim(), values.dim());
  out += line;
  const Grid& g = chart.grid;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        auto v = values.at(g.index(i, j, k));
        int len = std::snprintf(line, sizeof line, "%d %d %d", i, j, k);
        for (int c = 0; c < values.dim(); ++c)
          len += std::snprintf(line + len, sizeof line - len, " %.17g", v[c]);
        line[len++] = '\n';
        out.append(line, static_cast<std::size_t>(len));
      }
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open for writing: " + tmp.string());
    os << content;
    if (!os) throw ConfigError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void dump_map(const std::filesystem::path& path, const MapField& f) {
  write_file_atomic(path, render_dump("map", f.chart(), f.target(), f.values()));
}

void dump_section(const std::filesystem::path& path, const SectionField& V,
                  const Target& target) {
  write_file_atomic(path, render_dump("section", V.chart(), target, V.values()));
}

FieldDump load_field_dump(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field dump: " + path.string());
  FieldDump d;
  std::string line;
  bool saw_magic = false;
  std::array<int, 3> res{};
  long rows_seen = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "subflow-field") {
        saw_magic = true;
      } else if (key == "kind") {
        hs >> d.field_kind;
      } else if (key == "chart") {
        hs >> d.chart_name;
      } else if (key == "resolution") {
        hs >> res[0] >> res[1] >> res[2];
        d.resolution = res;
      } else if (key == "periods") {
        hs >> d.periods[0] >> d.periods[1] >> d.periods[2];
      } else if (key == "target") {
        hs >> d.target_kind >> d.target_n;
      } else if (key == "dim") {
        hs >> d.dim;
      }
      continue;
    }
    if (d.dim <= 0 || res[0] <= 0)
      throw ConfigError("field dump rows appear before the header");
    if (d.values.empty())
      d.values.assign(static_cast<std::size_t>(res[0]) * res[1] * res[2] * d.dim, 0.0);
    std::istringstream rs(line);
    int i, j, k;
    if (!(rs >> i >> j >> k)) throw ConfigError("malformed row in field dump");
    if (i < 0 || i >= res[0] || j < 0 || j >= res[1] || k < 0 || k >= res[2])
      throw ConfigError("field dump row index out of range");
    const std::size_t base =
        (static_cast<std::size_t>(i) * res[1] + j) * res[2] * d.dim +
        static_cast<std::size_t>(k) * d.dim;
    for (int c = 0; c < d.dim; ++c) {
      double v;
      if (!(rs >> v)) throw ConfigError("malformed row in field dump");
      d.values[base + c] = v;
    }
    ++rows_seen;
  }
  if (!saw_magic) throw ConfigError("not a subflow field dump: " + path.string());
  const long expected = static_cast<long>(res[0]) * res[1] * res[2];
  if (rows_seen != expected)
    throw ConfigError("field dump row count does not match its header");
  return d;
}

Target target_from_dump(const FieldDump& dump) {
  if (dump.target_kind == "unit-sphere") return Target::unit_sphere(dump.target_n);
  if (dump.target_kind == "flat-space") return Target::flat_space(dump.target_n);
  throw ConfigError("unknown target kind in field dump: " + dump.target_kind);
}

MapField map_from_dump(const FieldDump& dump) {
  if (dump.field_kind != "map")
    throw ConfigError("expected a map dump, got kind: " + dump.field_kind);
  ChartPtr chart = build_chart(dump.chart_name, dump.resolution, dump.periods);
  Target target = target_from_dump(dump);
  VectorField values(chart->grid, dump.dim);
  vo::copy(dump.values, values.data());
  return MapField(std::move(chart), target, std::move(values));
}

}  // namespace subflow
