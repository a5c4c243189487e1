#ifndef SUBFLOW_FIELDS_HPP
#define SUBFLOW_FIELDS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "subflow/domain.hpp"
#include "subflow/grid.hpp"
#include "subflow/target.hpp"

namespace subflow {

/// Stencil order for the periodic central differences.
enum class FdOrder { second = 2, fourth = 4 };

/// Smooth map from the chart into the target, sampled per grid point.
/// Sphere values must satisfy the unit constraint within 1e-12.
class MapField {
 public:
  MapField(ChartPtr chart, const Target& target, VectorField values);

  const DomainChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  const Target& target() const { return target_; }
  int dim() const { return values_.dim(); }

  std::span<const double> at(int p) const { return values_.at(p); }
  std::span<double> at(int p) { return values_.at(p); }
  const VectorField& values() const { return values_; }
  VectorField& values() { return values_; }

 private:
  ChartPtr chart_;
  Target target_;
  VectorField values_;
};

/// Section of the pulled-back tangent bundle: an ambient vector per grid
/// point, tangent to the target along the base map it was built against.
class SectionField {
 public:
  SectionField(ChartPtr chart, VectorField values)
      : chart_(std::move(chart)), values_(std::move(values)) {}

  const DomainChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  int dim() const { return values_.dim(); }

  std::span<const double> at(int p) const { return values_.at(p); }
  std::span<double> at(int p) { return values_.at(p); }
  const VectorField& values() const { return values_; }
  VectorField& values() { return values_; }

 private:
  ChartPtr chart_;
  VectorField values_;
};

MapField constant_map(ChartPtr chart, const Target& target, std::span<const double> point);

/// Validates tangency of raw data along f (within tol) and wraps it.
SectionField make_section(const MapField& f, VectorField values, double tol = 1e-10);

SectionField zero_section(const MapField& f);

/// Pointwise tangent projection of an arbitrary ambient field along f.
SectionField project_section(const MapField& f, const VectorField& ambient);

/// aV + bW
SectionField section_combine(double a, const SectionField& V, double b, const SectionField& W);

double section_sup_norm(const SectionField& V);

/// L2 pairing of two sections over the chart volume.
double section_l2_inner(const DomainChart& chart, const SectionField& V,
                        const SectionField& W);

/// Worst tangency defect of V along f, relative to max(1, |V|) per point.
double max_tangency_defect(const MapField& f, const VectorField& values);

/// Derivative along frame vector e_A via periodic central differences
/// contracted with the frame coefficients.
ScalarField frame_derivative(const DomainChart& chart, const ScalarField& u, int A,
                             FdOrder order = FdOrder::fourth);
VectorField frame_derivative(const DomainChart& chart, const VectorField& u, int A,
                             FdOrder order = FdOrder::fourth);

/// df(e_i) for the horizontal frame vectors, tangent-projected along f so the
/// discrete differential is exactly tangent. Returns m ambient fields.
std::vector<VectorField> horizontal_differential(const MapField& f,
                                                 FdOrder order = FdOrder::fourth);

/// Pull-back covariant derivative of a section along e_A: the tangent
/// projection at f of the frame derivative of V.
SectionField pullback_covariant_derivative(const MapField& f, const SectionField& V,
                                           int A, FdOrder order = FdOrder::fourth);

/// Geodesic update exp_f(t V), applied per grid point.
MapField exp_map(const MapField& f, const SectionField& V, double t);

// --- serialization ---------------------------------------------------------
//
// Text dumps: `# key value` header lines followed by one row per grid point
// in lexicographic (i,j,k) order, each row `i j k v_0 ... v_{dim-1}` printed
// with enough digits to round-trip doubles exactly.

struct FieldDump {
  std::string field_kind;  // "map" or "section"
  std::string chart_name;
  std::array<int, 3> resolution{};
  std::array<double, 3> periods{};
  std::string target_kind;
  int target_n = 0;
  int dim = 0;
  std::vector<double> values;
};

void dump_map(const std::filesystem::path& path, const MapField& f);
void dump_section(const std::filesystem::path& path, const SectionField& V,
                  const Target& target);
FieldDump load_field_dump(const std::filesystem::path& path);

Target target_from_dump(const FieldDump& dump);
MapField map_from_dump(const FieldDump& dump);

/// Write-to-temp-then-rename; readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace subflow

#endif  // SUBFLOW_FIELDS_HPP
