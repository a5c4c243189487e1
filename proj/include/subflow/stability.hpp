#ifndef SUBFLOW_STABILITY_HPP
#define SUBFLOW_STABILITY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subflow/variational.hpp"

namespace subflow {

/// Tangential part of a constant ambient direction along a sphere-valued map:
/// v = a - <a,f> f, together with the height function <a,f>. Differentiating
/// the defining relation gives the closed-form derivative law
/// D_X v = -<a,f> df(X), which the identity checks below use verbatim.
struct ConformalField {
  std::vector<double> direction;
  SectionField section;
  ScalarField height;
};

ConformalField conformal_field(const MapField& f, std::span<const double> direction);

/// Closed-form pull-back derivatives -<a,f> df(e_i) of a conformal section.
std::vector<VectorField> conformal_derivatives(const MapField& f,
                                               const ConformalField& v,
                                               const std::vector<VectorField>& dfs);

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
  double scale = 1.0;  // 1 + |lhs| + |rhs|
};

/// Index form of a conformal field (closed-form derivative route) against its
/// grouped algebraic reduction. Exact up to floating-point recombination.
IdentityReport sphere_index_identity(const MapField& f, const Potential& G,
                                     std::span<const double> direction,
                                     FdOrder order = FdOrder::fourth);

struct LeungReport {
  std::vector<double> per_direction;  // I(v_s, v_s) for each ambient axis
  double sum_direct = 0.0;
  double sum_reduced = 0.0;  // 2(2-n) * horizontal energy - summed Hessian term
  double diff = 0.0;
  double scale = 1.0;
  double horizontal_energy = 0.0;
};

/// Sum of the index form over the full set of ambient-axis conformal fields,
/// against its dimensional reduction.
LeungReport leung_sum(const MapField& f, const Potential& G,
                      FdOrder order = FdOrder::fourth);

enum class Verdict { stable_probed, unstable_certified, inconclusive };

std::string to_string(Verdict v);

struct StabilityVerdict {
  Verdict verdict = Verdict::inconclusive;
  double min_index = 0.0;
  std::optional<SectionField> witness;
  std::string witness_label;
  int probes = 0;
  std::optional<double> lambda_min;
  double tension_sup = 0.0;
  double tension_threshold = 0.0;
  double margin = 0.0;
  int restarts = 0;
};

/// Default certification margin: 1e-6 * (1 + |E(f)|).
double default_certification_margin(const MapField& f, const Potential& G,
                                    FdOrder order = FdOrder::fourth);

struct CertificateOptions {
  double tension_threshold = 1e-2;  // 10x the default flow tolerance
  int rayleigh_iters = 0;           // 0: skip the minimizer fallback
  std::uint64_t seed = 0;
  FdOrder order = FdOrder::fourth;
};

/// Certifies instability of an approximately critical map. Sphere targets are
/// scanned over the ambient-axis conformal fields first; if none is negative
/// beyond the margin the Rayleigh minimizer (if enabled) decides. Throws
/// PreconditionError when the tension gate fails.
StabilityVerdict instability_certificate(const MapField& f, const Potential& G,
                                         double margin,
                                         const CertificateOptions& opts = {});

/// Evaluates the index form on `samples` deterministic probe sections (the
/// conformal axes first on spheres, then seeded smooth sections). A probe
/// below its numerical slack certifies instability; otherwise the verdict is
/// stable-probed (evidence, not proof).
StabilityVerdict stability_probe(const MapField& f, const Potential& G, int samples,
                                 std::uint64_t seed, FdOrder order = FdOrder::fourth);

struct RayleighResult {
  double lambda_min = 0.0;
  std::optional<SectionField> argmin;
  int restarts = 0;
  std::vector<double> history;  // Rayleigh value per iteration, nonincreasing
};

/// Projected gradient descent for the smallest Rayleigh quotient of the index
/// form over an L2-orthonormalized pool of candidate sections.
RayleighResult rayleigh_minimize(const MapField& f, const Potential& G, int iters,
                                 std::uint64_t seed, FdOrder order = FdOrder::fourth);

/// Smallest eigenvalue of the potential Hessian over all grid-image points.
double hessian_min_eigen(const MapField& f, const Potential& G);

}  // namespace subflow

#endif  // SUBFLOW_STABILITY_HPP
