#ifndef SUBFLOW_VARIATIONAL_HPP
#define SUBFLOW_VARIATIONAL_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "subflow/fields.hpp"

namespace subflow {

/// One residual comparison between an analytic quantity and its
/// finite-difference counterpart at a fixed grid.
struct VariationReport {
  std::string check;
  std::array<int, 3> grid{};
  double h = 0.0;
  double dt = 0.0;
  double analytic = 0.0;
  double fd = 0.0;
  double residual = 0.0;
  std::optional<double> order_estimate;  // filled by refinement studies
};

/// Horizontal Dirichlet density: half the squared norm of df over the
/// horizontal frame directions.
ScalarField energy_density(const MapField& f, FdOrder order = FdOrder::fourth);

/// E(f) = integral of (energy density - G(f)) over the chart volume.
double total_energy(const MapField& f, const Potential& G,
                    FdOrder order = FdOrder::fourth);

/// Horizontal tension with potential: the trace of the horizontal second
/// fundamental form, minus df applied to the vertical mean-curvature vector,
/// plus the gradient of G along f. Critical maps have vanishing tension.
SectionField tension_with_potential(const MapField& f, const Potential& G,
                                    FdOrder order = FdOrder::fourth);

/// |analytic - fd| where analytic = -integral <V, tension> and fd is a
/// 4-point centered dt-derivative of t -> E(exp_f(tV)).
VariationReport first_variation_residual(const MapField& f, const SectionField& V,
                                         const Potential& G, double dt,
                                         FdOrder order = FdOrder::fourth);

/// Integration-by-parts identity for the horizontal differential: the
/// divergence-style left side against a section W versus the vertical
/// mean-curvature right side. Reports lhs as `analytic`, rhs as `fd`.
VariationReport divergence_identity_residual(const MapField& f, const SectionField& W,
                                             FdOrder order = FdOrder::fourth);

struct IndexParts {
  double dirichlet = 0.0;  // integral of sum_i |D_i V|^2
  double curvature = 0.0;  // integral of the sectional-curvature pairing
  double hessian = 0.0;    // integral of Hess G (V, V)
  double value() const { return dirichlet - curvature - hessian; }
  double gross() const;
};

IndexParts index_form_parts(const MapField& f, const SectionField& V, const Potential& G,
                            FdOrder order = FdOrder::fourth);

/// Same decomposition but with caller-supplied derivative fields in place of
/// the numeric pull-back derivative (used where a closed-form derivative law
/// is available and makes identities exact).
IndexParts index_form_parts_given(const MapField& f, const SectionField& V,
                                  const std::vector<VectorField>& derivs,
                                  const Potential& G, FdOrder order = FdOrder::fourth);

/// Second-variation quadratic form I(V,V).
double index_form(const MapField& f, const SectionField& V, const Potential& G,
                  FdOrder order = FdOrder::fourth);

/// Bilinear extension by polarization: (I(V+W) - I(V-W)) / 4.
double index_form_polarized(const MapField& f, const SectionField& V,
                            const SectionField& W, const Potential& G,
                            FdOrder order = FdOrder::fourth);

/// |index_form - fd| where fd is a 5-point centered second dt-derivative of
/// t -> E(exp_f(tV)).
VariationReport second_variation_residual(const MapField& f, const SectionField& V,
                                          const Potential& G, double dt,
                                          FdOrder order = FdOrder::fourth);

/// Diagnostic variant with the potential-Hessian sign flipped. Its residual
/// against the FD second derivative converges to a nonzero limit (twice the
/// integrated Hessian term), which is what discriminates the correct sign.
VariationReport second_variation_residual_flipped(const MapField& f,
                                                  const SectionField& V,
                                                  const Potential& G, double dt,
                                                  FdOrder order = FdOrder::fourth);

double tension_sup_norm(const MapField& f, const Potential& G,
                        FdOrder order = FdOrder::fourth);

}  // namespace subflow

#endif  // SUBFLOW_VARIATIONAL_HPP
