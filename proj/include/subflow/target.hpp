#ifndef SUBFLOW_TARGET_HPP
#define SUBFLOW_TARGET_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace subflow {

/// Embedded target manifold: the unit sphere S^n in R^{n+1} or flat R^n.
/// All points and vectors are ambient-coordinate arrays.
class Target {
 public:
  enum class Kind { unit_sphere, flat_space };

  static Target unit_sphere(int n);
  static Target flat_space(int n);

  Kind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == Kind::unit_sphere; }
  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return is_sphere() ? ambient_dim_ - 1 : ambient_dim_; }

  /// Throws StateError if y has drifted off the manifold by more than tol.
  void check_point(std::span<const double> y, double tol = 1e-8) const;

  /// Throws ValidationError if v is not tangent at y within tol (relative to |v|).
  void check_tangent(std::span<const double> y, std::span<const double> v,
                     double tol = 1e-8) const;

  /// Orthogonal projection of an ambient vector onto the tangent space at y.
  void project_tangent(std::span<const double> y, std::span<const double> w,
                       std::span<double> out) const;

  /// Geodesic exponential. Sphere results are renormalized to the constraint.
  void exp(std::span<const double> y, std::span<const double> v,
           std::span<double> out) const;

  /// <R(X,V)V, X> for tangent X, V: |X|^2|V|^2 - <X,V>^2 on the sphere, 0 flat.
  double curvature_term(std::span<const double> y, std::span<const double> X,
                        std::span<const double> V) const;

  bool operator==(const Target&) const = default;

 private:
  Target(Kind k, int ambient) : kind_(k), ambient_dim_(ambient) {}
  Kind kind_;
  int ambient_dim_;
};

/// Smooth potential G on the target. Gradients are tangent vectors; the
/// Hessian is evaluated as a bilinear form on tangent vectors.
class Potential {
 public:
  enum class Kind { constant, height, squared_distance, ambient };

  using AmbientValue = std::function<double(std::span<const double>)>;
  using AmbientGrad = std::function<void(std::span<const double>, std::span<double>)>;
  using AmbientHess = std::function<double(std::span<const double>, std::span<const double>,
                                           std::span<const double>)>;

  /// G == c everywhere.
  static Potential constant(double c);

  /// G(y) = -<e_last, y> on the sphere.
  static Potential height();

  /// G(y) = dist(y, north pole)^2 on the open upper hemisphere.
  static Potential squared_distance();

  /// Restriction of an ambient function given with its ambient gradient and
  /// Hessian; the sphere case corrects with the second fundamental form.
  static Potential ambient(AmbientValue value, AmbientGrad grad, AmbientHess hess,
                           std::string label = "ambient-custom");

  /// G(y) = coeff * |y|^2 as an ambient function.
  static Potential ambient_quadratic(double coeff);

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }

  double value(const Target& t, std::span<const double> y) const;
  void gradient(const Target& t, std::span<const double> y, std::span<double> out) const;
  double hessian(const Target& t, std::span<const double> y, std::span<const double> V,
                 std::span<const double> W) const;

 private:
  Potential(Kind k, std::string label) : kind_(k), label_(std::move(label)) {}
  Kind kind_;
  std::string label_;
  double constant_ = 0.0;
  AmbientValue ambient_value_;
  AmbientGrad ambient_grad_;
  AmbientHess ambient_hess_;
};

/// One-point evaluation bundle: value, tangent gradient, and a reusable
/// Hessian form at the same base point.
struct PotentialSample {
  double value = 0.0;
  std::vector<double> gradient;
  std::function<double(std::span<const double>, std::span<const double>)> hessian;
};

PotentialSample potential_eval(const Potential& G, const Target& t,
                               std::span<const double> y);

}  // namespace subflow

#endif  // SUBFLOW_TARGET_HPP
