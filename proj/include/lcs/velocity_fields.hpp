#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "lcs/types.hpp"

namespace lcs {

enum class FieldId { CatsEye, SteadyABC, AperiodicABC, Custom };

std::string_view to_string(FieldId id);

/// Parameters of the built-in fields. Unused entries are ignored by a given field.
struct FieldParams {
  // Cat's eye
  double c = 2.0;
  // ABC family
  double A = std::sqrt(3.0);
  double B = std::sqrt(2.0);
  double C = 1.0;
  // Aperiodic modulation of B and C
  double k0 = 0.3;
  double k1 = 0.5;
  double k2 = 1.5;
  double k3 = 1.8;
};

/// Velocity and Jacobian at one point.
struct FieldSample {
  Vec3 u;
  Mat3 Du;
};

/// Analytic time-dependent velocity field u(x, t) with its exact spatial gradient.
///
/// Instances are immutable once built and cheap to copy; evaluation is pure and
/// thread-safe. Positions are wrapped into the field's periodic domain before
/// evaluation, so callers may pass unwrapped trajectory coordinates.
class VelocityField {
 public:
  using VelocityFn = std::function<Vec3(const Vec3&, double)>;
  using GradientFn = std::function<Mat3(const Vec3&, double)>;

  static VelocityField cats_eye(double c = 2.0);
  static VelocityField steady_abc(double A = std::sqrt(3.0), double B = std::sqrt(2.0),
                                  double C = 1.0);
  static VelocityField aperiodic_abc(const FieldParams& p = {});
  static VelocityField custom(std::string name, VelocityFn u, GradientFn Du,
                              Domain domain = {});
  /// Linear test field u = M x on an unbounded domain.
  static VelocityField linear(const Mat3& M);

  FieldId id() const { return id_; }
  const std::string& name() const { return name_; }
  const FieldParams& params() const { return params_; }
  const Domain& domain() const { return domain_; }
  bool time_dependent() const { return id_ == FieldId::AperiodicABC || id_ == FieldId::Custom; }

  Vec3 velocity(const Vec3& x, double t) const;
  Mat3 gradient(const Vec3& x, double t) const;
  /// Velocity and gradient together; shares trigonometric work for the built-ins.
  FieldSample sample(const Vec3& x, double t) const;

 private:
  VelocityField() = default;
  void check_input(const Vec3& x, double t) const;

  FieldId id_ = FieldId::Custom;
  std::string name_;
  FieldParams params_;
  Domain domain_;
  std::shared_ptr<const VelocityFn> custom_u_;
  std::shared_ptr<const GradientFn> custom_Du_;
};

/// psi(x, y) = -log[c cosh(y) + sqrt(c^2 - 1) cos(x)] of the Cat's eye flow.
double cats_eye_stream_function(double x, double y, double c);

struct AbcCoefficients {
  double B;
  double C;
};

/// Time-modulated B and C of the aperiodic ABC flow.
AbcCoefficients aperiodic_coefficients(double t, double B, double C, double k0, double k1,
                                       double k2, double k3);

/// Builds a built-in field from its registry name ("cats_eye", "steady_abc",
/// "aperiodic_abc") and a parameter table. Unknown names or parameters throw.
VelocityField make_field(const std::string& name, const std::map<std::string, double>& params);

}  // namespace lcs
