#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "lcs/dopri5.hpp"
#include "lcs/types.hpp"
#include "lcs/velocity_fields.hpp"

namespace lcs {

inline constexpr double kDefaultTol = 1e-8;

struct IntegrationStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double h_start = 0.0;
};

/// End state of one trajectory together with the deformation gradient.
struct FlowSample {
  Vec3 x0;
  double t0 = 0.0;
  double t1 = 0.0;
  Vec3 x1;
  Mat3 DF;
  IntegrationStats stats;
};

/// Raised when a trajectory cannot be completed. `reached` is the last time
/// the integrator accepted.
class FlowError : public std::runtime_error {
 public:
  FlowError(const std::string& what, StepStatus status, double reached)
      : std::runtime_error(what), status_(status), reached_(reached) {}
  StepStatus status() const { return status_; }
  double reached() const { return reached_; }

 private:
  StepStatus status_;
  double reached_;
};

/// x(t1; t0, x0). Positions are returned unwrapped.
Vec3 advect(const VelocityField& field, const Vec3& x0, double t0, double t1,
            double tol = kDefaultTol, IntegrationStats* stats = nullptr);

/// Integrates the trajectory and the equation of variations as one
/// 12-component system under a shared error norm; DF(t0) = I.
FlowSample advect_with_variations(const VelocityField& field, const Vec3& x0, double t0,
                                  double t1, double tol = kDefaultTol);

/// DF by central differences of `advect` over +-delta along each axis.
Mat3 finite_difference_gradient(const VelocityField& field, const Vec3& x0, double t0,
                                double t1, double delta, double tol = kDefaultTol);

/// Calls `visit(t, x)` at x0 and after every accepted step of the trajectory.
/// Returns the final state; a false return from `visit` stops early.
template <class Visitor>
StepResult<3> trace_trajectory(const VelocityField& field, const Vec3& x0, double t0, double t1,
                               double tol, Visitor&& visit) {
  StepperOptions opt;
  opt.atol = opt.rtol = tol;
  auto rhs = [&field](double t, const Vec3& x, Vec3& dx) {
    dx = field.velocity(x, t);
    return dx.allFinite();
  };
  if (!visit(t0, x0)) {
    StepResult<3> r;
    r.t = t0;
    r.y = x0;
    r.status = StepStatus::Stopped;
    return r;
  }
  return integrate_dopri5<3>(rhs, t0, x0, t1, opt, visit);
}

std::string describe(StepStatus status);

}  // namespace lcs
