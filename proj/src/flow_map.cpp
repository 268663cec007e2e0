#include "lcs/flow_map.hpp"

#include <sstream>

namespace lcs {

std::string describe(StepStatus status) {
  switch (status) {
    case StepStatus::Completed: return "completed";
    case StepStatus::Stopped: return "stopped";
    case StepStatus::Aborted: return "aborted";
    case StepStatus::StepUnderflow: return "step size underflow";
    case StepStatus::NonFinite: return "non-finite state";
    case StepStatus::MaxSteps: return "step limit reached";
  }
  return "unknown";
}

namespace {

void check_tol(double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
}

template <int N>
void raise_on_failure(const StepResult<N>& r, double t1) {
  if (r.status == StepStatus::Completed) return;
  std::ostringstream msg;
  msg << "trajectory integration failed (" << describe(r.status) << ") at t=" << r.t
      << " before reaching t=" << t1;
  throw FlowError(msg.str(), r.status, r.t);
}

using State12 = Eigen::Matrix<double, 12, 1>;

}  // namespace

Vec3 advect(const VelocityField& field, const Vec3& x0, double t0, double t1, double tol,
            IntegrationStats* stats) {
  check_tol(tol);
  if (!x0.allFinite() || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw InvalidArgument("advect: non-finite input");
  }
  StepperOptions opt;
  opt.atol = opt.rtol = tol;
  auto rhs = [&field](double t, const Vec3& x, Vec3& dx) {
    dx = field.velocity(x, t);
    return dx.allFinite();
  };
  const auto r = integrate_dopri5<3>(rhs, t0, x0, t1, opt);
  raise_on_failure(r, t1);
  if (stats) *stats = {r.accepted, r.rejected, r.rhs_evals, r.h_start};
  return r.y;
}

FlowSample advect_with_variations(const VelocityField& field, const Vec3& x0, double t0,
                                  double t1, double tol) {
  check_tol(tol);
  if (!x0.allFinite() || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw InvalidArgument("advect_with_variations: non-finite input");
  }
  // Layout: [x (3) | DF column-major (9)].
  State12 y0;
  y0.head<3>() = x0;
  Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();

  StepperOptions opt;
  opt.atol = opt.rtol = tol;
  auto rhs = [&field](double t, const State12& y, State12& dy) {
    const FieldSample s = field.sample(y.head<3>(), t);
    dy.head<3>() = s.u;
    Eigen::Map<Mat3>(dy.data() + 3).noalias() = s.Du * Eigen::Map<const Mat3>(y.data() + 3);
    return dy.allFinite();
  };
  const auto r = integrate_dopri5<12>(rhs, t0, y0, t1, opt);
  raise_on_failure(r, t1);

  FlowSample out;
  out.x0 = x0;
  out.t0 = t0;
  out.t1 = t1;
  out.x1 = r.y.head<3>();
  out.DF = Eigen::Map<const Mat3>(r.y.data() + 3);
  out.stats = {r.accepted, r.rejected, r.rhs_evals, r.h_start};
  return out;
}

Mat3 finite_difference_gradient(const VelocityField& field, const Vec3& x0, double t0,
                                double t1, double delta, double tol) {
  if (!(delta > 0.0)) throw InvalidArgument("finite_difference_gradient: delta must be > 0");
  Mat3 DF;
  for (int j = 0; j < 3; ++j) {
    Vec3 d = Vec3::Zero();
    d[j] = delta;
    const Vec3 plus = advect(field, x0 + d, t0, t1, tol);
    const Vec3 minus = advect(field, x0 - d, t0, t1, tol);
    DF.col(j) = (plus - minus) / (2.0 * delta);
  }
  return DF;
}

}  // namespace lcs
