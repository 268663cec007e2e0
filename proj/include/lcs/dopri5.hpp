#pragma once

// Adaptive embedded Runge-Kutta (4,5) integrator with Dormand-Prince
// coefficients and Hairer-style step control. Step-point output only; no
// dense output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Core>

namespace lcs {

struct StepperOptions {
  double atol = 1e-8;
  double rtol = 1e-8;
  /// Initial step; 0 selects the norm-based starting-step heuristic.
  double h_init = 0.0;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

enum class StepStatus { Completed, Stopped, Aborted, StepUnderflow, NonFinite, MaxSteps };

template <int N>
struct StepResult {
  using State = Eigen::Matrix<double, N, 1>;
  StepStatus status = StepStatus::Completed;
  double t = 0.0;  // last reached value of the independent variable
  State y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double h_start = 0.0;  // first trial step actually used
};

namespace dopri {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// 5th-order solution minus embedded 4th-order solution.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace dopri

/// Integrates y' = f(t, y) from t0 to t1 (either direction).
///
/// `rhs(t, y, dydt)` returns false to abort the integration (status Aborted).
/// `observer(t, y)` is called after every accepted step and returns false to
/// stop early (status Stopped).
template <int N, class Rhs, class Observer>
StepResult<N> integrate_dopri5(Rhs&& rhs, double t0, const Eigen::Matrix<double, N, 1>& y0,
                               double t1, const StepperOptions& opt, Observer&& observer) {
  using State = Eigen::Matrix<double, N, 1>;
  using namespace dopri;

  StepResult<N> res;
  res.t = t0;
  res.y = y0;
  if (t1 == t0) return res;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double eps = std::numeric_limits<double>::epsilon();

  auto scaled_norm = [&](const State& e, const State& ya, const State& yb) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = e[i] / sc;
      acc += q * q;
    }
    return std::sqrt(acc / N);
  };

  State y = y0;
  double t = t0;
  State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;

  if (!rhs(t, y, k1)) {
    res.status = StepStatus::Aborted;
    return res;
  }
  ++res.rhs_evals;

  const double span = std::abs(t1 - t0);
  double h = std::abs(opt.h_init);
  if (h == 0.0) {
    // Starting step from the norms of y and f (Hairer, Norsett & Wanner).
    State zero = State::Zero();
    const double d0 = scaled_norm(y, y, zero);
    const double d1 = scaled_norm(k1, y, zero);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, span, opt.h_max});
    ytmp = y + dir * h0 * k1;
    if (!rhs(t + dir * h0, ytmp, k2)) {
      res.status = StepStatus::Aborted;
      return res;
    }
    ++res.rhs_evals;
    const double d2 = scaled_norm(State(k2 - k1), y, zero) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, span, opt.h_max});
  res.h_start = h;

  bool last_rejected = false;
  std::size_t steps = 0;
  while (true) {
    if (steps++ >= opt.max_steps) {
      res.status = StepStatus::MaxSteps;
      break;
    }
    const double remaining = std::abs(t1 - t);
    bool final_step = false;
    if (h >= remaining * (1.0 - 4.0 * eps)) {
      h = remaining;
      final_step = true;
    }
    if (h < 16.0 * eps * std::max(std::abs(t), 1.0)) {
      res.status = StepStatus::StepUnderflow;
      break;
    }
    const double hs = dir * h;

    ytmp = y + hs * (a21 * k1);
    if (!rhs(t + c2 * hs, ytmp, k2)) { res.status = StepStatus::Aborted; break; }
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    if (!rhs(t + c3 * hs, ytmp, k3)) { res.status = StepStatus::Aborted; break; }
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    if (!rhs(t + c4 * hs, ytmp, k4)) { res.status = StepStatus::Aborted; break; }
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    if (!rhs(t + c5 * hs, ytmp, k5)) { res.status = StepStatus::Aborted; break; }
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = final_step ? t1 : t + hs;
    if (!rhs(t + hs, ytmp, k6)) { res.status = StepStatus::Aborted; break; }
    ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    if (!rhs(t_new, ynew, k7)) { res.status = StepStatus::Aborted; break; }
    res.rhs_evals += 6;

    const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = scaled_norm(err, y, ynew);
    if (!std::isfinite(en) || !ynew.allFinite()) {
      // Retry smaller; give up once the step underflows.
      h *= 0.1;
      ++res.rejected;
      last_rejected = true;
      if (h < 16.0 * eps * std::max(std::abs(t), 1.0)) {
        res.status = StepStatus::NonFinite;
        break;
      }
      continue;
    }

    double fac = en == 0.0 ? 10.0 : 0.9 * std::pow(en, -0.2);
    if (en <= 1.0) {
      t = t_new;
      y = ynew;
      k1 = k7;
      ++res.accepted;
      res.t = t;
      res.y = y;
      if (!observer(t, y)) {
        res.status = StepStatus::Stopped;
        break;
      }
      if (final_step) {
        res.status = StepStatus::Completed;
        break;
      }
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h = std::min(h * fac, opt.h_max);
      last_rejected = false;
    } else {
      ++res.rejected;
      h *= std::max(fac, 0.2);
      last_rejected = true;
    }
  }
  res.t = t;
  res.y = y;
  return res;
}

template <int N, class Rhs>
StepResult<N> integrate_dopri5(Rhs&& rhs, double t0, const Eigen::Matrix<double, N, 1>& y0,
                               double t1, const StepperOptions& opt) {
  return integrate_dopri5<N>(std::forward<Rhs>(rhs), t0, y0, t1, opt,
                             [](double, const Eigen::Matrix<double, N, 1>&) { return true; });
}

}  // namespace lcs
