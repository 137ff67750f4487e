#pragma once

// Deterministic evolution of the dimensionless hedging-feedback equation
//
//   dz/ds = (alpha - z/(1-s)) / (sqrt(1-s)/beta * exp(d1^2/2) + 2),
//   d1    = z/sqrt(1-s) + alpha sqrt(1-s),
//
// plus the time-term-only variant (no "+2") and the beta -> infinity limit.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "pinning/hedge_series.hpp"
#include "pinning/model.hpp"

namespace pinning {

enum class HedgeMode { corrected, original_time_term_only, infinite_elasticity };
enum class StepScheme { rk4, euler };

[[nodiscard]] constexpr std::string_view to_string(HedgeMode m) noexcept {
  switch (m) {
    case HedgeMode::corrected: return "corrected";
    case HedgeMode::original_time_term_only: return "original";
    case HedgeMode::infinite_elasticity: return "infinite-elasticity";
  }
  return "?";
}

[[nodiscard]] constexpr std::string_view to_string(StepScheme s) noexcept {
  return s == StepScheme::rk4 ? "rk4" : "euler";
}

struct OdeConfig {
  double s_start = 0.0;
  double s_end = 357.0 / 360.0;
  double z_start = 0.0;
  int steps = 357;
  HedgeMode mode = HedgeMode::corrected;
  StepScheme scheme = StepScheme::rk4;

  void validate() const {
    if (!(s_start >= 0.0 && s_start < s_end && s_end < 1.0))
      throw std::invalid_argument("need 0 <= s_start < s_end < 1");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (!std::isfinite(z_start)) throw std::invalid_argument("z_start must be finite");
  }

  /// Grid point k of the fixed-step mesh; the last point is exactly s_end.
  [[nodiscard]] double grid(int k) const noexcept {
    if (k >= steps) return s_end;
    return s_start + (s_end - s_start) * static_cast<double>(k) / static_cast<double>(steps);
  }
};

enum class Termination { completed, singularity_detected, step_rejected };

[[nodiscard]] constexpr std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::singularity_detected: return "singularity_detected";
    case Termination::step_rejected: return "step_rejected";
  }
  return "?";
}

struct TrajectorySample {
  double s = 0.0;
  double z = 0.0;
  double time = 0.0;   // minutes since start
  double price = 0.0;  // dollars
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination termination = Termination::completed;
  std::optional<double> singular_s;  // bracketed denominator root when singularity_detected
};

// ---------------------------------------------------------------------------
// Right-hand sides

[[nodiscard]] inline double rhs_numerator(double z, double s, double alpha) noexcept {
  return alpha - z / (1.0 - s);
}

/// Full feedback (time and price terms). beta == 0 means no hedging force.
/// Throws SingularityError when the denominator is <= 0.
[[nodiscard]] inline double rhs_corrected(double z, double s, const DimensionlessParams& dp) {
  if (!(s < 1.0)) throw ExpirationReached("dimensionless time must be < 1");
  if (dp.beta == 0.0) return 0.0;
  const double den = dimensionless_denominator(z, s, dp);
  if (!(den > 0.0)) throw SingularityError("feedback denominator is not positive", den);
  return rhs_numerator(z, s, dp.alpha) / den;
}

/// Time-term-only feedback: the corrected form without the "+2" contributed by
/// the price dependence of the hedge.
[[nodiscard]] inline double rhs_original(double z, double s, const DimensionlessParams& dp) {
  if (!(s < 1.0)) throw ExpirationReached("dimensionless time must be < 1");
  if (dp.beta == 0.0) return 0.0;
  const double d = d1_dimensionless(z, s, dp.alpha);
  const double den = std::sqrt(1.0 - s) / dp.beta * std::exp(0.5 * d * d);
  return rhs_numerator(z, s, dp.alpha) / den;
}

/// beta -> infinity limit: dz/ds = (alpha + z/(s-1)) / 2.
[[nodiscard]] inline double rhs_infinite_elasticity(double z, double s, double alpha) {
  if (!(s < 1.0)) throw ExpirationReached("dimensionless time must be < 1");
  return 0.5 * rhs_numerator(z, s, alpha);
}

/// Closed-form solution of the beta -> infinity equation through (s0, z0):
///   z(s) = alpha (s - 1) + C sqrt(1 - s),   C = (z0 + alpha (1 - s0)) / sqrt(1 - s0).
/// Every solution reaches z = 0 (S = K) at s = 1.
[[nodiscard]] inline double analytic_limit(double z0, double s0, double s, double alpha) {
  if (!(s0 >= 0.0 && s0 <= s && s <= 1.0)) throw std::invalid_argument("need 0 <= s0 <= s <= 1");
  if (s == s0) return z0;
  const double c = (z0 + alpha * (1.0 - s0)) / std::sqrt(1.0 - s0);
  return alpha * (s - 1.0) + c * std::sqrt(1.0 - s);
}

// ---------------------------------------------------------------------------
// Steppers

/// One classical Runge-Kutta step of y' = f(x, y).
template <class F>
[[nodiscard]] double rk4_step(F&& f, double x, double y, double h) {
  const double k1 = f(x, y);
  const double k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = f(x + h, y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

// RHS value together with the corrected-form denominator it was divided by.
// The denominator is +inf whenever no sign change is possible (other modes,
// beta == 0) so singularity tracking reduces to a sign test.
struct RhsEval {
  double value;
  double denominator;
};

inline RhsEval evaluate(HedgeMode mode, double z, double s, const DimensionlessParams& dp) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (mode) {
    case HedgeMode::corrected: {
      if (dp.beta == 0.0) return {0.0, inf};
      const double den = dimensionless_denominator(z, s, dp);
      return {rhs_numerator(z, s, dp.alpha) / den, den};
    }
    case HedgeMode::original_time_term_only:
      return {rhs_original(z, s, dp), inf};
    case HedgeMode::infinite_elasticity:
      return {rhs_infinite_elasticity(z, s, dp.alpha), inf};
  }
  return {std::numeric_limits<double>::quiet_NaN(), inf};
}

struct StepOutcome {
  double z;
  bool crossed;  // denominator left the starting sign somewhere in the step
};

inline bool same_side(double den, bool start_positive) {
  return start_positive ? den > 0.0 : den < 0.0;
}

inline StepOutcome take_step(HedgeMode mode, StepScheme scheme, double z, double s, double h,
                             const DimensionlessParams& dp, bool start_positive) {
  bool crossed = false;
  auto f = [&](double ss, double zz) {
    const RhsEval e = evaluate(mode, zz, ss, dp);
    if (!same_side(e.denominator, start_positive)) crossed = true;
    return e.value;
  };
  double z_next = 0.0;
  if (scheme == StepScheme::rk4) {
    z_next = rk4_step(f, s, z, h);
  } else {
    z_next = z + h * f(s, z);
  }
  if (!crossed && std::isfinite(z_next)) {
    const RhsEval end = evaluate(mode, z_next, s + h, dp);
    if (!same_side(end.denominator, start_positive)) crossed = true;
  }
  return {z_next, crossed};
}

}  // namespace detail

/// Fixed-step integration of the selected mode from (s_start, z_start) to s_end.
///
/// A step whose stages or endpoint put the feedback denominator on the other
/// side of zero ends the run with `singularity_detected`; the root is then
/// bracketed by bisection on the step length to better than 1e-9 in s. A
/// non-finite state ends the run with `step_rejected`.
[[nodiscard]] inline Trajectory integrate(const OdeConfig& cfg, const DimensionlessParams& dp) {
  cfg.validate();
  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  auto push = [&](double s, double z) {
    traj.samples.push_back({s, z, dp.coords.time(s), dp.coords.price(z)});
  };

  double z = cfg.z_start;
  double s = cfg.s_start;
  push(s, z);

  const double den0 = detail::evaluate(cfg.mode, z, s, dp).denominator;
  if (den0 == 0.0 || std::isnan(den0)) {
    traj.termination = Termination::singularity_detected;
    traj.singular_s = s;
    return traj;
  }
  const bool positive = den0 > 0.0;

  for (int k = 0; k < cfg.steps; ++k) {
    const double s_next = cfg.grid(k + 1);
    const double h = s_next - s;
    const detail::StepOutcome out = detail::take_step(cfg.mode, cfg.scheme, z, s, h, dp, positive);

    if (out.crossed) {
      double lo = 0.0;
      double hi = h;
      double z_lo = z;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const detail::StepOutcome trial = detail::take_step(cfg.mode, cfg.scheme, z, s, mid, dp, positive);
        if (trial.crossed || !std::isfinite(trial.z)) {
          hi = mid;
        } else {
          lo = mid;
          z_lo = trial.z;
        }
      }
      if (lo > 0.0) push(s + lo, z_lo);
      traj.termination = Termination::singularity_detected;
      traj.singular_s = s + 0.5 * (lo + hi);
      return traj;
    }
    if (!std::isfinite(out.z)) {
      traj.termination = Termination::step_rejected;
      return traj;
    }
    z = out.z;
    s = s_next;
    push(s, z);
  }
  return traj;
}

/// N(d1), delta and hedge position along a trajectory's physical states.
/// `params` supplies sigma, mu and the position n; it must share the strike
/// and horizon of the trajectory's coordinate map.
[[nodiscard]] inline HedgeSeries hedge_fraction_series(const Trajectory& traj, const DimensionlessParams& dp,
                                                       const ModelParams& params) {
  std::vector<double> times;
  std::vector<double> prices;
  times.reserve(traj.samples.size());
  prices.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) {
    times.push_back(dp.coords.time(smp.s));
    prices.push_back(smp.price);
  }
  return build_hedge_series(times, prices, params);
}

}  // namespace pinning
