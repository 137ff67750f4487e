#pragma once

// Closed-form pieces of the straddle delta-hedging feedback model.
//
// Units: time in minutes, volatility per sqrt(minute), drift per minute.
// Annualized inputs must be converted by the caller.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pinning/errors.hpp"

namespace pinning {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)

/// Physical parameter set. Defaults describe a $500 strike expiring 360 minutes
/// after a 10:00 open.
struct ModelParams {
  double strike = 500.0;      // K, dollars
  double sigma = 1.102e-3;    // per sqrt(minute)
  double mu = 0.0;            // per minute
  double horizon = 360.0;     // t0, minutes from simulation start to expiration
  double position = 0.0;      // n, straddles held by the hedger (signed)
  double elasticity = 0.0;    // E, relative price change per unit demand

  void validate() const {
    if (!(strike > 0.0) || !std::isfinite(strike)) throw std::invalid_argument("strike must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be > 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
    if (!std::isfinite(position)) throw std::invalid_argument("position must be finite");
    if (!(elasticity >= 0.0) || !std::isfinite(elasticity))
      throw std::invalid_argument("elasticity must be >= 0");
  }

  [[nodiscard]] bool has_hedging_force() const noexcept { return position != 0.0 && elasticity != 0.0; }
};

/// Maps physical (S, t) onto dimensionless (z, s):
///   z = ln(S/K) / (sigma sqrt(t0)),  s = t / t0.
struct CoordinateMap {
  double strike = 1.0;
  double sigma = 1.0;
  double horizon = 1.0;

  [[nodiscard]] double scale() const noexcept { return sigma * std::sqrt(horizon); }
  [[nodiscard]] double z(double price) const { return std::log(price / strike) / scale(); }
  [[nodiscard]] double s(double time) const noexcept { return time / horizon; }
  [[nodiscard]] double price(double z) const { return strike * std::exp(z * scale()); }
  [[nodiscard]] double time(double s) const noexcept { return s * horizon; }
};

/// Dimensionless drift and hedging impact.
struct DimensionlessParams {
  double alpha = 0.0;
  double beta = 0.0;
  CoordinateMap coords{};

  /// nE/sqrt(2 pi), the curve label used for plots of hedging impact; equals beta * sigma * sqrt(t0).
  [[nodiscard]] double caption_impact() const noexcept { return beta * coords.scale(); }
};

struct StatePoint {
  double time = 0.0;
  double price = 0.0;
  double tau = 0.0;
  double z = 0.0;
  double s = 0.0;
};

/// Standard normal CDF, 0.5 * erfc(-x / sqrt(2)).
///
/// The complementary form keeps full relative precision in the lower tail;
/// glibc's erfc is accurate to a few ulp, far inside the 1e-10 absolute
/// budget this model needs.
[[nodiscard]] inline double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

[[nodiscard]] inline double normal_pdf(double x) noexcept {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

namespace detail {

inline void require_tau(double tau) {
  if (!(tau > 0.0)) throw ExpirationReached("time to expiration must be > 0");
}

inline void require_price(double price) {
  if (!(price > 0.0) || !std::isfinite(price)) throw std::invalid_argument("price must be > 0");
}

}  // namespace detail

/// d1 = (ln(S/K) + (mu + sigma^2/2) tau) / (sigma sqrt(tau))
[[nodiscard]] inline double d1(double price, double tau, const ModelParams& p) {
  detail::require_price(price);
  detail::require_tau(tau);
  const double drift = p.mu + 0.5 * p.sigma * p.sigma;
  return (std::log(price / p.strike) + drift * tau) / (p.sigma * std::sqrt(tau));
}

/// d1 in dimensionless coordinates: z / sqrt(1-s) + alpha sqrt(1-s).
[[nodiscard]] inline double d1_dimensionless(double z, double s, double alpha) {
  if (!(s < 1.0)) throw ExpirationReached("dimensionless time must be < 1");
  const double r = std::sqrt(1.0 - s);
  return z / r + alpha * r;
}

/// Delta of one straddle (long call + long put): 2 N(d1) - 1.
[[nodiscard]] inline double straddle_delta(double price, double tau, const ModelParams& p) {
  return 2.0 * normal_cdf(d1(price, tau, p)) - 1.0;
}

/// Partial of the straddle delta with respect to calendar time t (tau = t0 - t),
/// holding the price fixed.
[[nodiscard]] inline double delta_time_partial(double price, double tau, const ModelParams& p) {
  const double d = d1(price, tau, p);
  const double sqrt_tau = std::sqrt(tau);
  const double drift = p.mu + 0.5 * p.sigma * p.sigma;
  return kInvSqrt2Pi * std::exp(-0.5 * d * d) *
         (std::log(price / p.strike) / (p.sigma * tau * sqrt_tau) - drift / (p.sigma * sqrt_tau));
}

/// (d delta / dS) * dS/dt
[[nodiscard]] inline double delta_price_partial_flow(double price, double tau, double dS_dt,
                                                     const ModelParams& p) {
  const double d = d1(price, tau, p);
  return kInvSqrt2Pi * std::exp(-0.5 * d * d) * (2.0 / (p.sigma * std::sqrt(tau) * price)) * dS_dt;
}

/// Total time derivative of the straddle delta along a price path with slope dS_dt.
[[nodiscard]] inline double delta_total_derivative(double price, double tau, double dS_dt,
                                                   const ModelParams& p) {
  return delta_price_partial_flow(price, tau, dS_dt, p) + delta_time_partial(price, tau, p);
}

/// Price change from excess demand Q: dS = E Q S.
[[nodiscard]] inline double price_impact(double demand, double price, const ModelParams& p) {
  detail::require_price(price);
  return p.elasticity * demand * price;
}

/// Denominator of the physical feedback ODE:
///   sigma sqrt(2 pi tau) / (E n) * exp(d1^2 / 2) + 2.
/// Zero marks the singular (unstable price) regime, reachable only for n < 0.
[[nodiscard]] inline double rhs_denominator(double price, double tau, const ModelParams& p) {
  if (!p.has_hedging_force()) throw NoHedgingForce("rhs_denominator needs position != 0 and elasticity > 0");
  const double d = d1(price, tau, p);
  const double en = p.elasticity * p.position;
  return p.sigma * std::sqrt(2.0 * std::numbers::pi * tau) / en * std::exp(0.5 * d * d) + 2.0;
}

/// Price velocity dS/dt under full (time + price) delta-hedging feedback.
/// Returns 0 when there is no hedging force. Throws SingularityError when the
/// denominator is zero.
[[nodiscard]] inline double price_rhs(double price, double tau, const ModelParams& p) {
  detail::require_price(price);
  detail::require_tau(tau);
  if (!p.has_hedging_force()) return 0.0;
  const double den = rhs_denominator(price, tau, p);
  if (den == 0.0 || !std::isfinite(den)) throw SingularityError("feedback denominator vanished", den);
  const double drift = p.mu + 0.5 * p.sigma * p.sigma;
  return price * (drift - std::log(price / p.strike) / tau) / den;
}

[[nodiscard]] inline CoordinateMap coordinate_map(const ModelParams& p) {
  return {p.strike, p.sigma, p.horizon};
}

/// alpha = (mu + sigma^2/2) sqrt(t0) / sigma,  beta = n E / sqrt(2 pi sigma^2 t0).
[[nodiscard]] inline DimensionlessParams to_dimensionless(const ModelParams& p) {
  p.validate();
  DimensionlessParams dp;
  dp.alpha = (p.mu + 0.5 * p.sigma * p.sigma) * std::sqrt(p.horizon) / p.sigma;
  dp.beta = p.position * p.elasticity / std::sqrt(2.0 * std::numbers::pi * p.sigma * p.sigma * p.horizon);
  dp.coords = coordinate_map(p);
  return dp;
}

/// Elasticity that realizes a target beta for a given (nonzero) position.
[[nodiscard]] inline double elasticity_for_beta(double beta, const ModelParams& p) {
  if (p.position == 0.0) throw NoHedgingForce("position must be nonzero to realize beta");
  return beta * std::sqrt(2.0 * std::numbers::pi * p.sigma * p.sigma * p.horizon) / p.position;
}

[[nodiscard]] inline StatePoint map_state(double price, double time, const ModelParams& p) {
  detail::require_price(price);
  const CoordinateMap m = coordinate_map(p);
  return {time, price, p.horizon - time, m.z(price), m.s(time)};
}

[[nodiscard]] inline StatePoint unmap_state(double z, double s, const ModelParams& p) {
  const CoordinateMap m = coordinate_map(p);
  const double time = m.time(s);
  return {time, m.price(z), p.horizon - time, z, s};
}

/// Denominator of dz/ds in dimensionless form: sqrt(1-s)/beta * exp(d1^2/2) + 2.
[[nodiscard]] inline double dimensionless_denominator(double z, double s, const DimensionlessParams& dp) {
  if (dp.beta == 0.0) throw NoHedgingForce("dimensionless denominator needs beta != 0");
  const double d = d1_dimensionless(z, s, dp.alpha);
  return std::sqrt(1.0 - s) / dp.beta * std::exp(0.5 * d * d) + 2.0;
}

}  // namespace pinning
