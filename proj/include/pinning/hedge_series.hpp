#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinning/model.hpp"

namespace pinning {

struct HedgeRecord {
  double time = 0.0;
  double price = 0.0;
  double d1 = 0.0;
  double cdf_d1 = 0.0;          // N(d1)
  double straddle_delta = 0.0;  // 2 N(d1) - 1
  double hedge_position = 0.0;  // -n * delta, shares per straddle unit
  std::optional<double> hedge_flow;  // backward difference, shares per minute; absent on the first record
};

using HedgeSeries = std::vector<HedgeRecord>;

/// Evaluates the hedge requirement at each (time, price) sample. Times must be
/// strictly increasing and strictly before expiration.
[[nodiscard]] inline HedgeSeries build_hedge_series(std::span<const double> times,
                                                    std::span<const double> prices,
                                                    const ModelParams& p) {
  if (times.size() != prices.size()) throw std::invalid_argument("times and prices differ in length");
  HedgeSeries out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double tau = p.horizon - times[i];
    if (!(tau > 0.0)) throw ExpirationReached("sample at or beyond expiration");
    HedgeRecord r;
    r.time = times[i];
    r.price = prices[i];
    r.d1 = d1(prices[i], tau, p);
    r.cdf_d1 = normal_cdf(r.d1);
    r.straddle_delta = 2.0 * r.cdf_d1 - 1.0;
    r.hedge_position = -p.position * r.straddle_delta;
    if (!out.empty()) {
      const HedgeRecord& prev = out.back();
      const double dt = r.time - prev.time;
      if (!(dt > 0.0)) throw std::invalid_argument("sample times must be strictly increasing");
      r.hedge_flow = (r.hedge_position - prev.hedge_position) / dt;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace pinning
