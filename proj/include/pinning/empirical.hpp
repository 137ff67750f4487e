#pragma once

// Intraday price ingestion and the hedge-flow diagnostic: given observed
// prices, how much stock would a straddle holder's delta hedge require, and
// was that hedge buying or selling while the price moved?

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinning/errors.hpp"
#include "pinning/format.hpp"
#include "pinning/hedge_series.hpp"
#include "pinning/model.hpp"

namespace pinning {

enum class PathSource { ingested, simulated };

struct PricePoint {
  double time = 0.0;   // minutes from session start
  double price = 0.0;  // dollars
};

struct PricePath {
  std::vector<PricePoint> points;
  PathSource source = PathSource::ingested;

  void validate() const {
    if (points.size() < 2) throw InputError("price path needs at least 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].price > 0.0) || !std::isfinite(points[i].price)) throw InputError("prices must be > 0");
      if (!std::isfinite(points[i].time)) throw InputError("times must be finite");
      if (i > 0 && !(points[i].time > points[i - 1].time)) throw InputError("times must be strictly increasing");
    }
  }

  [[nodiscard]] std::vector<double> times() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.time);
    return out;
  }

  [[nodiscard]] std::vector<double> prices() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.price);
    return out;
  }
};

inline constexpr std::string_view kPriceCsvHeader = "t_min,price";
inline constexpr std::string_view kHedgeCsvHeader = "t_min,price,d1,N_d1,delta,hedge_position,hedge_flow";

/// Parses "t_min,price" CSV. Blank lines are ignored; CRLF line endings and a
/// UTF-8 byte-order mark are accepted. Errors carry the 1-based line number.
[[nodiscard]] inline PricePath ingest_csv(std::istream& in) {
  PricePath path;
  path.source = PathSource::ingested;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (!header_seen) {
      std::string compact;
      for (char c : view)
        if (c != ' ' && c != '\t') compact.push_back(c);
      if (compact != kPriceCsvHeader) throw InputError("expected header \"t_min,price\"", line_no);
      header_seen = true;
      continue;
    }

    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
      throw InputError("expected 2 fields", line_no);
    PricePoint pt;
    if (!parse_number(view.substr(0, comma), pt.time) || !std::isfinite(pt.time))
      throw InputError("bad t_min value", line_no);
    if (!parse_number(view.substr(comma + 1), pt.price) || !std::isfinite(pt.price))
      throw InputError("bad price value", line_no);
    if (!(pt.price > 0.0)) throw InputError("price must be > 0", line_no);
    if (!path.points.empty() && !(pt.time > path.points.back().time))
      throw InputError("t_min not strictly increasing", line_no);
    path.points.push_back(pt);
  }
  if (!header_seen) throw InputError("empty input");
  if (path.points.size() < 2) throw InputError("price path needs at least 2 points");
  return path;
}

[[nodiscard]] inline PricePath ingest_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ingest_csv(in);
}

inline void emit_csv(const PricePath& path, std::ostream& out) {
  out << kPriceCsvHeader << '\n';
  for (const auto& p : path.points) out << format_number(p.time) << ',' << format_number(p.price) << '\n';
}

/// Hedge requirement along an observed path. Every point must precede expiration.
[[nodiscard]] inline HedgeSeries compute_hedge_series(const PricePath& path, const ModelParams& params) {
  path.validate();
  params.validate();
  const auto t = path.times();
  const auto s = path.prices();
  return build_hedge_series(t, s, params);
}

inline void emit_hedge_csv(const HedgeSeries& series, std::ostream& out) {
  out << kHedgeCsvHeader << '\n';
  for (const auto& r : series) {
    out << format_number(r.time) << ',' << format_number(r.price) << ',' << format_number(r.d1) << ','
        << format_number(r.cdf_d1) << ',' << format_number(r.straddle_delta) << ','
        << format_number(r.hedge_position) << ',';
    if (r.hedge_flow) out << format_number(*r.hedge_flow);
    out << '\n';
  }
}

enum class FlowClass { buy, sell, flat };
enum class Direction { up, down, flat };

[[nodiscard]] constexpr std::string_view to_string(FlowClass c) noexcept {
  switch (c) {
    case FlowClass::buy: return "BUY";
    case FlowClass::sell: return "SELL";
    case FlowClass::flat: return "FLAT";
  }
  return "?";
}

[[nodiscard]] constexpr std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::up: return "UP";
    case Direction::down: return "DOWN";
    case Direction::flat: return "FLAT";
  }
  return "?";
}

struct FlowWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct FlowDiagnostic {
  FlowWindow window{};
  double net_flow = 0.0;      // hedge_position(t_hi) - hedge_position(t_lo), shares
  double price_change = 0.0;  // price(t_hi) - price(t_lo)
  FlowClass classification = FlowClass::flat;
  Direction price_direction = Direction::flat;
  bool opposes_move = false;
};

/// Net hedge flow and price move between the first and last series points
/// inside [t_lo, t_hi]. `flow_epsilon < 0` selects the default dead-band
/// 1e-6 |n|, which requires passing the position via `position`.
[[nodiscard]] inline FlowDiagnostic classify_flow(const HedgeSeries& series, FlowWindow window,
                                                  double position, double flow_epsilon = -1.0) {
  if (!(window.t_lo <= window.t_hi)) throw std::invalid_argument("window needs t_lo <= t_hi");
  const HedgeRecord* first = nullptr;
  const HedgeRecord* last = nullptr;
  for (const auto& r : series) {
    if (r.time < window.t_lo || r.time > window.t_hi) continue;
    if (first == nullptr) first = &r;
    last = &r;
  }
  if (first == nullptr || first == last) throw std::invalid_argument("window contains fewer than 2 points");

  const double eps = flow_epsilon >= 0.0 ? flow_epsilon : 1e-6 * std::abs(position);
  const double price_eps = 1e-9 * first->price;

  FlowDiagnostic d;
  d.window = window;
  d.net_flow = last->hedge_position - first->hedge_position;
  d.price_change = last->price - first->price;
  d.classification = d.net_flow > eps ? FlowClass::buy : d.net_flow < -eps ? FlowClass::sell : FlowClass::flat;
  d.price_direction =
      d.price_change > price_eps ? Direction::up : d.price_change < -price_eps ? Direction::down : Direction::flat;
  d.opposes_move = (d.classification == FlowClass::sell && d.price_direction == Direction::up) ||
                   (d.classification == FlowClass::buy && d.price_direction == Direction::down);
  return d;
}

/// Standard deviation of log returns normalized to one minute,
/// r_i = ln(S_i / S_{i-1}) / sqrt(t_i - t_{i-1}); unbiased (n-1) estimator.
[[nodiscard]] inline double realized_volatility(const PricePath& path) {
  if (path.points.size() < 3) throw InputError("realized volatility needs at least 3 points");
  path.validate();
  std::vector<double> r;
  r.reserve(path.points.size() - 1);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const double dt = path.points[i].time - path.points[i - 1].time;
    r.push_back(std::log(path.points[i].price / path.points[i - 1].price) / std::sqrt(dt));
  }
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(r.size() - 1));
}

}  // namespace pinning
