#pragma once

// Noisy hedging dynamics and Monte Carlo pin-probability estimation.
//
// Exogenous trading enters as dS/S = sigma_noise dW, which in the
// dimensionless coordinates becomes rho dW with rho = sigma_noise / sigma:
//
//   z_{k+1} = z_k + rhs_corrected(z_k, s_k) h + rho sqrt(h) xi_k.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pinning/dynamics.hpp"
#include "pinning/statistics.hpp"

namespace pinning {

struct NoiseConfig {
  double noise_ratio = 1.0;  // rho
  std::uint64_t seed = 42;
  std::uint64_t runs = 5000;

  void validate() const {
    if (!(noise_ratio >= 0.0) || !std::isfinite(noise_ratio)) throw std::invalid_argument("noise_ratio must be >= 0");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  }
};

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of run `run_index`'s private stream: splitmix64(seed ^ splitmix64(run_index)).
/// A run's draws depend only on (seed, run_index), never on scheduling.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run_index) noexcept {
  return splitmix64(seed ^ splitmix64(run_index));
}

/// Euler-Maruyama path of the corrected dynamics. Terminates early, as in
/// `integrate`, if the feedback denominator changes sign between grid points.
[[nodiscard]] inline Trajectory simulate_noisy_path(const OdeConfig& cfg, const DimensionlessParams& dp,
                                                    const NoiseConfig& noise, std::uint64_t run_index) {
  cfg.validate();
  noise.validate();
  if (cfg.mode != HedgeMode::corrected) throw std::invalid_argument("noisy paths use the corrected dynamics");

  std::mt19937_64 rng(stream_seed(noise.seed, run_index));
  std::normal_distribution<double> normal(0.0, 1.0);

  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  auto push = [&](double s, double z) {
    traj.samples.push_back({s, z, dp.coords.time(s), dp.coords.price(z)});
  };

  double z = cfg.z_start;
  double s = cfg.s_start;
  push(s, z);
  detail::RhsEval e = detail::evaluate(HedgeMode::corrected, z, s, dp);
  if (e.denominator == 0.0 || std::isnan(e.denominator)) {
    traj.termination = Termination::singularity_detected;
    traj.singular_s = s;
    return traj;
  }
  const bool positive = e.denominator > 0.0;

  for (int k = 0; k < cfg.steps; ++k) {
    const double s_next = cfg.grid(k + 1);
    const double h = s_next - s;
    const double z_next = z + e.value * h + noise.noise_ratio * std::sqrt(h) * normal(rng);
    if (!std::isfinite(z_next)) {
      traj.termination = Termination::step_rejected;
      return traj;
    }
    e = detail::evaluate(HedgeMode::corrected, z_next, s_next, dp);
    if (!detail::same_side(e.denominator, positive)) {
      traj.termination = Termination::singularity_detected;
      traj.singular_s = 0.5 * (s + s_next);
      return traj;
    }
    z = z_next;
    s = s_next;
    push(s, z);
  }
  return traj;
}

struct EnsembleStats {
  std::vector<double> closing_prices;  // final sample price of each run, by run index
  std::vector<Termination> terminations;
  std::uint64_t runs = 0;
  std::uint64_t pin_count = 0;
  std::uint64_t singular_count = 0;
  std::uint64_t rejected_count = 0;
  double pin_probability = 0.0;
  Interval wilson{};
  double pin_tolerance = 0.0;
};

/// Runs `noise.runs` independent paths. A path pins when it completes and its
/// closing price lies within `pin_tolerance` of the strike. `threads == 0`
/// uses the hardware concurrency; results do not depend on the thread count.
[[nodiscard]] inline EnsembleStats run_ensemble(const OdeConfig& cfg, const DimensionlessParams& dp,
                                                const NoiseConfig& noise, double pin_tolerance,
                                                unsigned threads = 0) {
  cfg.validate();
  noise.validate();
  if (!(pin_tolerance >= 0.0)) throw std::invalid_argument("pin_tolerance must be >= 0");

  const std::uint64_t runs = noise.runs;
  EnsembleStats st;
  st.runs = runs;
  st.pin_tolerance = pin_tolerance;
  st.closing_prices.assign(runs, 0.0);
  st.terminations.assign(runs, Termination::completed);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::uint64_t i = next++; i < runs && !failed; i = next++) {
        const Trajectory t = simulate_noisy_path(cfg, dp, noise, i);
        st.closing_prices[i] = t.samples.back().price;
        st.terminations[i] = t.termination;
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, runs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const double strike = dp.coords.strike;
  for (std::uint64_t i = 0; i < runs; ++i) {
    switch (st.terminations[i]) {
      case Termination::completed:
        if (std::abs(st.closing_prices[i] - strike) <= pin_tolerance) ++st.pin_count;
        break;
      case Termination::singularity_detected: ++st.singular_count; break;
      case Termination::step_rejected: ++st.rejected_count; break;
    }
  }
  st.pin_probability = static_cast<double>(st.pin_count) / static_cast<double>(runs);
  st.wilson = wilson_interval(st.pin_count, runs);
  return st;
}

struct SweepRow {
  double beta = 0.0;
  double noise_ratio = 0.0;
  std::optional<EnsembleStats> stats;
  std::string error;  // set when the cell failed
};

/// One ensemble per (beta, rho) cell, beta-major. Each cell reuses `noise.seed`,
/// so a cell equals a standalone run_ensemble with the same inputs. A failing
/// cell records its error and the sweep continues.
[[nodiscard]] inline std::vector<SweepRow> pin_probability_sweep(std::span<const double> betas,
                                                                 std::span<const double> noise_ratios,
                                                                 const OdeConfig& cfg,
                                                                 const DimensionlessParams& base,
                                                                 const NoiseConfig& noise, double pin_tolerance,
                                                                 unsigned threads = 0) {
  std::vector<SweepRow> rows;
  rows.reserve(betas.size() * noise_ratios.size());
  for (double beta : betas) {
    for (double rho : noise_ratios) {
      SweepRow row{beta, rho, std::nullopt, {}};
      try {
        DimensionlessParams dp = base;
        dp.beta = beta;
        NoiseConfig nc = noise;
        nc.noise_ratio = rho;
        row.stats = run_ensemble(cfg, dp, nc, pin_tolerance, threads);
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace pinning
