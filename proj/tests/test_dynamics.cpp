#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pinning/dynamics.hpp"

using namespace pinning;

namespace {

constexpr double kOpen = 498.34;

DimensionlessParams raw(double alpha, double beta) {
  DimensionlessParams dp;
  dp.alpha = alpha;
  dp.beta = beta;
  return dp;
}

DimensionlessParams default_dp(double beta) {
  DimensionlessParams dp = to_dimensionless(ModelParams{});
  dp.beta = beta;
  return dp;
}

OdeConfig default_config(const DimensionlessParams& dp) {
  OdeConfig cfg;
  cfg.z_start = dp.coords.z(kOpen);
  return cfg;
}

}  // namespace

TEST(RhsCorrected, VanishesOnNumeratorRoot) {
  const DimensionlessParams dp = raw(0.03, 2.0);
  for (double s : {0.0, 0.4, 0.9}) EXPECT_NEAR(rhs_corrected(dp.alpha * (1.0 - s), s, dp), 0.0, 1e-17);
}

TEST(RhsCorrected, LargeBetaReducesToLimit) {
  const DimensionlessParams dp = raw(0.010455, 1e12);
  for (double z : {-0.5, -0.1, 0.2}) {
    for (double s : {0.0, 0.5, 0.95}) {
      const double expected = 0.5 * (dp.alpha - z / (1.0 - s));
      EXPECT_NEAR(rhs_corrected(z, s, dp), expected, 1e-9 * std::abs(expected));
      EXPECT_DOUBLE_EQ(rhs_infinite_elasticity(z, s, dp.alpha), expected);
    }
  }
}

TEST(RhsCorrected, MatchesDirectTranscription) {
  // Frozen from a 40-digit evaluation of the expanded form.
  EXPECT_NEAR(rhs_corrected(-0.15963, 0.0, raw(0.010455, 1.0)), 0.056484337501539899, 1e-15);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uz(-1.5, 1.5), us(0.0, 0.99), ua(-0.1, 0.1), ub(0.05, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double z = uz(rng), s = us(rng), a = ua(rng), b = ub(rng);
    const double ref = static_cast<double>(oracle::rhs_corrected_direct(z, s, a, b));
    EXPECT_NEAR(rhs_corrected(z, s, raw(a, b)), ref, 1e-13 * std::abs(ref) + 1e-300);
  }
}

TEST(RhsCorrected, NoForceAndSingularity) {
  EXPECT_EQ(rhs_corrected(-0.3, 0.2, raw(0.01, 0.0)), 0.0);
  // alpha = 0, z = 0 => d1 = 0 and the denominator is sqrt(1-s)/beta + 2.
  EXPECT_THROW((void)rhs_corrected(0.0, 0.75, raw(0.0, -0.25)), SingularityError);
  EXPECT_THROW((void)rhs_corrected(0.0, 0.1, raw(0.0, -0.25)), SingularityError);
  EXPECT_NO_THROW((void)rhs_corrected(0.0, 0.9, raw(0.0, -0.25)));
  EXPECT_THROW((void)rhs_corrected(0.0, 1.0, raw(0.0, 1.0)), ExpirationReached);
}

TEST(RhsOriginal, Examples) {
  EXPECT_EQ(rhs_original(-0.3, 0.2, raw(0.01, 0.0)), 0.0);
  EXPECT_NEAR(rhs_original(0.02 * 0.6, 0.4, raw(0.02, 3.0)), 0.0, 1e-17);
  EXPECT_GT(rhs_original(-0.1, 0.5, raw(0.0, 1.0)), 0.0);
  const DimensionlessParams dp = raw(0.010455, 1.0);
  EXPECT_GT(std::abs(rhs_original(-0.15963, 0.0, dp)), std::abs(rhs_corrected(-0.15963, 0.0, dp)));
}

TEST(RhsProperties, CorrectedDominatedByOriginalForLongHedger) {
  for (double beta : {0.01, 0.1, 1.0, 10.0, 1000.0}) {
    for (double alpha : {0.0, 0.010455, 0.2}) {
      const DimensionlessParams dp = raw(alpha, beta);
      for (int i = 0; i <= 40; ++i) {
        for (int j = 0; j <= 40; ++j) {
          const double z = -1.0 + 0.05 * i;
          const double s = 0.98 * j / 40.0;
          const double c = rhs_corrected(z, s, dp);
          const double o = rhs_original(z, s, dp);
          ASSERT_LE(std::abs(c), std::abs(o)) << beta << " " << z << " " << s;
          if (c == 0.0 || o == 0.0) ASSERT_EQ(c, o);
        }
      }
    }
  }
}

TEST(RhsProperties, RestoringTowardStrike) {
  for (double beta : {0.1, 1.0, 10.0}) {
    for (double z : {-0.8, -0.2, -1e-3, 1e-3, 0.4}) {
      for (double s : {0.0, 0.5, 0.97}) {
        const double v = rhs_corrected(z, s, raw(0.0, beta));
        EXPECT_LT(v * z, 0.0) << beta << " " << z << " " << s;
      }
    }
  }
}

TEST(AnalyticLimit, InitialAndTerminalConditions) {
  EXPECT_EQ(analytic_limit(-0.2, 0.3, 0.3, 0.01), -0.2);
  EXPECT_EQ(analytic_limit(0.7, 1.0, 1.0, 0.01), 0.7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(-1.0, 1.0), us(0.0, 0.99), ua(-0.5, 0.5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(analytic_limit(uz(rng), us(rng), 1.0, ua(rng)), 0.0);
  EXPECT_THROW((void)analytic_limit(0.0, 0.5, 0.4, 0.0), std::invalid_argument);
}

TEST(AnalyticLimit, MatchesNumericalIntegrationOfLimitEquation) {
  const double alpha = 0.010455;
  const double z0 = -0.15963;
  auto f = [alpha](long double s, long double z) { return 0.5L * (alpha - z / (1.0L - s)); };
  const long double ref = oracle::rk4_solve(f, 0.0L, z0, 0.5L, 4000);
  EXPECT_NEAR(analytic_limit(z0, 0.0, 0.5, alpha), static_cast<double>(ref), 1e-8);
}

TEST(Integrate, NoForceKeepsPriceConstant) {
  const DimensionlessParams dp = default_dp(0.0);
  const Trajectory t = integrate(default_config(dp), dp);
  ASSERT_EQ(t.termination, Termination::completed);
  ASSERT_EQ(t.samples.size(), 358u);
  for (const auto& smp : t.samples) {
    EXPECT_EQ(smp.z, t.samples.front().z);
    EXPECT_NEAR(smp.price, kOpen, 1e-9);
  }
  EXPECT_DOUBLE_EQ(t.samples.back().time, 357.0);
}

TEST(Integrate, SamplesStrictlyIncreasingAndMapped) {
  const DimensionlessParams dp = default_dp(3.0);
  const Trajectory t = integrate(default_config(dp), dp);
  for (std::size_t i = 1; i < t.samples.size(); ++i) ASSERT_GT(t.samples[i].s, t.samples[i - 1].s);
  for (const auto& smp : t.samples) EXPECT_DOUBLE_EQ(smp.price, dp.coords.price(smp.z));
}

TEST(Integrate, LargeBetaFollowsAnalyticLimit) {
  const DimensionlessParams dp = default_dp(1e6);
  const OdeConfig cfg = default_config(dp);
  const Trajectory t = integrate(cfg, dp);
  ASSERT_EQ(t.termination, Termination::completed);
  const double expected = analytic_limit(cfg.z_start, 0.0, cfg.s_end, dp.alpha);
  EXPECT_NEAR(t.samples.back().z, expected, 1e-3 * std::abs(expected));
}

TEST(Integrate, InfiniteElasticityModeMatchesClosedForm) {
  const DimensionlessParams dp = default_dp(0.0);
  OdeConfig cfg = default_config(dp);
  cfg.mode = HedgeMode::infinite_elasticity;
  // The solution varies on the scale sqrt(1 - s), so the default grid is only
  // tight away from expiry; the refined grid covers the whole interval.
  for (const auto& smp : integrate(cfg, dp).samples)
    if (smp.s <= 0.9) EXPECT_NEAR(smp.z, analytic_limit(cfg.z_start, 0.0, smp.s, dp.alpha), 1e-10);
  cfg.steps *= 8;
  for (const auto& smp : integrate(cfg, dp).samples)
    EXPECT_NEAR(smp.z, analytic_limit(cfg.z_start, 0.0, smp.s, dp.alpha), 1e-10);
}

TEST(Integrate, FourthOrderSelfConvergence) {
  const DimensionlessParams dp = default_dp(1.0);
  OdeConfig cfg = default_config(dp);
  cfg.s_end = 0.9;
  auto endpoint = [&](int n) {
    cfg.steps = n;
    return integrate(cfg, dp).samples.back().z;
  };
  const double a = endpoint(40), b = endpoint(80), c = endpoint(160);
  const double order = std::log2(std::abs(a - b) / std::abs(b - c));
  EXPECT_GE(order, 3.7);
  EXPECT_LE(order, 4.3);
}

TEST(Integrate, OriginalModeMovesFurtherThanCorrected) {
  const DimensionlessParams dp = default_dp(0.5);
  OdeConfig cfg = default_config(dp);
  const Trajectory corrected = integrate(cfg, dp);
  cfg.mode = HedgeMode::original_time_term_only;
  const Trajectory original = integrate(cfg, dp);
  ASSERT_EQ(corrected.samples.size(), original.samples.size());
  for (std::size_t i = 1; i < corrected.samples.size(); ++i)
    EXPECT_LE(std::abs(original.samples[i].z), std::abs(corrected.samples[i].z) + 1e-15);
}

TEST(Integrate, SingularityBracketedByBisection) {
  // z = 0 with alpha = 0 is a fixed point; the denominator sqrt(1-s)/beta + 2
  // changes sign at s* = 1 - 4 beta^2.
  for (double beta : {-0.25, -0.1, -0.4}) {
    DimensionlessParams dp = raw(0.0, beta);
    OdeConfig cfg;
    cfg.z_start = 0.0;
    const Trajectory t = integrate(cfg, dp);
    ASSERT_EQ(t.termination, Termination::singularity_detected);
    ASSERT_TRUE(t.singular_s.has_value());
    EXPECT_NEAR(*t.singular_s, 1.0 - 4.0 * beta * beta, 1e-9);
    EXPECT_LT(t.samples.back().s, *t.singular_s);
  }
}

TEST(Integrate, NonFiniteStateRejected) {
  DimensionlessParams dp = raw(std::numeric_limits<double>::quiet_NaN(), 0.0);
  OdeConfig cfg;
  cfg.mode = HedgeMode::infinite_elasticity;
  const Trajectory t = integrate(cfg, dp);
  EXPECT_EQ(t.termination, Termination::step_rejected);
  EXPECT_EQ(t.samples.size(), 1u);
}

TEST(Integrate, InvalidConfig) {
  OdeConfig cfg;
  cfg.s_end = 1.0;
  EXPECT_THROW((void)integrate(cfg, raw(0, 1)), std::invalid_argument);
  cfg = OdeConfig{};
  cfg.steps = 0;
  EXPECT_THROW((void)integrate(cfg, raw(0, 1)), std::invalid_argument);
}

TEST(Integrate, AgreesWithPhysicalCoordinates) {
  ModelParams p;
  p.position = 1.0;
  p.elasticity = elasticity_for_beta(2.0, p);
  const DimensionlessParams dp = to_dimensionless(p);
  const OdeConfig cfg = default_config(dp);
  const Trajectory t = integrate(cfg, dp);

  double price = kOpen;
  for (int k = 0; k < cfg.steps; ++k) {
    const double time = static_cast<double>(k);
    price = rk4_step([&](double tt, double ss) { return price_rhs(ss, p.horizon - tt, p); }, time, price, 1.0);
    const auto& smp = t.samples[static_cast<std::size_t>(k) + 1];
    ASSERT_NEAR(smp.price, price, 1e-6 * price) << "t=" << time + 1.0;
  }
}

TEST(HedgeFractionSeries, PinnedAtStrike) {
  ModelParams p;
  p.mu = -0.5 * p.sigma * p.sigma;
  p.position = 1.0;
  const DimensionlessParams dp = to_dimensionless(p);
  EXPECT_EQ(dp.alpha, 0.0);
  OdeConfig cfg;
  const Trajectory t = integrate(cfg, dp);
  const HedgeSeries h = hedge_fraction_series(t, dp, p);
  ASSERT_EQ(h.size(), t.samples.size());
  for (const auto& r : h) EXPECT_EQ(r.cdf_d1, 0.5);
}

TEST(HedgeFractionSeries, FixedPriceBelowStrikeLosesCallProbability) {
  ModelParams p;
  p.position = 1.0;
  const DimensionlessParams dp = to_dimensionless(p);
  const Trajectory t = integrate(default_config(dp), dp);
  const HedgeSeries h = hedge_fraction_series(t, dp, p);
  ASSERT_EQ(h.size(), t.samples.size());
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i].cdf_d1, h[i - 1].cdf_d1);
}
