#include <cmath>

#include <gtest/gtest.h>

#include "alpharnn/diagnostics.hpp"
#include "alpharnn/synthetic.hpp"

using namespace arnn;

namespace {

double variance(const Vector& v) { return (v.array() - v.mean()).square().mean(); }

}  // namespace

TEST(Llm, ZeroNoiseIsZero) {
  LlmConfig cfg;
  cfg.sigma_u2 = cfg.sigma_chi2 = cfg.sigma_omega2 = 0.0;
  cfg.n = 500;
  const LlmSeries s = generate_llm(cfg);
  EXPECT_EQ(s.y, Vector::Zero(500));
}

TEST(Llm, SeasonalIdentity) {
  LlmConfig cfg;
  cfg.seed = 1;
  const LlmSeries s = generate_llm(cfg);
  const Eigen::Index p = cfg.period;
  // Sum over any p consecutive seasonal states is the newest omega draw.
  Vector sums(s.seasonal.size() - p + 1);
  for (Eigen::Index t = 0; t < sums.size(); ++t) sums(t) = s.seasonal.segment(t, p).sum();
  const Vector& omega = sums;
  EXPECT_NEAR(omega.mean(), 0.0, 4.0 / std::sqrt(double(omega.size())));
  EXPECT_NEAR(variance(omega), cfg.sigma_omega2, 0.1);

  cfg.sigma_omega2 = 0.0;
  const LlmSeries fixed = generate_llm(cfg);
  for (Eigen::Index t = 0; t + p <= fixed.seasonal.size(); t += 13)
    EXPECT_NEAR(fixed.seasonal.segment(t, p).sum(), 0.0, 1e-9);
}

TEST(Llm, ComponentVariances) {
  LlmConfig cfg;
  cfg.seed = 2;
  cfg.n = 20000;
  const LlmSeries s = generate_llm(cfg);
  const Vector steps = s.level.tail(cfg.n - 1) - s.level.head(cfg.n - 1);
  EXPECT_NEAR(variance(steps), cfg.sigma_chi2, 0.05);
  const Vector noise = s.y - s.level - s.seasonal;
  EXPECT_NEAR(variance(noise), cfg.sigma_u2, 15.0);
}

TEST(Llm, Determinism) {
  LlmConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(generate_llm(cfg).y, generate_llm(cfg).y);
  LlmConfig other = cfg;
  other.seed = 4;
  EXPECT_NE(generate_llm(cfg).y, generate_llm(other).y);
}

TEST(Llm, RawSeriesLooksNonStationaryAndSeasonal) {
  int unit_root = 0, seasonal_lag = 0;
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    LlmConfig cfg;
    cfg.seed = seed;
    const Vector y = generate_llm(cfg).y;
    unit_root += !adf_test(y, adf_default_max_lag(y.size())).reject(0.05);
    seasonal_lag += pacf(y, 30).significant(24);
  }
  EXPECT_GE(unit_root, 3);
  EXPECT_GE(seasonal_lag, 3);
}

TEST(Llm, ConfigChecks) {
  LlmConfig cfg;
  cfg.n = 24;
  EXPECT_THROW(generate_llm(cfg), UsageError);
  cfg.n = 100;
  cfg.sigma_u2 = -1.0;
  EXPECT_THROW(generate_llm(cfg), UsageError);
}

TEST(AlphaRnnDgp, NoNoiseIsZero) {
  AlphaRnnDgpConfig cfg;
  cfg.sigma_n = 0.0;
  cfg.n = 200;
  EXPECT_EQ(generate_alpha_rnn(cfg), Vector::Zero(200));
}

TEST(AlphaRnnDgp, DeterminismAndChecks) {
  AlphaRnnDgpConfig cfg;
  cfg.n = 500;
  cfg.alpha = 0.4;
  cfg.seed = 5;
  EXPECT_EQ(generate_alpha_rnn(cfg), generate_alpha_rnn(cfg));
  const CellParams c = alpha_rnn_dgp_cell(cfg);
  EXPECT_NEAR(c.alpha(), 0.4, 1e-12);
  EXPECT_EQ(c.readout, Readout::Unsmoothed);
  cfg.alpha = 0.0;
  EXPECT_THROW(generate_alpha_rnn(cfg), UsageError);
  cfg.alpha = 1.5;
  EXPECT_THROW(generate_alpha_rnn(cfg), UsageError);
}

TEST(AlphaRnnDgp, AlphaOneIsExactlyUnity) {
  AlphaRnnDgpConfig cfg;
  EXPECT_EQ(alpha_rnn_dgp_cell(cfg).alpha(), 1.0);
}

TEST(Ar1, StationaryVariance) {
  const Vector y = generate_ar1(0.7, 2.0, 100000, 6);
  EXPECT_NEAR(variance(y), 4.0 / (1.0 - 0.49), 0.2);
  EXPECT_EQ(y, generate_ar1(0.7, 2.0, 100000, 6));
}
