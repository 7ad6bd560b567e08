#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "alpharnn/diagnostics.hpp"
#include "alpharnn/synthetic.hpp"
#include "oracles.hpp"

using namespace arnn;

namespace {

Vector white_noise(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (Eigen::Index t = 0; t < n; ++t) v(t) = rng.normal();
  return v;
}

Vector random_walk(Eigen::Index n, std::uint64_t seed) {
  Vector v = white_noise(n, seed);
  for (Eigen::Index t = 1; t < n; ++t) v(t) += v(t - 1);
  return v;
}

}  // namespace

// --- ACF / PACF ------------------------------------------------------------

TEST(Acf, Basics) {
  const Vector y = oracle::arma_series(300, 0.4, 0.1, 0.3, 1);
  const Vector a = acf(y, 10);
  EXPECT_EQ(a(0), 1.0);
  for (Eigen::Index j = 1; j <= 10; ++j) EXPECT_NEAR(a(j), oracle::acf_at(y, j), 1e-12);
  EXPECT_THROW(acf(Vector::Constant(50, 2.0), 5), DegenerateError);
  EXPECT_THROW(acf(y, 300), UsageError);
}

TEST(Acf, WhiteNoiseInsideBand) {
  const Vector y = white_noise(10000, 2);
  const Vector a = acf(y, 40);
  int inside = 0;
  for (Eigen::Index j = 1; j <= 40; ++j) inside += std::abs(a(j)) < 1.96 / 100.0;
  EXPECT_GE(inside, 34);  // ~95% of 40 with slack for sampling
}

TEST(Acf, ArOneLagOne) {
  const Vector y = generate_ar1(0.5, 1.0, 100000, 3);
  EXPECT_NEAR(acf(y, 1)(1), 0.5, 0.02);
}

TEST(Pacf, MatchesRegressionOracle) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Vector y = oracle::arma_series(400, 0.5, -0.2, 0.4, seed);
    const PacfResult r = pacf(y, 12);
    for (Eigen::Index h = 1; h <= 12; ++h)
      EXPECT_NEAR(r.estimates(h - 1), oracle::regression_pacf(y, h), 1e-6);
  }
}

TEST(Pacf, LagOneEqualsAcfAndBounded) {
  const Vector y = oracle::arma_series(500, 0.9, -0.5, 0.8, 7);
  const PacfResult r = pacf(y, 20);
  EXPECT_NEAR(r.estimates(0), acf(y, 1)(1), 1e-14);
  EXPECT_LE(r.estimates.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(r.band, 1.96 / std::sqrt(500.0));
  EXPECT_EQ(r.n, 500);
  ASSERT_EQ(r.lags.size(), 20u);
  EXPECT_EQ(r.lags.front(), 1);
}

TEST(Pacf, ArOneSignature) {
  for (double phi : {0.5, -0.5}) {
    const Vector y = generate_ar1(phi, 1.0, 20000, 8);
    const PacfResult r = pacf(y, 10);
    EXPECT_NEAR(r.estimates(0), phi, 0.03);
    int outside = 0;
    for (Eigen::Index h = 2; h <= 10; ++h) outside += r.significant(h);
    EXPECT_LE(outside, 2);
  }
}

TEST(Pacf, AlphaRnnCutoff) {
  // With a long series the lag > 3 estimates collapse toward zero for alpha = 1.
  AlphaRnnDgpConfig cfg;
  cfg.n = 100000;
  cfg.seed = 9;
  cfg.alpha = 1.0;
  const PacfResult cut = pacf(generate_alpha_rnn(cfg), 10);
  for (Eigen::Index h = 1; h <= 3; ++h) EXPECT_TRUE(cut.significant(h)) << h;
  for (Eigen::Index h = 4; h <= 10; ++h) EXPECT_LT(std::abs(cut.estimates(h - 1)), 0.01) << h;

  cfg.alpha = 0.25;
  const PacfResult mem = pacf(generate_alpha_rnn(cfg), 10);
  int beyond = 0;
  for (Eigen::Index h = 4; h <= 10; ++h) beyond += mem.significant(h);
  EXPECT_GT(beyond, 0);
}

TEST(Pacf, Errors) {
  EXPECT_THROW(pacf(Vector::Zero(30), 3), DegenerateError);
  EXPECT_THROW(pacf(white_noise(10, 1), 9), UsageError);
}

TEST(Pacf, CorrelogramCsv) {
  std::ostringstream os;
  write_correlogram_csv(os, {1, 2}, (Vector(2) << 0.5, -0.25).finished(), 0.1);
  EXPECT_EQ(os.str().substr(0, 19), "lag,estimate,band\n1");
  EXPECT_NE(os.str().find("2,-0.25,0.1"), std::string::npos);
}

// --- OLS and ADF -----------------------------------------------------------

TEST(Ols, CoefficientsAndStandardErrors) {
  Rng rng(10);
  Matrix X(200, 3);
  X.col(0).setOnes();
  X.col(1) = rng.normal_matrix(200, 1);
  X.col(2) = rng.normal_matrix(200, 1);
  const Vector beta = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Vector y = X * beta + 0.1 * rng.normal_matrix(200, 1);
  const OlsResult r = ols(X, y);
  const Vector expected = (X.transpose() * X).inverse() * X.transpose() * y;
  EXPECT_LT((r.coefficients - expected).cwiseAbs().maxCoeff(), 1e-12);
  const double s2 = r.rss / (200 - 3);
  const Vector se = ((X.transpose() * X).inverse().diagonal() * s2).cwiseSqrt();
  EXPECT_LT((r.std_errors - se).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.residuals.squaredNorm(), r.rss, 1e-12);

  Matrix singular = X;
  singular.col(2) = 2.0 * singular.col(1);
  EXPECT_THROW(ols(singular, y), DegenerateError);
}

TEST(Adf, RandomWalkVersusNoise) {
  int walk_kept = 0, noise_rejected = 0;
  for (int k = 0; k < 20; ++k) {
    const int lags = adf_default_max_lag(2000);
    walk_kept += !adf_test(random_walk(2000, 100 + k), lags).reject(0.05);
    noise_rejected += adf_test(white_noise(2000, 200 + k), lags).reject(0.01);
  }
  EXPECT_GE(walk_kept, 16);
  EXPECT_EQ(noise_rejected, 20);
}

TEST(Adf, ShiftInvariance) {
  const Vector y = oracle::arma_series(800, 0.7, 0.0, 0.2, 11);
  const AdfResult a = adf_test(y, 8);
  const AdfResult b = adf_test((y.array() + 1234.5).matrix(), 8);
  EXPECT_NEAR(a.statistic, b.statistic, 1e-8);
  EXPECT_EQ(a.lags, b.lags);
}

TEST(Adf, DecisionsMonotone) {
  for (int k = 0; k < 10; ++k) {
    const AdfResult r = adf_test(oracle::arma_series(300, 0.9, 0.05, 0.0, 20 + k), 5);
    if (r.reject(0.01)) {
      EXPECT_TRUE(r.reject(0.05));
    }
    if (r.reject(0.05)) {
      EXPECT_TRUE(r.reject(0.10));
    }
    EXPECT_EQ(r.stationary(), r.reject(0.05));
    EXPECT_LE(r.lags, 5);
    EXPECT_GE(r.lags, 0);
  }
}

TEST(Adf, DefaultLagAndErrors) {
  EXPECT_EQ(adf_default_max_lag(100), 12);
  EXPECT_EQ(adf_default_max_lag(1600), 24);
  EXPECT_THROW(adf_test(white_noise(15, 1), 10), UsageError);
  EXPECT_THROW(adf_test(Vector::Constant(100, 1.0), 2), DegenerateError);
}

// --- decomposition ---------------------------------------------------------

TEST(Decompose, PureSinusoid) {
  const Eigen::Index s = 24, n = 24 * 20;
  Vector y(n);
  for (Eigen::Index t = 0; t < n; ++t) y(t) = 3.0 * std::sin(2.0 * M_PI * double(t) / double(s));
  const Decomposition d = decompose(y, s);
  EXPECT_LT(d.residual.segment(d.defined_begin, d.defined_end - d.defined_begin).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Decompose, AdditiveAndZeroSum) {
  LlmConfig cfg;
  cfg.n = 2000;
  cfg.seed = 12;
  const Vector y = generate_llm(cfg).y;
  for (Eigen::Index s : {7, 24}) {
    const Decomposition d = decompose(y, s);
    EXPECT_LT((d.trend + d.seasonal + d.residual - y).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index t = 0; t + s <= y.size(); t += 97)
      EXPECT_NEAR(d.seasonal.segment(t, s).sum(), 0.0, 1e-10);
    const Decomposition shifted = decompose((y.array() + 42.0).matrix(), s);
    EXPECT_LT((shifted.trend.array() - 42.0 - d.trend.array()).abs().maxCoeff(), 1e-9);
    EXPECT_LT((shifted.seasonal - d.seasonal).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Decompose, EndpointsCopyNearestTrend) {
  const Vector y = random_walk(100, 13);
  const Decomposition d = decompose(y, 12);
  EXPECT_EQ(d.defined_begin, 6);
  EXPECT_EQ(d.defined_end, 94);
  for (Eigen::Index t = 0; t < 6; ++t) EXPECT_EQ(d.trend(t), d.trend(6));
  for (Eigen::Index t = 94; t < 100; ++t) EXPECT_EQ(d.trend(t), d.trend(93));
}

TEST(Decompose, Errors) {
  EXPECT_THROW(decompose(white_noise(100, 1), 1), UsageError);
  EXPECT_THROW(decompose(white_noise(30, 1), 24), UsageError);
}

TEST(Decompose, LlmResidualWeakensSeasonalLag) {
  // The raw series carries a strong lag-24 partial autocorrelation. The
  // classical decomposition removes a fixed seasonal pattern, so the
  // stochastic part of the seasonal state leaves a smaller spike behind.
  LlmConfig cfg;
  cfg.seed = 14;
  const LlmSeries s = generate_llm(cfg);
  const PacfResult raw = pacf(s.y, 30);
  const PacfResult res = pacf(decompose(s.y, 24).residual, 30);
  EXPECT_TRUE(raw.significant(24));
  EXPECT_LT(std::abs(res.estimates(23)), std::abs(raw.estimates(23)));
}

// --- AR baseline -----------------------------------------------------------

TEST(Ar, RecoversArTwo) {
  const Vector y = oracle::arma_series(20000, 0.5, 0.3, 0.0, 15) * 0.01;
  const ArModel m = ar_fit(y, 2);
  EXPECT_NEAR(m.coefficients(0), 0.5, 0.02);
  EXPECT_NEAR(m.coefficients(1), 0.3, 0.02);
  EXPECT_EQ(m.order(), 2);
}

TEST(Ar, InterceptOnly) {
  const Vector y = white_noise(200, 16).array() + 5.0;
  const ArModel m = ar_fit(y, 0);
  EXPECT_NEAR(m.intercept, y.tail(199).mean(), 1e-12);
  const Vector f = ar_forecast(m, y.head(10), 3, true);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_EQ(f(k), m.intercept);
}

TEST(Ar, RollingClosedForm) {
  ArModel m;
  m.intercept = 0.4;
  m.coefficients = Vector::Constant(1, 0.8);
  const Vector history = (Vector(2) << 1.0, 2.5).finished();
  const Vector f = ar_forecast(m, history, 6, true);
  for (Eigen::Index k = 1; k <= 6; ++k) {
    double geometric = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) geometric += std::pow(0.8, double(j));
    EXPECT_NEAR(f(k - 1), std::pow(0.8, double(k)) * 2.5 + 0.4 * geometric, 1e-10);
  }
}

TEST(Ar, DirectHorizonAndErrors) {
  const Vector y = generate_ar1(0.7, 1.0, 5000, 17);
  const ArModel m3 = ar_fit(y, 1, 3);
  EXPECT_NEAR(m3.coefficients(0), std::pow(0.7, 3), 0.04);
  const Vector f = ar_forecast(m3, y.head(5), 3, false);
  ASSERT_EQ(f.size(), 1);
  EXPECT_NEAR(f(0), m3.intercept + m3.coefficients(0) * y(4), 1e-12);
  EXPECT_THROW(ar_fit(Vector::Constant(50, 1.0), 2), DegenerateError);
  EXPECT_THROW(ar_fit(y.head(3), 3), UsageError);
}

TEST(Ar, ForecastOnWindowedData) {
  const Vector y = generate_ar1(0.6, 2.0, 600, 18);
  const WindowedDataset d = make_windows(Matrix(y), y, 3, 1, {0.7, 0.1});
  const ArModel m = ar_fit_training(d, 2);
  const ForecastResult r = forecast_ar(m, d, 5, d.test());
  EXPECT_GT(r.size(), 0);
  // Step 1 of each block is the one-step model applied to observed lags.
  const Eigen::Index t = d.origins[d.test().begin];
  const double z = m.intercept + m.coefficients(0) * d.target(t) + m.coefficients(1) * d.target(t - 1);
  EXPECT_NEAR(r.predicted(0), d.norm.denormalize_target(z), 1e-10);
}

// --- impulse responses -----------------------------------------------------

TEST(Impulse, PlainRnnForgetsAfterWindow) {
  ImpulseConfig cfg;
  cfg.impulse_times = {2};
  cfg.length = 12;
  const auto r = impulse_response(cfg, {Architecture::PlainRnn, Architecture::AlphaRnn});
  const Vector& rnn = r[0].response;
  EXPECT_NEAR(rnn(2), std::tanh(1.0), 1e-15);
  EXPECT_GT(std::abs(rnn(2)), std::abs(rnn(3)));
  EXPECT_GT(std::abs(rnn(3)), std::abs(rnn(4)));
  for (Eigen::Index t = 5; t < 12; ++t) EXPECT_EQ(rnn(t), r[0].zero_input(t));
  EXPECT_NE(r[1].response(5), r[1].zero_input(5));
}

TEST(Impulse, AlphaOneMatchesPlainRnn) {
  ImpulseConfig cfg;
  cfg.alpha = 1.0;
  const auto r = impulse_response(cfg, {Architecture::PlainRnn, Architecture::AlphaRnn});
  EXPECT_LT((r[0].response - r[1].response).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Impulse, DynamicCellTrajectory) {
  const auto r = impulse_response(ImpulseConfig{});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[2].arch, Architecture::AlphaTRnn);
  EXPECT_EQ(r[2].response.size(), 16);
  EXPECT_TRUE(r[2].response.allFinite());
}

TEST(Impulse, LaggedImpulseDecaysForContractiveRecurrence) {
  // Scalar plain RNN(3), zero biases, random |U_h| <= 1: the response to an
  // isolated impulse strictly decays across the window.
  Rng rng(19);
  for (int k = 0; k < 50; ++k) {
    CellParams c = zero_cell(Architecture::PlainRnn, Dims{1, 1, 1, 3});
    c[Slot::Wh].setConstant(rng.uniform(-3.0, 3.0));
    c[Slot::Uh].setConstant(rng.uniform(-1.0, 1.0));
    c[Slot::Wy].setOnes();
    Matrix x = Matrix::Zero(10, 1);
    x(4, 0) = 1.0;
    const StreamResult s = stream_forward(c, x);
    // Window index 2 ends at time 4 (the impulse).
    EXPECT_GT(std::abs(s.hidden(0, 2)), std::abs(s.hidden(0, 3)));
    EXPECT_GT(std::abs(s.hidden(0, 3)), std::abs(s.hidden(0, 4)));
    EXPECT_EQ(s.hidden(0, 5), 0.0);
  }
}
