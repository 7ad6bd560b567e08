#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "alpharnn/training.hpp"
#include "oracles.hpp"

using namespace arnn;

namespace {

CellParams unit_cell(Architecture arch, const Dims& dims) {
  CellParams c = zero_cell(arch, dims);
  for (Slot s : c.slots()) c[s].setOnes();
  return c;
}

/// Exogenous N(0,1) inputs and a target produced by a known scalar alpha-RNN
/// over each window, plus small noise.
WindowedDataset alpha_rnn_regression(double alpha, Eigen::Index p, Eigen::Index n,
                                     std::uint64_t seed) {
  Rng rng(seed);
  CellParams truth = zero_cell(Architecture::AlphaRnn, Dims{1, 1, 1, p});
  truth[Slot::Wh].setConstant(1.2);
  truth[Slot::Uh].setConstant(0.8);
  truth[Slot::Wy].setConstant(2.0);
  truth[Slot::AlphaRaw].setConstant(logit(alpha));
  const Matrix x = rng.normal_matrix(n, 1);
  Vector y = Vector::Zero(n);
  for (Eigen::Index t = p - 1; t + 1 < n; ++t)
    y(t + 1) = forward_sequence(truth, Matrix(x.middleRows(t - p + 1, p).transpose()))(0) +
               0.05 * rng.normal();
  return make_windows(x, y, p, 1, {0.8, 0.1});
}

WindowedDataset small_ar_data(std::uint64_t seed, Eigen::Index n = 400, Eigen::Index p = 4) {
  Rng rng(seed);
  Vector y(n);
  double v = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) y(t) = v = 0.6 * v + rng.normal();
  return make_windows(Matrix(y), y, p, 1, {0.7, 0.1});
}

}  // namespace

// --- loss ------------------------------------------------------------------

TEST(Loss, Examples) {
  const CellParams c = unit_cell(Architecture::AlphaRnn, Dims{2, 3, 1, 2});
  const Matrix pred = (Matrix(1, 3) << 0.5, -1.0, 2.0).finished();
  EXPECT_EQ(loss(pred, pred, c, 0.0, LossKind::Mse), 0.0);
  EXPECT_EQ(loss(Matrix::Ones(1, 1), Matrix::Zero(1, 1), c, 0.0, LossKind::Mse), 1.0);
  EXPECT_EQ(loss(Matrix::Constant(1, 1, -3.0), Matrix::Zero(1, 1), c, 0.0, LossKind::Mae), 3.0);

  // Weight entries: W_h 3x2, U_h 3x3, W_y 1x3 -> 18. Biases and alpha excluded.
  const double with_penalty = loss(pred, pred, c, 0.01, LossKind::Mse);
  EXPECT_NEAR(with_penalty, 0.01 * 18, 1e-15);
  EXPECT_THROW(loss(pred, Matrix::Zero(1, 2), c, 0.0, LossKind::Mse), UsageError);
}

TEST(Loss, PenaltyCountsWeightMatricesOnly) {
  for (Architecture arch : kAllArchitectures) {
    const CellParams c = unit_cell(arch, Dims{2, 3, 1, 2});
    Eigen::Index weights = 0;
    for (Slot s : c.slots())
      if (is_weight_matrix(s)) weights += c[s].size();
    const Matrix z = Matrix::Zero(1, 1);
    EXPECT_NEAR(loss(z, z, c, 0.1, LossKind::Mse), 0.1 * weights, 1e-12) << to_string(arch);
  }
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  const Dims dims{2, 3, 1, 3};
  for (LossKind kind : {LossKind::Mse, LossKind::Mae}) {
    Rng rng(3);
    CellParams c = zero_cell(Architecture::AlphaTRnn, dims);
    for (Slot s : c.slots()) c[s] = 0.5 * rng.normal_matrix(c[s].rows(), c[s].cols());
    Batch b;
    for (int k = 0; k < 3; ++k) b.steps.push_back(rng.normal_matrix(2, 6));
    b.targets = rng.normal_matrix(1, 6);
    ParamGrads g;
    loss_and_gradient(c, b, 0.02, kind, g);
    // Check one slot coordinate-wise.
    for (Eigen::Index i = 0; i < c[Slot::Uh].size(); ++i) {
      auto f = [&](double delta) {
        CellParams d = c;
        d[Slot::Uh](i) += delta;
        return loss(forward_batch(d, b.steps), b.targets, d, 0.02, kind);
      };
      const double fd = (f(1e-6) - f(-1e-6)) / 2e-6;
      EXPECT_NEAR(g[static_cast<int>(Slot::Uh)](i), fd, 1e-5);
    }
  }
}

TEST(Loss, L1SubgradientZeroAtZero) {
  CellParams c = zero_cell(Architecture::PlainRnn, Dims{1, 2, 1, 2});
  Batch b;
  b.steps = {Matrix::Zero(1, 4), Matrix::Zero(1, 4)};
  b.targets = Matrix::Zero(1, 4);
  ParamGrads g;
  loss_and_gradient(c, b, 0.5, LossKind::Mse, g);
  EXPECT_EQ(g[static_cast<int>(Slot::Wh)], Matrix::Zero(2, 1));
  EXPECT_EQ(g[static_cast<int>(Slot::Uh)], Matrix::Zero(2, 2));
}

// --- Adam ------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParameters) {
  CellParams c = unit_cell(Architecture::AlphaRnn, Dims{1, 2, 1, 2});
  const CellParams before = c;
  ParamGrads g;
  for (Slot s : c.slots()) g[static_cast<int>(s)] = Matrix::Zero(c[s].rows(), c[s].cols());
  AdamState st;
  for (int i = 0; i < 5; ++i) adam_step(st, c, g, 1e-3);
  for (Slot s : c.slots()) EXPECT_EQ(c[s], before[s]);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  for (double gval : {1e-4, 0.3, 250.0}) {
    CellParams c = unit_cell(Architecture::PlainRnn, Dims{1, 1, 1, 1});
    ParamGrads g;
    for (Slot s : c.slots()) g[static_cast<int>(s)] = Matrix::Constant(1, 1, gval);
    AdamState st;
    adam_step(st, c, g, 1e-3);
    // m_hat = g, v_hat = g^2: step = lr g / (|g| + eps).
    const double expected = 1e-3 * gval / (gval + 1e-8);
    EXPECT_NEAR(1.0 - c[Slot::Wh](0, 0), expected, 1e-15);
  }
}

TEST(Adam, ConstantGradientMovesMonotonically) {
  CellParams c = unit_cell(Architecture::PlainRnn, Dims{1, 1, 1, 1});
  ParamGrads g;
  for (Slot s : c.slots()) g[static_cast<int>(s)] = Matrix::Constant(1, 1, -0.7);
  AdamState st;
  double prev = c[Slot::bh](0, 0);
  for (int i = 0; i < 200; ++i) {
    adam_step(st, c, g, 1e-2);
    EXPECT_GT(c[Slot::bh](0, 0), prev);
    prev = c[Slot::bh](0, 0);
  }
}

TEST(Adam, NonFiniteGradientRejected) {
  CellParams c = unit_cell(Architecture::PlainRnn, Dims{1, 1, 1, 1});
  ParamGrads g;
  for (Slot s : c.slots()) g[static_cast<int>(s)] = Matrix::Zero(1, 1);
  g[static_cast<int>(Slot::Uh)](0, 0) = std::nan("");
  AdamState st;
  EXPECT_THROW(adam_step(st, c, g, 1e-3), TrainingError);
}

TEST(Adam, ClipGlobalNorm) {
  ParamGrads g;
  g[0] = Matrix::Constant(1, 1, 3.0);
  g[1] = Matrix::Constant(1, 1, 4.0);
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0](0, 0), 0.6, 1e-15);
  EXPECT_NEAR(g[1](0, 0), 0.8, 1e-15);
  g[0](0, 0) = 0.3;
  g[1](0, 0) = 0.4;
  clip_global_norm(g, 1.0);
  EXPECT_EQ(g[0](0, 0), 0.3);
}

// --- fit -------------------------------------------------------------------

TEST(Fit, ConstantTargetConvergesAndStopsEarly) {
  const Vector y = Vector::Constant(300, 4.2);
  const WindowedDataset data = make_windows(Matrix(y), y, 3, 1, {0.7, 0.1});
  Rng init(2);
  CellParams c = init_cell(Architecture::AlphaRnn, Dims{1, 4, 1, 3}, init);
  TrainConfig cfg;
  cfg.max_epochs = 5000;
  cfg.min_delta = 1e-9;
  const FitReport r = fit(c, data, cfg);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_LT(r.stopping_epoch, cfg.max_epochs);
  EXPECT_LT(evaluate_loss(c, data, data.train(), LossKind::Mse), 1e-6);
}

TEST(Fit, EarlyStoppingInvariant) {
  // One mini-batch per epoch, so the trace holds every mini-batch loss.
  const WindowedDataset data = small_ar_data(5, 300);
  Rng init(6);
  CellParams c = init_cell(Architecture::PlainRnn, Dims{1, 3, 1, 4}, init);
  TrainConfig cfg;
  cfg.max_epochs = 3000;
  cfg.batch_size = 10000;
  cfg.patience = 20;
  cfg.min_delta = 1e-6;
  cfg.learning_rate = 1e-2;
  const FitReport r = fit(c, data, cfg);
  EXPECT_LE(r.stopping_epoch, cfg.max_epochs);
  EXPECT_EQ(static_cast<int>(r.loss_trace.size()), r.stopping_epoch);
  ASSERT_TRUE(r.early_stopped);
  const auto& t = r.loss_trace;
  for (std::size_t k = t.size() - cfg.patience; k < t.size(); ++k)
    EXPECT_LT(std::abs(t[k] - t[k - 1]), cfg.min_delta);
}

TEST(Fit, TraceLengthEqualsStoppingEpoch) {
  const WindowedDataset data = small_ar_data(7);
  Rng init(8);
  CellParams c = init_cell(Architecture::Gru, Dims{1, 3, 1, 4}, init);
  TrainConfig cfg;
  cfg.max_epochs = 15;
  cfg.batch_size = 64;
  const FitReport r = fit(c, data, cfg);
  EXPECT_EQ(r.stopping_epoch, 15);
  EXPECT_FALSE(r.early_stopped);
  EXPECT_EQ(r.loss_trace.size(), 15u);
  EXPECT_EQ(r.updates, 15 * ((data.n_train + 63) / 64));
  EXPECT_FALSE(r.alpha.has_value());
}

TEST(Fit, SameSeedSameTrace) {
  const WindowedDataset data = small_ar_data(9);
  auto run = [&] {
    TrainConfig cfg;
    cfg.max_epochs = 20;
    cfg.batch_size = 50;
    cfg.seed = 77;
    Rng init(cfg.seed);
    CellParams c = init_cell(Architecture::AlphaTRnn, Dims{1, 4, 1, 4}, init);
    return fit(c, data, cfg);
  };
  const FitReport a = run();
  const FitReport b = run();
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Fit, RecoversSmoothingLevel) {
  constexpr double kAlpha = 0.3;
  for (int k = 0; k < 3; ++k) {
    const WindowedDataset data = alpha_rnn_regression(kAlpha, 8, 3000, derive_seed(300, k));
    TrainConfig cfg;
    cfg.max_epochs = 400;
    cfg.batch_size = 500;
    cfg.learning_rate = 1e-2;
    cfg.seed = derive_seed(301, k);
    Rng init(cfg.seed);
    CellParams c = init_cell(Architecture::AlphaRnn, Dims{1, 1, 1, 8}, init);
    const FitReport r = fit(c, data, cfg);
    ASSERT_TRUE(r.alpha.has_value());
    EXPECT_NEAR(*r.alpha, kAlpha, 0.15) << "seed " << k;
    ASSERT_TRUE(r.half_life.has_value());
    EXPECT_DOUBLE_EQ(*r.half_life, half_life(*r.alpha));
  }
}

TEST(Fit, DivergenceIsTrainingError) {
  const WindowedDataset data = small_ar_data(10);
  CellParams c = zero_cell(Architecture::PlainRnn, Dims{1, 2, 1, 4});
  c[Slot::Wy].setConstant(std::numeric_limits<double>::max());
  c[Slot::Uh].setConstant(1.0);
  c[Slot::bh].setConstant(1.0);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  EXPECT_THROW(fit(c, data, cfg), TrainingError);
}

TEST(Fit, ShapeMismatchRejected) {
  const WindowedDataset data = small_ar_data(11);
  Rng init(1);
  CellParams c = init_cell(Architecture::PlainRnn, Dims{1, 2, 1, 5}, init);
  EXPECT_THROW(fit(c, data, TrainConfig{}), UsageError);
  TrainConfig bad;
  bad.patience = 0;
  EXPECT_THROW(bad.check(), UsageError);
}

TEST(Fit, ReportSerialization) {
  FitReport r;
  r.architecture = "alpha_rnn";
  r.loss_trace = {0.5, 0.25};
  r.stopping_epoch = 2;
  r.alpha = 0.5;
  r.half_life = 1.0;
  std::ostringstream os;
  write_fit_report(os, r);
  const std::string s = os.str();
  EXPECT_NE(s.find("architecture=alpha_rnn"), std::string::npos);
  EXPECT_NE(s.find("stopping_epoch=2"), std::string::npos);
  EXPECT_NE(s.find("epoch,train_loss\n1,0.5\n2,0.25\n"), std::string::npos);
}

// --- cross-validation ------------------------------------------------------

TEST(CrossValidation, FoldsExpandWithoutLookAhead) {
  const auto folds = cv_folds(120, 5);
  ASSERT_EQ(folds.size(), 5u);
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto& [train, val] = folds[k];
    EXPECT_EQ(train.begin, 0);
    EXPECT_EQ(val.begin, train.end);
    EXPECT_GT(val.size(), 0);
    if (k > 0) {
      EXPECT_GT(train.end, folds[k - 1].first.end);
    }
  }
  EXPECT_EQ(folds.back().second.end, 120);
  EXPECT_THROW(cv_folds(40, 5), UsageError);
}

TEST(CrossValidation, WindowInputsPrecedeTargets) {
  const WindowedDataset data = small_ar_data(12, 400, 5);
  for (const auto& [train, val] : cv_folds(data.n_train + data.n_validation, 3)) {
    for (Eigen::Index w = train.begin; w < train.end; ++w) {
      EXPECT_LT(data.origins[w], data.target_index(w));
      // Training targets are observed no later than the first validation input.
      EXPECT_LE(data.target_index(w), data.origins[val.begin]);
    }
    for (Eigen::Index w = val.begin; w < val.end; ++w)
      EXPECT_LT(data.origins[w], data.target_index(w));
  }
}

TEST(CrossValidation, ScoresShapeAndSelection) {
  const WindowedDataset data = small_ar_data(13, 500);
  CvGrid grid;
  grid.hidden_sizes = {5, 10};
  grid.lambda1s = {0.0};
  grid.folds = 3;
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.batch_size = 100;
  cfg.seed = 14;
  const CvResult r = cross_validate(Architecture::AlphaRnn, data, grid, cfg);
  ASSERT_EQ(r.scores.size(), 6u);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index best_h = 0;
  for (Eigen::Index h : grid.hidden_sizes) {
    double sum = 0.0;
    for (const auto& s : r.scores)
      if (s.hidden == h) sum += s.validation_loss;
    if (sum / 3 < best) {
      best = sum / 3;
      best_h = h;
    }
  }
  EXPECT_EQ(r.best_hidden, best_h);
  EXPECT_NEAR(r.best_score, best, 1e-12);

  const CvResult again = cross_validate(Architecture::AlphaRnn, data, grid, cfg);
  for (std::size_t i = 0; i < r.scores.size(); ++i)
    EXPECT_EQ(r.scores[i].validation_loss, again.scores[i].validation_loss);
}

TEST(CrossValidation, SingleGridPoint) {
  const WindowedDataset data = small_ar_data(15, 300);
  CvGrid grid;
  grid.hidden_sizes = {3};
  grid.lambda1s = {1e-3};
  grid.folds = 2;
  TrainConfig cfg;
  cfg.max_epochs = 3;
  const CvResult r = cross_validate(Architecture::PlainRnn, data, grid, cfg);
  EXPECT_EQ(r.best_hidden, 3);
  EXPECT_EQ(r.best_lambda1, 1e-3);
  EXPECT_EQ(r.scores.size(), 2u);
}

TEST(CrossValidation, TiesGoToSmallerModel) {
  // Constant series: normalised inputs and targets are all zero, so every
  // grid point predicts exactly zero and the validation losses tie.
  const Vector y = Vector::Constant(300, 1.0);
  const WindowedDataset data = make_windows(Matrix(y), y, 3, 1, {0.7, 0.1});
  CvGrid grid;
  grid.hidden_sizes = {10, 5};
  grid.lambda1s = {1e-2, 0.0};
  grid.folds = 2;
  TrainConfig cfg;
  cfg.max_epochs = 2;
  const CvResult r = cross_validate(Architecture::AlphaRnn, data, grid, cfg);
  EXPECT_EQ(r.best_hidden, 5);
  EXPECT_EQ(r.best_lambda1, 0.0);
}

TEST(CrossValidation, TooFewWindows) {
  const WindowedDataset data = small_ar_data(16, 40);
  EXPECT_THROW(cross_validate(Architecture::AlphaRnn, data, CvGrid{}, TrainConfig{}), UsageError);
}
