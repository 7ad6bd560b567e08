#pragma once

#include <string>
#include <vector>

#include "alpharnn/cells.hpp"

namespace arnn {

/// Split of the window list into contiguous train / validation / test
/// blocks. The test fraction is whatever remains.
struct SplitFractions {
  double train = 0.7;
  double validation = 0.1;
};

/// Per-feature and target moments, always taken from the training rows.
struct Normalization {
  Vector feature_mean;
  Vector feature_std;
  double target_mean = 0.0;
  double target_std = 1.0;

  Matrix normalize_features(const Matrix& raw) const;
  Vector normalize_target(const Vector& raw) const;
  double denormalize_target(double z) const { return z * target_std + target_mean; }
  Vector denormalize_target(const Vector& z) const;
};

/// Half-open range of window indices.
struct WindowRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
};

/// A mini-batch laid out for the cells: steps[k] is d x B, targets is 1 x B.
struct Batch {
  std::vector<Matrix> steps;
  Matrix targets;
  Eigen::Index size() const { return targets.cols(); }
};

/// Supervised windows over a (normalised) multivariate series. Window w has
/// origin t = origins[w]: inputs are rows t-p+1 .. t, target is row t+m.
struct WindowedDataset {
  Matrix features;  // N x d, normalised
  Vector target;    // N, normalised
  std::vector<std::string> timestamps;
  Eigen::Index seq_len = 1;  // p
  Eigen::Index horizon = 1;  // m
  std::vector<Eigen::Index> origins;
  Eigen::Index n_train = 0;
  Eigen::Index n_validation = 0;
  Eigen::Index n_test = 0;
  Normalization norm;
  /// Single feature identical to the target: rolling forecasts can feed
  /// predictions back as inputs.
  bool endogenous = false;

  Eigen::Index size() const { return static_cast<Eigen::Index>(origins.size()); }
  WindowRange train() const { return {0, n_train}; }
  WindowRange validation() const { return {n_train, n_train + n_validation}; }
  WindowRange test() const { return {n_train + n_validation, size()}; }
  WindowRange all() const { return {0, size()}; }

  Eigen::Index target_index(Eigen::Index window) const { return origins[window] + horizon; }
  Batch batch(WindowRange range) const;
};

/// Builds windows with moments computed from the training rows.
/// `timestamps` may be empty (row indices are used).
WindowedDataset make_windows(const Matrix& series, const Vector& targets, Eigen::Index p,
                             Eigen::Index m, const SplitFractions& splits,
                             std::vector<std::string> timestamps = {});

/// Same, with externally supplied moments (e.g. read back from a checkpoint).
WindowedDataset make_windows(const Matrix& series, const Vector& targets, Eigen::Index p,
                             Eigen::Index m, const SplitFractions& splits,
                             const Normalization& norm, std::vector<std::string> timestamps = {});

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct ForecastResult {
  std::vector<std::string> timestamps;
  Vector predicted;
  Vector observed;
  Vector error;            // observed - predicted
  std::vector<int> step;   // steps ahead of the last observed input
  Metrics metrics;

  Eigen::Index size() const { return predicted.size(); }
};

/// A fitted cell together with the horizon it was trained for.
struct TrainedModel {
  CellParams cell;
  Eigen::Index horizon = 1;
};

Metrics metrics(const ForecastResult& result);
Metrics compute_metrics(const Vector& observed, const Vector& predicted);

/// One forward pass per window in `range` (default: the test block);
/// predictions in original units.
ForecastResult forecast_direct(const TrainedModel& model, const WindowedDataset& data);
ForecastResult forecast_direct(const TrainedModel& model, const WindowedDataset& data,
                               WindowRange range);

/// Iterated one-step forecasts in blocks of m: starting from observed data at
/// each block origin, every intermediate prediction becomes the newest lag.
/// The input is reset to observed data at the start of every block.
ForecastResult forecast_rolling(const TrainedModel& model, const WindowedDataset& data,
                                Eigen::Index m);
ForecastResult forecast_rolling(const TrainedModel& model, const WindowedDataset& data,
                                Eigen::Index m, WindowRange range);

/// Rolling forecast with an arbitrary one-step predictor over normalised
/// windows (p x B matrix of lags, oldest first -> 1 x B predictions). Shared
/// by the deterministic, Bayesian and AR baseline paths.
template <class Predictor>
ForecastResult rolling_with(const WindowedDataset& data, Eigen::Index p, Eigen::Index m,
                            WindowRange range, Predictor&& predict);

/// Last-value baseline: predicts y_t for target y_{t+m}.
ForecastResult forecast_persistence(const WindowedDataset& data, WindowRange range);

void write_forecast_csv(const std::string& path, const ForecastResult& result,
                        const std::vector<std::pair<std::string, std::string>>& summary);

// ---------------------------------------------------------------------------

namespace detail {
struct RollingPlan {
  std::vector<Eigen::Index> block_origins;
};
RollingPlan plan_rolling(const WindowedDataset& data, Eigen::Index p, Eigen::Index m,
                         WindowRange range);
void finish_result(ForecastResult& r);
}  // namespace detail

template <class Predictor>
ForecastResult rolling_with(const WindowedDataset& data, Eigen::Index p, Eigen::Index m,
                            WindowRange range, Predictor&& predict) {
  const auto plan = detail::plan_rolling(data, p, m, range);
  const auto B = static_cast<Eigen::Index>(plan.block_origins.size());
  // buf row r of block b holds the value at time origin - p + 1 + r.
  Matrix buf(p + m, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto t = plan.block_origins[b];
    buf.col(b).head(p) = data.features.col(0).segment(t - p + 1, p);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    Matrix window = buf.middleRows(j, p);
    Matrix pred = predict(window);
    buf.row(p + j) = pred.row(0);
  }
  ForecastResult r;
  const auto total = B * m;
  r.predicted.resize(total);
  r.observed.resize(total);
  Eigen::Index k = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    for (Eigen::Index j = 0; j < m; ++j, ++k) {
      const auto t = plan.block_origins[b] + j + 1;
      r.predicted(k) = data.norm.denormalize_target(buf(p + j, b));
      r.observed(k) = data.norm.denormalize_target(data.target(t));
      r.timestamps.push_back(data.timestamps[t]);
      r.step.push_back(static_cast<int>(j + 1));
    }
  }
  detail::finish_result(r);
  return r;
}

}  // namespace arnn
