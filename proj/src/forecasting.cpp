#include "alpharnn/forecasting.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace arnn {

Matrix Normalization::normalize_features(const Matrix& raw) const {
  if (raw.cols() != feature_mean.size())
    throw UsageError("normalize_features: column count does not match stored moments");
  Matrix out = raw.rowwise() - feature_mean.transpose();
  return out.array().rowwise() / feature_std.transpose().array();
}

Vector Normalization::normalize_target(const Vector& raw) const {
  return (raw.array() - target_mean) / target_std;
}

Vector Normalization::denormalize_target(const Vector& z) const {
  return (z.array() * target_std + target_mean).matrix();
}

namespace {

// Population standard deviation; zero spread maps to 1 so constant columns
// normalise to zero instead of NaN.
double spread(const Eigen::Ref<const Vector>& v, double mean) {
  const double var = (v.array() - mean).square().mean();
  return var > 0.0 ? std::sqrt(var) : 1.0;
}

struct Layout {
  std::vector<Eigen::Index> origins;
  Eigen::Index n_train, n_val, n_test;
};

Layout layout(Eigen::Index N, Eigen::Index p, Eigen::Index m, const SplitFractions& splits) {
  if (p < 1 || m < 1) throw UsageError("make_windows: p and m must be >= 1");
  if (N < p + m) throw UsageError("make_windows: series of length " + std::to_string(N) +
                                  " is too short for p=" + std::to_string(p) +
                                  ", m=" + std::to_string(m));
  if (splits.train <= 0.0 || splits.validation < 0.0 || splits.train + splits.validation > 1.0)
    throw UsageError("make_windows: split fractions must satisfy 0 < train, train + validation <= 1");
  Layout l;
  for (Eigen::Index t = p - 1; t + m < N; ++t) l.origins.push_back(t);
  const auto W = static_cast<Eigen::Index>(l.origins.size());
  l.n_train = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(splits.train * W)));
  l.n_val = std::min<Eigen::Index>(W - l.n_train,
                                   static_cast<Eigen::Index>(std::floor(splits.validation * W)));
  l.n_test = W - l.n_train - l.n_val;
  return l;
}

WindowedDataset assemble(const Matrix& series, const Vector& targets, Eigen::Index p,
                         Eigen::Index m, Layout l, const Normalization& norm,
                         std::vector<std::string> timestamps) {
  WindowedDataset ds;
  ds.seq_len = p;
  ds.horizon = m;
  ds.origins = std::move(l.origins);
  ds.n_train = l.n_train;
  ds.n_validation = l.n_val;
  ds.n_test = l.n_test;
  ds.norm = norm;
  ds.features = norm.normalize_features(series);
  ds.target = norm.normalize_target(targets);
  ds.endogenous = series.cols() == 1 && series.col(0) == targets;
  if (timestamps.empty()) {
    timestamps.reserve(series.rows());
    for (Eigen::Index i = 0; i < series.rows(); ++i) timestamps.push_back(std::to_string(i));
  }
  if (static_cast<Eigen::Index>(timestamps.size()) != series.rows())
    throw UsageError("make_windows: timestamp count does not match row count");
  ds.timestamps = std::move(timestamps);
  return ds;
}

}  // namespace

WindowedDataset make_windows(const Matrix& series, const Vector& targets, Eigen::Index p,
                             Eigen::Index m, const SplitFractions& splits,
                             std::vector<std::string> timestamps) {
  if (series.rows() != targets.size())
    throw UsageError("make_windows: series and targets differ in length");
  Layout l = layout(series.rows(), p, m, splits);
  // Training rows: everything up to the last training target.
  const Eigen::Index rows = l.origins[l.n_train - 1] + m + 1;
  Normalization norm;
  norm.feature_mean = series.topRows(rows).colwise().mean().transpose();
  norm.feature_std.resize(series.cols());
  for (Eigen::Index j = 0; j < series.cols(); ++j)
    norm.feature_std(j) = spread(series.col(j).head(rows), norm.feature_mean(j));
  norm.target_mean = targets.head(rows).mean();
  norm.target_std = spread(targets.head(rows), norm.target_mean);
  return assemble(series, targets, p, m, std::move(l), norm, std::move(timestamps));
}

WindowedDataset make_windows(const Matrix& series, const Vector& targets, Eigen::Index p,
                             Eigen::Index m, const SplitFractions& splits,
                             const Normalization& norm, std::vector<std::string> timestamps) {
  if (series.rows() != targets.size())
    throw UsageError("make_windows: series and targets differ in length");
  return assemble(series, targets, p, m, layout(series.rows(), p, m, splits), norm,
                  std::move(timestamps));
}

Batch WindowedDataset::batch(WindowRange range) const {
  if (range.begin < 0 || range.end > size() || range.begin > range.end)
    throw UsageError("batch: window range out of bounds");
  const auto B = range.size();
  const auto d = features.cols();
  Batch b;
  b.steps.assign(seq_len, Matrix(d, B));
  b.targets.resize(1, B);
  for (Eigen::Index c = 0; c < B; ++c) {
    const auto t = origins[range.begin + c];
    for (Eigen::Index k = 0; k < seq_len; ++k)
      b.steps[k].col(c) = features.row(t - seq_len + 1 + k).transpose();
    b.targets(0, c) = target(t + horizon);
  }
  return b;
}

Metrics compute_metrics(const Vector& observed, const Vector& predicted) {
  if (observed.size() != predicted.size() || observed.size() == 0)
    throw UsageError("metrics: need equal-length, non-empty series");
  const Vector e = observed - predicted;
  Metrics m;
  m.mse = e.squaredNorm() / static_cast<double>(e.size());
  m.mae = e.cwiseAbs().mean();
  m.rmse = std::sqrt(m.mse);
  return m;
}

Metrics metrics(const ForecastResult& result) {
  return compute_metrics(result.observed, result.predicted);
}

namespace detail {

void finish_result(ForecastResult& r) {
  r.error = r.observed - r.predicted;
  r.metrics = metrics(r);
}

RollingPlan plan_rolling(const WindowedDataset& data, Eigen::Index p, Eigen::Index m,
                         WindowRange range) {
  if (m < 1) throw UsageError("rolling forecast: m must be >= 1");
  if (!data.endogenous)
    throw UsageError(
        "rolling forecast needs an endogenous single-feature dataset; exogenous covariates have "
        "no future values to roll forward");
  if (range.size() <= 0) throw UsageError("rolling forecast: empty window range");
  const auto N = data.target.size();
  const auto first = data.origins[range.begin];
  const auto last = data.origins[range.end - 1];
  if (first - p + 1 < 0) throw UsageError("rolling forecast: not enough history for p lags");
  RollingPlan plan;
  for (auto t = first; t <= last && t + m < N; t += m) plan.block_origins.push_back(t);
  if (plan.block_origins.empty()) throw UsageError("rolling forecast: no complete block fits");
  return plan;
}

}  // namespace detail

ForecastResult forecast_direct(const TrainedModel& model, const WindowedDataset& data) {
  return forecast_direct(model, data, data.test());
}

ForecastResult forecast_direct(const TrainedModel& model, const WindowedDataset& data,
                               WindowRange range) {
  if (model.cell.dims.seq_len != data.seq_len)
    throw UsageError("forecast_direct: model sequence length " +
                     std::to_string(model.cell.dims.seq_len) + " != dataset p " +
                     std::to_string(data.seq_len));
  if (model.horizon != data.horizon)
    throw UsageError("forecast_direct: model trained for m=" + std::to_string(model.horizon) +
                     " but dataset has m=" + std::to_string(data.horizon));
  if (range.size() <= 0) throw UsageError("forecast_direct: empty window range");
  const Batch b = data.batch(range);
  const Matrix pred = forward_batch(model.cell, b.steps);
  ForecastResult r;
  r.predicted = data.norm.denormalize_target(Vector(pred.row(0).transpose()));
  r.observed = data.norm.denormalize_target(Vector(b.targets.row(0).transpose()));
  for (Eigen::Index w = range.begin; w < range.end; ++w) {
    r.timestamps.push_back(data.timestamps[data.target_index(w)]);
    r.step.push_back(static_cast<int>(data.horizon));
  }
  detail::finish_result(r);
  return r;
}

ForecastResult forecast_rolling(const TrainedModel& model, const WindowedDataset& data,
                                Eigen::Index m) {
  return forecast_rolling(model, data, m, data.test());
}

ForecastResult forecast_rolling(const TrainedModel& model, const WindowedDataset& data,
                                Eigen::Index m, WindowRange range) {
  if (model.horizon != 1)
    throw UsageError("forecast_rolling: model must be trained for one-step-ahead (m=1)");
  if (model.cell.dims.input != 1)
    throw UsageError("forecast_rolling: model must take a single endogenous input");
  const auto p = model.cell.dims.seq_len;
  const Weights<Matrix> w = eval_weights(model.cell);
  const CellShape shape = shape_of(model.cell);
  return rolling_with(data, p, m, range, [&](const Matrix& window) {
    std::vector<Matrix> steps;
    steps.reserve(p);
    for (Eigen::Index k = 0; k < p; ++k) steps.emplace_back(window.row(k));
    EvalOps ops;
    return forward_window(ops, shape, w, std::span<const Matrix>(steps), window.cols());
  });
}

ForecastResult forecast_persistence(const WindowedDataset& data, WindowRange range) {
  ForecastResult r;
  r.predicted.resize(range.size());
  r.observed.resize(range.size());
  for (Eigen::Index w = range.begin; w < range.end; ++w) {
    const auto k = w - range.begin;
    r.predicted(k) = data.norm.denormalize_target(data.target(data.origins[w]));
    r.observed(k) = data.norm.denormalize_target(data.target(data.target_index(w)));
    r.timestamps.push_back(data.timestamps[data.target_index(w)]);
    r.step.push_back(static_cast<int>(data.horizon));
  }
  detail::finish_result(r);
  return r;
}

void write_forecast_csv(const std::string& path, const ForecastResult& result,
                        const std::vector<std::pair<std::string, std::string>>& summary) {
  {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << std::setprecision(17);
    os << "timestamp,observed,predicted,error,step\n";
    for (Eigen::Index i = 0; i < result.size(); ++i)
      os << result.timestamps[i] << ',' << result.observed(i) << ',' << result.predicted(i) << ','
         << result.error(i) << ',' << result.step[i] << '\n';
    if (!os) throw IoError("failed writing '" + path + "'");
  }
  std::ofstream ms(path + ".metrics");
  if (!ms) throw IoError("cannot open '" + path + ".metrics' for writing");
  ms << std::setprecision(17);
  for (const auto& [k, v] : summary) ms << k << '=' << v << '\n';
  ms << "n=" << result.size() << '\n';
  ms << "mse=" << result.metrics.mse << '\n';
  ms << "mae=" << result.metrics.mae << '\n';
  ms << "rmse=" << result.metrics.rmse << '\n';
}

}  // namespace arnn
