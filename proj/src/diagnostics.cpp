#include "alpharnn/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace arnn {

Vector acf(const Vector& series, Eigen::Index h_max) {
  const auto N = series.size();
  if (h_max < 0) throw UsageError("acf: h_max must be >= 0");
  if (N <= h_max) throw UsageError("acf: need N > h_max");
  const Vector z = series.array() - series.mean();
  const double g0 = z.squaredNorm() / double(N);
  if (!(g0 > 0.0)) throw DegenerateError("acf: series has zero variance");
  Vector tau(h_max + 1);
  for (Eigen::Index j = 0; j <= h_max; ++j)
    tau(j) = z.head(N - j).dot(z.tail(N - j)) / double(N) / g0;
  return tau;
}

bool PacfResult::significant(Eigen::Index lag) const {
  if (lag < 1 || lag > estimates.size()) throw UsageError("pacf: lag out of range");
  return std::abs(estimates(lag - 1)) > band;
}

std::vector<Eigen::Index> PacfResult::significant_lags() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index h = 1; h <= estimates.size(); ++h)
    if (significant(h)) out.push_back(h);
  return out;
}

PacfResult pacf(const Vector& series, Eigen::Index h_max) {
  if (h_max < 1) throw UsageError("pacf: h_max must be >= 1");
  if (series.size() <= h_max + 1) throw UsageError("pacf: need N > h_max + 1");
  const Vector r = acf(series, h_max);
  PacfResult out;
  out.n = series.size();
  out.band = 1.96 / std::sqrt(double(out.n));
  out.estimates.resize(h_max);
  Vector phi = Vector::Zero(h_max + 1), prev = phi;
  double v = 1.0;
  for (Eigen::Index k = 1; k <= h_max; ++k) {
    double num = r(k);
    for (Eigen::Index j = 1; j < k; ++j) num -= prev(j) * r(k - j);
    const double kk = v > 0.0 ? num / v : 0.0;
    phi(k) = kk;
    for (Eigen::Index j = 1; j < k; ++j) phi(j) = prev(j) - kk * prev(k - j);
    v *= (1.0 - kk * kk);
    prev = phi;
    out.estimates(k - 1) = kk;
    out.lags.push_back(k);
  }
  return out;
}

OlsResult ols(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw UsageError("ols: design and response differ in length");
  if (X.rows() <= X.cols()) throw DegenerateError("ols: not enough observations");
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  if (qr.rank() < X.cols()) throw DegenerateError("ols: singular design matrix");
  OlsResult r;
  r.coefficients = qr.solve(y);
  r.residuals = y - X * r.coefficients;
  r.rss = r.residuals.squaredNorm();
  const double s2 = r.rss / double(X.rows() - X.cols());
  // (X^T X)^-1 = P R^-1 R^-T P^T.
  const auto k = X.cols();
  const Matrix R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  const Matrix inv = qr.colsPermutation() * (Rinv * Rinv.transpose()) *
                     qr.colsPermutation().transpose();
  r.std_errors = (s2 * inv.diagonal().array()).sqrt();
  return r;
}

bool AdfResult::reject(double level) const {
  for (std::size_t i = 0; i < kLevels.size(); ++i)
    if (std::abs(kLevels[i] - level) < 1e-12) return statistic < kCritical[i];
  throw UsageError("adf: level must be one of 0.01, 0.05, 0.10");
}

int adf_default_max_lag(Eigen::Index n) {
  return static_cast<int>(std::floor(12.0 * std::pow(double(n) / 100.0, 0.25)));
}

namespace {

// Rows t = first..N-1 of the ADF regression with k lagged differences.
std::pair<Matrix, Vector> adf_design(const Vector& y, int k, Eigen::Index first) {
  const auto N = y.size();
  const auto rows = N - first;
  Matrix X(rows, 2 + k);
  Vector dy(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto t = first + i;
    dy(i) = y(t) - y(t - 1);
    X(i, 0) = 1.0;
    X(i, 1) = y(t - 1);
    for (int j = 1; j <= k; ++j) X(i, 1 + j) = y(t - j) - y(t - j - 1);
  }
  return {X, dy};
}

}  // namespace

AdfResult adf_test(const Vector& series, int max_lag) {
  if (max_lag < 0) throw UsageError("adf: max_lag must be >= 0");
  if (series.size() <= max_lag + 10) throw UsageError("adf: need N > max_lag + 10");
  const Eigen::Index common = max_lag + 1;
  int best_k = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= max_lag; ++k) {
    auto [X, dy] = adf_design(series, k, common);
    const OlsResult fit = ols(X, dy);
    const double n = double(X.rows());
    const double aic = n * std::log(fit.rss / n) + 2.0 * double(X.cols());
    if (aic < best_aic) {
      best_aic = aic;
      best_k = k;
    }
  }
  auto [X, dy] = adf_design(series, best_k, best_k + 1);
  const OlsResult fit = ols(X, dy);
  AdfResult r;
  r.statistic = fit.coefficients(1) / fit.std_errors(1);
  r.lags = best_k;
  r.nobs = X.rows();
  return r;
}

Decomposition decompose(const Vector& y, Eigen::Index s) {
  if (s < 2) throw UsageError("decompose: period must be >= 2");
  const auto N = y.size();
  if (N < 2 * s) throw UsageError("decompose: need at least two full periods");
  Decomposition d;
  d.period = s;
  const Eigen::Index half = s / 2;
  d.defined_begin = half;
  d.defined_end = N - half;
  d.trend = Vector::Zero(N);
  for (Eigen::Index t = d.defined_begin; t < d.defined_end; ++t) {
    if (s % 2 == 0)
      d.trend(t) = (0.5 * y(t - half) + y.segment(t - half + 1, s - 1).sum() + 0.5 * y(t + half)) /
                   double(s);
    else
      d.trend(t) = y.segment(t - half, s).mean();
  }
  Vector phase_sum = Vector::Zero(s), phase_count = Vector::Zero(s);
  for (Eigen::Index t = d.defined_begin; t < d.defined_end; ++t) {
    phase_sum(t % s) += y(t) - d.trend(t);
    phase_count(t % s) += 1.0;
  }
  Vector pattern = phase_sum.cwiseQuotient(phase_count);
  pattern.array() -= pattern.mean();
  for (Eigen::Index t = 0; t < d.defined_begin; ++t) d.trend(t) = d.trend(d.defined_begin);
  for (Eigen::Index t = d.defined_end; t < N; ++t) d.trend(t) = d.trend(d.defined_end - 1);
  d.seasonal.resize(N);
  for (Eigen::Index t = 0; t < N; ++t) d.seasonal(t) = pattern(t % s);
  d.residual = y - d.trend - d.seasonal;
  return d;
}

ArModel ar_fit(const Vector& y, Eigen::Index p, Eigen::Index horizon) {
  if (p < 0) throw UsageError("ar_fit: p must be >= 0");
  if (horizon < 1) throw UsageError("ar_fit: horizon must be >= 1");
  const auto N = y.size();
  if (N <= p + horizon) throw UsageError("ar_fit: series too short for the lag order");
  ArModel m;
  m.horizon = horizon;
  const Eigen::Index first = std::max<Eigen::Index>(p - 1, 0);
  const Eigen::Index rows = N - horizon - first;
  Matrix X(rows, p + 1);
  Vector target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto t = first + i;
    X(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) X(i, 1 + j) = y(t - j);
    target(i) = y(t + horizon);
  }
  if (p == 0) {
    m.intercept = target.mean();
    m.coefficients.resize(0);
    return m;
  }
  const OlsResult fit = ols(X, target);
  m.intercept = fit.coefficients(0);
  m.coefficients = fit.coefficients.tail(p);
  return m;
}

Vector ar_forecast(const ArModel& model, const Vector& history, Eigen::Index m, bool rolling) {
  const auto p = model.order();
  if (m < 1) throw UsageError("ar_forecast: m must be >= 1");
  if (history.size() < p) throw UsageError("ar_forecast: history shorter than the lag order");
  auto one = [&](const Vector& lags_oldest_first) {
    double v = model.intercept;
    for (Eigen::Index j = 0; j < p; ++j) v += model.coefficients(j) * lags_oldest_first(p - 1 - j);
    return v;
  };
  if (!rolling) {
    if (model.horizon != m)
      throw UsageError("ar_forecast: direct forecast needs a model fit for horizon m");
    Vector out(1);
    out(0) = one(history.tail(p));
    return out;
  }
  if (model.horizon != 1) throw UsageError("ar_forecast: rolling needs a one-step model");
  Vector buf(p + m);
  buf.head(p) = history.tail(p);
  for (Eigen::Index k = 0; k < m; ++k) buf(p + k) = one(buf.segment(k, p));
  return buf.tail(m);
}

ArModel ar_fit_training(const WindowedDataset& data, Eigen::Index p) {
  const auto rows = data.origins[data.n_train - 1] + data.horizon + 1;
  return ar_fit(data.target.head(rows), p, 1);
}

ForecastResult forecast_ar(const ArModel& model, const WindowedDataset& data, Eigen::Index m,
                           WindowRange range) {
  if (model.horizon != 1) throw UsageError("forecast_ar: model must be one-step");
  const auto p = model.order();
  return rolling_with(data, std::max<Eigen::Index>(p, 1), m, range, [&](const Matrix& window) {
    Matrix out = Matrix::Constant(1, window.cols(), model.intercept);
    for (Eigen::Index j = 0; j < p; ++j)
      out.row(0) += model.coefficients(j) * window.row(window.rows() - 1 - j);
    return out;
  });
}

CellParams impulse_cell(Architecture arch, const ImpulseConfig& cfg) {
  CellParams c = zero_cell(arch, Dims{1, 1, 1, cfg.seq_len});
  for (Slot s : c.slots())
    if (is_weight_matrix(s)) c[s].setOnes();
  if (c.has_static_alpha()) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw UsageError("impulse: alpha must lie in (0, 1]");
    // sigmoid(50) rounds to exactly 1 in double precision.
    c[Slot::AlphaRaw](0, 0) = cfg.alpha >= 1.0 ? 50.0 : logit(cfg.alpha);
  }
  return c;
}

std::vector<ImpulseResponse> impulse_response(const ImpulseConfig& cfg,
                                              const std::vector<Architecture>& archs) {
  if (cfg.seq_len < 1 || cfg.length < 1) throw UsageError("impulse: seq_len and length must be >= 1");
  const auto pad = cfg.seq_len - 1;
  Matrix x = Matrix::Zero(cfg.length + pad, 1);
  for (auto t : cfg.impulse_times) {
    if (t < 0 || t >= cfg.length) throw UsageError("impulse: impulse time out of range");
    x(t + pad, 0) = 1.0;
  }
  const Matrix zero = Matrix::Zero(x.rows(), 1);
  std::vector<ImpulseResponse> out;
  for (Architecture arch : archs) {
    const CellParams cell = impulse_cell(arch, cfg);
    ImpulseResponse r{arch, stream_forward(cell, x).hidden.row(0).transpose(),
                      stream_forward(cell, zero).hidden.row(0).transpose()};
    out.push_back(std::move(r));
  }
  return out;
}

void write_correlogram_csv(std::ostream& os, const std::vector<Eigen::Index>& lags,
                           const Vector& estimates, double band) {
  if (static_cast<Eigen::Index>(lags.size()) != estimates.size())
    throw UsageError("correlogram: lag and estimate counts differ");
  os << std::setprecision(17) << "lag,estimate,band\n";
  for (std::size_t i = 0; i < lags.size(); ++i)
    os << lags[i] << ',' << estimates(static_cast<Eigen::Index>(i)) << ',' << band << '\n';
}

}  // namespace arnn
