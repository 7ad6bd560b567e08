#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "alpharnn/cells.hpp"
#include "alpharnn/forecasting.hpp"

namespace arnn {

/// tau_0..tau_hmax with the biased (1/N) autocovariance estimator.
/// Throws DegenerateError for a constant series.
Vector acf(const Vector& series, Eigen::Index h_max);

struct PacfResult {
  std::vector<Eigen::Index> lags;  // 1..h_max
  Vector estimates;
  double band = 0.0;  // 1.96 / sqrt(N)
  Eigen::Index n = 0;

  bool significant(Eigen::Index lag) const;
  std::vector<Eigen::Index> significant_lags() const;
};

/// Durbin-Levinson recursion on the sample ACF.
PacfResult pacf(const Vector& series, Eigen::Index h_max);

/// Ordinary least squares via column-pivoting QR.
struct OlsResult {
  Vector coefficients;
  Vector std_errors;
  Vector residuals;
  double rss = 0.0;
};
/// Throws DegenerateError if the design is rank deficient.
OlsResult ols(const Matrix& X, const Vector& y);

struct AdfResult {
  double statistic = 0.0;
  int lags = 0;
  Eigen::Index nobs = 0;
  /// Critical values at 1%, 5%, 10% (constant, no trend; large-sample).
  static constexpr std::array<double, 3> kCritical = {-3.431, -2.862, -2.567};
  static constexpr std::array<double, 3> kLevels = {0.01, 0.05, 0.10};

  bool reject(double level) const;
  bool stationary() const { return reject(0.05); }
};

/// Augmented Dickey-Fuller regression with a constant and no trend:
/// dy_t = c + beta y_{t-1} + sum_i delta_i dy_{t-i}. The lag order minimises
/// AIC over 0..max_lag on a common sample, then the chosen regression is refit
/// on all available rows. The fixed critical values ignore small-sample
/// corrections, and a deterministic trend is not modelled.
AdfResult adf_test(const Vector& series, int max_lag);

/// Default lag cap 12 * (N / 100)^(1/4).
int adf_default_max_lag(Eigen::Index n);

struct Decomposition {
  Vector trend;
  Vector seasonal;
  Vector residual;
  Eigen::Index period = 0;
  /// First and one-past-last index where the moving average is defined.
  Eigen::Index defined_begin = 0;
  Eigen::Index defined_end = 0;
};

/// Classical additive decomposition: centred moving average trend (2 x s for
/// even s), recentred per-phase seasonal means, residual = y - trend -
/// seasonal. Endpoints copy the nearest defined trend value.
Decomposition decompose(const Vector& series, Eigen::Index period);

/// Linear AR(p) with intercept fit by least squares to predict y_{t+horizon}
/// from y_t..y_{t-p+1}.
struct ArModel {
  double intercept = 0.0;
  Vector coefficients;  // coefficients(i) multiplies y_{t-i}
  Eigen::Index horizon = 1;
  Eigen::Index order() const { return coefficients.size(); }
};

ArModel ar_fit(const Vector& series, Eigen::Index p, Eigen::Index horizon = 1);

/// Forecast from `history` (oldest first). Rolling iterates one-step
/// predictions and returns m values; direct applies a horizon-m model once.
Vector ar_forecast(const ArModel& model, const Vector& history, Eigen::Index m, bool rolling);

/// AR(p) one-step model fitted to the normalised target rows of the
/// training block.
ArModel ar_fit_training(const WindowedDataset& data, Eigen::Index p);

/// Rolling forecast of an AR model fitted on normalised data over `range`
/// in blocks of m; results in original units.
ForecastResult forecast_ar(const ArModel& model, const WindowedDataset& data, Eigen::Index m,
                           WindowRange range);

struct ImpulseConfig {
  double alpha = 0.5;
  Eigen::Index seq_len = 3;
  Eigen::Index length = 16;
  std::vector<Eigen::Index> impulse_times = {3, 9};
};

struct ImpulseResponse {
  Architecture arch;
  Vector response;    // readout hidden state at each time
  Vector zero_input;  // same cell fed all zeros
};

/// Scalar cells with all weights 1 and biases 0 (alpha-RNN: fixed alpha),
/// streamed over a unit-impulse input of `length` steps (left-padded with
/// p - 1 zeros). Index k of each trajectory is the window ending at time k.
std::vector<ImpulseResponse> impulse_response(const ImpulseConfig& cfg,
                                              const std::vector<Architecture>& archs = {
                                                  Architecture::PlainRnn, Architecture::AlphaRnn,
                                                  Architecture::AlphaTRnn});
/// The cell used by impulse_response.
CellParams impulse_cell(Architecture arch, const ImpulseConfig& cfg);

/// CSV with columns lag, estimate, band.
void write_correlogram_csv(std::ostream& os, const std::vector<Eigen::Index>& lags,
                           const Vector& estimates, double band);

}  // namespace arnn
