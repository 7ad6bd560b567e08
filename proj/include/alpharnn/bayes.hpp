#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "alpharnn/checkpoint.hpp"
#include "alpharnn/forecasting.hpp"
#include "alpharnn/training.hpp"

namespace arnn {

/// Weight prior pi N(0, sigma1^2) + (1 - pi) N(0, sigma2^2), shared by all weights.
struct ScaleMixturePrior {
  double pi = 0.5;
  double sigma1 = 1.0;
  double sigma2 = 0.0025;

  void check() const;
};

/// Mean-field Gaussian posterior over every used cell parameter:
/// theta = mu + softplus(rho) * eps.
struct VariationalParams {
  CellParams mean;
  std::array<Matrix, kSlotCount> rho;
  ScaleMixturePrior prior;
  /// Gaussian likelihood std in normalised target units.
  double obs_std = 1.0;

  Matrix posterior_std(Slot s) const;
  /// One posterior draw.
  CellParams sample(Rng& rng) const;
  void check() const;
};

/// Posterior with means from `mean` and every std equal to `init_std`.
VariationalParams make_variational(const CellParams& mean, double init_std,
                                   const ScaleMixturePrior& prior, double obs_std);

/// Per-batch ELBO: E_q[log p(Y | X, theta)] - kl_weight * E_q[log q(theta) -
/// log p(theta)], each expectation a mean over n_samples pathwise draws.
struct ElboEstimate {
  double elbo = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
};

ElboEstimate elbo_estimate(const VariationalParams& vp, const Batch& batch, int n_samples,
                           Rng& rng, double kl_weight = 1.0);

/// Same estimate plus its gradient with respect to mu and rho. The noise is
/// drawn in the same order as elbo_estimate, so equal seeds give common
/// random numbers.
ElboEstimate elbo_gradient(const VariationalParams& vp, const Batch& batch, int n_samples,
                           Rng& rng, double kl_weight, ParamGrads& grad_mu, ParamGrads& grad_rho);

enum class MeanInit {
  /// Posterior means drawn i.i.d. N(0, 1).
  StandardNormal,
  /// Posterior means copied from the deterministic warm-start fit.
  WarmStart,
};

struct BayesConfig {
  TrainConfig train;  // epochs, batch size, learning rate, seed, clip
  int n_samples = 10;
  /// Epochs without ELBO improvement before stopping.
  int patience_epochs = 6;
  double init_std = 0.05;
  MeanInit mean_init = MeanInit::StandardNormal;
  ScaleMixturePrior prior;
  /// Deterministic fit that fixes the observation noise.
  TrainConfig warm_start;
  InitOptions init;

  void check() const;
};

struct BayesFitReport {
  std::vector<double> elbo_trace;  // sum of mini-batch ELBOs per epoch
  int stopping_epoch = 0;
  bool early_stopped = false;
  double obs_std = 0.0;
  double training_seconds = 0.0;
  FitReport warm_start;
};

struct BayesFit {
  VariationalParams posterior;
  BayesFitReport report;
};

BayesFit bayes_fit(Architecture arch, Eigen::Index hidden, const WindowedDataset& data,
                   const BayesConfig& cfg);

struct PredictOptions {
  int n_draws = 10;
  Eigen::Index horizon = 1;  // rolling block length; direct uses the dataset horizon
  bool rolling = false;
  double level = 0.95;
  /// Adds the fitted observation variance to the spread of the draws.
  bool observation_noise = true;
  std::uint64_t seed = 0;
};

struct PredictiveResult {
  std::vector<std::string> timestamps;
  Vector observed;
  Matrix samples;  // T x n_draws, original units
  Vector mean;
  Vector std;
  Vector lower;
  Vector upper;
  std::vector<int> step;
  double level = 0.95;
  double coverage = 0.0;
  Metrics metrics;  // of the predictive mean

  Eigen::Index size() const { return mean.size(); }
  bool inside(Eigen::Index i) const { return observed(i) >= lower(i) && observed(i) <= upper(i); }
};

PredictiveResult bayes_predict(const VariationalParams& vp, const WindowedDataset& data,
                               WindowRange range, const PredictOptions& opts);

/// Fraction of observed points inside [lower, upper].
double coverage(const Vector& observed, const Vector& lower, const Vector& upper);

/// Inverse of the standard normal CDF.
double normal_quantile(double p);

/// CSV: timestamp, observed, mean, std, lower, upper, inside, step.
void write_predictive_csv(std::ostream& os, const PredictiveResult& r);

/// Posterior means as the cell parameters, rho as `rho:<slot>` extras, prior
/// and observation noise as metadata.
Checkpoint to_checkpoint(const VariationalParams& vp);
VariationalParams from_checkpoint(const Checkpoint& ckpt);

}  // namespace arnn
