#include "alpharnn/bayes.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace arnn {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw IoError(std::string("checkpoint: bad value for ") + what);
  return v;
}

}  // namespace

void ScaleMixturePrior::check() const {
  if (!(pi >= 0.0 && pi <= 1.0)) throw UsageError("prior: pi must lie in [0, 1]");
  if (!(sigma2 > 0.0 && sigma1 >= sigma2)) throw UsageError("prior: need sigma1 >= sigma2 > 0");
}

Matrix VariationalParams::posterior_std(Slot s) const {
  return rho[static_cast<int>(s)].unaryExpr([](double r) { return softplus(r); });
}

CellParams VariationalParams::sample(Rng& rng) const {
  CellParams c = mean;
  for (Slot s : mean.slots()) {
    const Matrix& m = mean[s];
    c[s] = m + posterior_std(s).cwiseProduct(rng.normal_matrix(m.rows(), m.cols()));
  }
  return c;
}

void VariationalParams::check() const {
  validate(mean);
  prior.check();
  if (!(obs_std > 0.0)) throw UsageError("variational: observation std must be > 0");
  for (Slot s : mean.slots()) {
    const Matrix& r = rho[static_cast<int>(s)];
    if (r.rows() != mean[s].rows() || r.cols() != mean[s].cols())
      throw UsageError("variational: rho for " + std::string(slot_name(s)) + " has wrong shape");
  }
}

VariationalParams make_variational(const CellParams& mean, double init_std,
                                   const ScaleMixturePrior& prior, double obs_std) {
  if (!(init_std > 0.0)) throw UsageError("variational: initial std must be > 0");
  VariationalParams vp;
  vp.mean = mean;
  vp.prior = prior;
  vp.obs_std = obs_std;
  const double r = softplus_inverse(init_std);
  for (Slot s : mean.slots()) vp.rho[static_cast<int>(s)] = Matrix::Constant(mean[s].rows(), mean[s].cols(), r);
  vp.check();
  return vp;
}

namespace {

// Shared estimator; gradients are filled only when both pointers are set.
ElboEstimate elbo_impl(const VariationalParams& vp, const Batch& batch, int n_samples, Rng& rng,
                       double kl_weight, ParamGrads* grad_mu, ParamGrads* grad_rho) {
  if (n_samples < 1) throw UsageError("elbo: n_samples must be >= 1");
  if (batch.size() < 1) throw UsageError("elbo: empty batch");
  const auto& slots = vp.mean.slots();
  const CellShape shape = shape_of(vp.mean);
  const double sigma = vp.obs_std;
  const double B = double(batch.size());
  Eigen::Index K = 0;
  for (Slot s : slots) K += vp.mean[s].size();

  ad::Tape tape;
  Weights<ad::Var> mu, rho, sp;
  for (Slot s : slots) {
    const int i = static_cast<int>(s);
    mu[i] = tape.parameter(vp.mean[s]);
    rho[i] = tape.parameter(vp.rho[i]);
    sp[i] = tape.softplus(rho[i]);
  }
  std::vector<ad::Var> inputs;
  for (const Matrix& x : batch.steps) inputs.push_back(tape.constant(x));
  const ad::Var target = tape.constant(batch.targets);
  TapeOps ops{tape};

  // Entropy part of log q: -sum log std, identical for every draw.
  ad::Var neg_log_std{};
  for (Slot s : slots) {
    const ad::Var term = tape.scale(tape.sum(tape.log(sp[static_cast<int>(s)])), -1.0);
    neg_log_std = neg_log_std.valid() ? tape.add(neg_log_std, term) : term;
  }

  ad::Var total{};
  double lik_sum = 0.0, kl_sum = 0.0, const_sum = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    Weights<ad::Var> theta;
    double eps_sq = 0.0;
    ad::Var log_prior{};
    for (Slot s : slots) {
      const int i = static_cast<int>(s);
      const Matrix eps = rng.normal_matrix(vp.mean[s].rows(), vp.mean[s].cols());
      eps_sq += eps.squaredNorm();
      theta[i] = tape.add(mu[i], tape.hadamard(sp[i], tape.constant(eps)));
      const ad::Var lp =
          tape.log_scale_mixture_sum(theta[i], vp.prior.pi, vp.prior.sigma1, vp.prior.sigma2);
      log_prior = log_prior.valid() ? tape.add(log_prior, lp) : lp;
    }
    const ad::Var pred =
        forward_window(ops, shape, theta, std::span<const ad::Var>(inputs), batch.size());
    const ad::Var sq = tape.sum(tape.square(tape.sub(pred, target)));
    const ad::Var lik = tape.scale(sq, -0.5 / (sigma * sigma));
    const double lik_const = -B * (std::log(sigma) + kHalfLog2Pi);
    const double q_const = -0.5 * eps_sq - double(K) * kHalfLog2Pi;
    // elbo_k = lik - w (log q - log p), log q = neg_log_std + q_const.
    const ad::Var kl_var = tape.sub(neg_log_std, log_prior);
    const ad::Var elbo_k = tape.sub(lik, tape.scale(kl_var, kl_weight));
    total = total.valid() ? tape.add(total, elbo_k) : elbo_k;
    lik_sum += tape.scalar(lik) + lik_const;
    kl_sum += tape.scalar(kl_var) + q_const;
    const_sum += lik_const - kl_weight * q_const;
  }
  const ad::Var objective = tape.scale(total, 1.0 / n_samples);

  ElboEstimate e;
  e.log_likelihood = lik_sum / n_samples;
  e.kl = kl_sum / n_samples;
  e.elbo = tape.scalar(objective) + const_sum / n_samples;
  if (!std::isfinite(e.elbo)) throw TrainingError("elbo: non-finite estimate");

  if (grad_mu && grad_rho) {
    const auto g = tape.backward(objective);
    for (Slot s : slots) {
      const int i = static_cast<int>(s);
      (*grad_mu)[i] = g[mu[i]];
      (*grad_rho)[i] = g[rho[i]];
    }
  }
  return e;
}

}  // namespace

ElboEstimate elbo_estimate(const VariationalParams& vp, const Batch& batch, int n_samples,
                           Rng& rng, double kl_weight) {
  return elbo_impl(vp, batch, n_samples, rng, kl_weight, nullptr, nullptr);
}

ElboEstimate elbo_gradient(const VariationalParams& vp, const Batch& batch, int n_samples,
                           Rng& rng, double kl_weight, ParamGrads& grad_mu, ParamGrads& grad_rho) {
  return elbo_impl(vp, batch, n_samples, rng, kl_weight, &grad_mu, &grad_rho);
}

void BayesConfig::check() const {
  train.check();
  warm_start.check();
  prior.check();
  if (n_samples < 1) throw UsageError("bayes: n_samples must be >= 1");
  if (patience_epochs < 1) throw UsageError("bayes: patience must be >= 1");
  if (!(init_std > 0.0)) throw UsageError("bayes: initial posterior std must be > 0");
}

BayesFit bayes_fit(Architecture arch, Eigen::Index hidden, const WindowedDataset& data,
                   const BayesConfig& cfg) {
  cfg.check();
  const WindowRange train = data.train();
  if (train.size() <= 0) throw UsageError("bayes_fit: empty training set");
  const auto start = std::chrono::steady_clock::now();
  const Dims dims{data.features.cols(), hidden, 1, data.seq_len};

  // Deterministic warm start fixes the likelihood scale.
  Rng init_rng(derive_seed(cfg.train.seed, 1));
  CellParams warm = init_cell(arch, dims, init_rng, cfg.init);
  TrainConfig wcfg = cfg.warm_start;
  wcfg.seed = cfg.train.seed;
  BayesFit out;
  out.report.warm_start = fit(warm, data, wcfg);
  const Batch all = data.batch(train);
  const Matrix resid = forward_batch(warm, all.steps) - all.targets;
  const double rmean = resid.mean();
  double obs_std = std::sqrt((resid.array() - rmean).square().sum() / double(resid.size()));
  if (!(obs_std > 1e-8)) obs_std = 1e-8;

  CellParams mean = warm;
  if (cfg.mean_init == MeanInit::StandardNormal) {
    Rng mean_rng(derive_seed(cfg.train.seed, 2));
    for (Slot s : mean.slots()) mean[s] = mean_rng.normal_matrix(mean[s].rows(), mean[s].cols());
  }
  VariationalParams vp = make_variational(mean, cfg.init_std, cfg.prior, obs_std);

  std::vector<Batch> batches;
  for (auto b = train.begin; b < train.end; b += cfg.train.batch_size)
    batches.push_back(data.batch({b, std::min(train.end, b + cfg.train.batch_size)}));

  Rng noise(derive_seed(cfg.train.seed, 3));
  const auto& slots = vp.mean.slots();
  long long step = 0;
  ParamGrads gmu, grho, m1, v1, m2, v2;
  double best = -std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= cfg.train.max_epochs; ++epoch) {
    double epoch_elbo = 0.0;
    for (const Batch& b : batches) {
      const double w = double(b.size()) / double(train.size());
      const ElboEstimate e = elbo_gradient(vp, b, cfg.n_samples, noise, w, gmu, grho);
      epoch_elbo += e.elbo;
      // Adam minimises -ELBO; clip the joint gradient.
      double sq = 0.0;
      for (Slot s : slots) {
        const int i = static_cast<int>(s);
        gmu[i] = -gmu[i];
        grho[i] = -grho[i];
        sq += gmu[i].squaredNorm() + grho[i].squaredNorm();
      }
      const double norm = std::sqrt(sq);
      if (cfg.train.clip_norm > 0.0 && norm > cfg.train.clip_norm)
        for (Slot s : slots) {
          const int i = static_cast<int>(s);
          gmu[i] *= cfg.train.clip_norm / norm;
          grho[i] *= cfg.train.clip_norm / norm;
        }
      std::vector<Matrix*> params, first, second;
      std::vector<const Matrix*> grads;
      for (Slot s : slots) {
        const int i = static_cast<int>(s);
        params.push_back(&vp.mean[s]);
        grads.push_back(&gmu[i]);
        first.push_back(&m1[i]);
        second.push_back(&v1[i]);
        params.push_back(&vp.rho[i]);
        grads.push_back(&grho[i]);
        first.push_back(&m2[i]);
        second.push_back(&v2[i]);
      }
      adam_update(step, params, grads, first, second, cfg.train.learning_rate);
    }
    out.report.elbo_trace.push_back(epoch_elbo);
    out.report.stopping_epoch = epoch;
    if (epoch_elbo > best) {
      best = epoch_elbo;
      stale = 0;
    } else if (++stale >= cfg.patience_epochs) {
      out.report.early_stopped = true;
      break;
    }
  }
  out.report.obs_std = obs_std;
  out.report.training_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.posterior = std::move(vp);
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation, then one Halley step on erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double lo = 0.02425, hi = 1.0 - lo;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= hi) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double coverage(const Vector& observed, const Vector& lower, const Vector& upper) {
  if (observed.size() != lower.size() || observed.size() != upper.size() || observed.size() == 0)
    throw UsageError("coverage: need equal-length, non-empty vectors");
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < observed.size(); ++i)
    if (observed(i) >= lower(i) && observed(i) <= upper(i)) ++inside;
  return double(inside) / double(observed.size());
}

PredictiveResult bayes_predict(const VariationalParams& vp, const WindowedDataset& data,
                               WindowRange range, const PredictOptions& opts) {
  if (opts.n_draws < 2) throw UsageError("bayes_predict: n_draws must be >= 2");
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw UsageError("bayes_predict: level must lie in (0, 1)");
  vp.check();
  PredictiveResult r;
  r.level = opts.level;
  for (int k = 0; k < opts.n_draws; ++k) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(k)));
    TrainedModel model{vp.sample(rng), data.horizon};
    const ForecastResult f = opts.rolling ? forecast_rolling(model, data, opts.horizon, range)
                                          : forecast_direct(model, data, range);
    if (k == 0) {
      r.samples.resize(f.size(), opts.n_draws);
      r.timestamps = f.timestamps;
      r.observed = f.observed;
      r.step = f.step;
    }
    r.samples.col(k) = f.predicted;
  }
  const double n = double(opts.n_draws);
  r.mean = r.samples.rowwise().mean();
  const Vector var = (r.samples.colwise() - r.mean).array().square().rowwise().sum() / (n - 1.0);
  const double obs = opts.observation_noise ? vp.obs_std * data.norm.target_std : 0.0;
  r.std = (var.array() + obs * obs).sqrt();
  const double z = normal_quantile(0.5 + 0.5 * opts.level);
  r.lower = r.mean - z * r.std;
  r.upper = r.mean + z * r.std;
  r.coverage = coverage(r.observed, r.lower, r.upper);
  r.metrics = compute_metrics(r.observed, r.mean);
  return r;
}

void write_predictive_csv(std::ostream& os, const PredictiveResult& r) {
  os << std::setprecision(17) << "timestamp,observed,mean,std,lower,upper,inside,step\n";
  for (Eigen::Index i = 0; i < r.size(); ++i)
    os << r.timestamps[i] << ',' << r.observed(i) << ',' << r.mean(i) << ',' << r.std(i) << ','
       << r.lower(i) << ',' << r.upper(i) << ',' << (r.inside(i) ? 1 : 0) << ',' << r.step[i]
       << '\n';
}

Checkpoint to_checkpoint(const VariationalParams& vp) {
  Checkpoint c;
  c.params = vp.mean;
  c.meta.emplace_back("kind", "variational");
  c.meta.emplace_back("prior_pi", format_double(vp.prior.pi));
  c.meta.emplace_back("prior_sigma1", format_double(vp.prior.sigma1));
  c.meta.emplace_back("prior_sigma2", format_double(vp.prior.sigma2));
  c.meta.emplace_back("obs_std", format_double(vp.obs_std));
  for (Slot s : vp.mean.slots())
    c.extras.emplace_back("rho:" + std::string(slot_name(s)), vp.rho[static_cast<int>(s)]);
  return c;
}

VariationalParams from_checkpoint(const Checkpoint& c) {
  const std::string* kind = c.find_meta("kind");
  if (!kind || *kind != "variational")
    throw StateMismatch("checkpoint does not hold a variational posterior");
  auto meta = [&](const char* key) {
    const std::string* v = c.find_meta(key);
    if (!v) throw IoError(std::string("checkpoint: missing meta ") + key);
    return parse_double(*v, key);
  };
  VariationalParams vp;
  vp.mean = c.params;
  vp.prior = {meta("prior_pi"), meta("prior_sigma1"), meta("prior_sigma2")};
  vp.obs_std = meta("obs_std");
  for (Slot s : vp.mean.slots()) {
    const Matrix* r = c.find_extra("rho:" + std::string(slot_name(s)));
    if (!r) throw IoError("checkpoint: missing rho for " + std::string(slot_name(s)));
    vp.rho[static_cast<int>(s)] = *r;
  }
  vp.check();
  return vp;
}

}  // namespace arnn
