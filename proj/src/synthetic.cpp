#include "alpharnn/synthetic.hpp"

#include <cmath>

namespace arnn {

void LlmConfig::check() const {
  if (period < 2) throw UsageError("llm: period must be >= 2");
  if (n <= period) throw UsageError("llm: need n > period");
  if (sigma_u2 < 0 || sigma_chi2 < 0 || sigma_omega2 < 0)
    throw UsageError("llm: variances must be >= 0");
}

LlmSeries generate_llm(const LlmConfig& cfg) {
  cfg.check();
  Rng rng(cfg.seed);
  const auto s = cfg.period;
  const double su = std::sqrt(cfg.sigma_u2), sc = std::sqrt(cfg.sigma_chi2),
               so = std::sqrt(cfg.sigma_omega2);
  // Seasonal history gamma_{-(s-1)}..gamma_{-1}, zero-sum.
  Vector init(s - 1);
  for (Eigen::Index j = 0; j < s - 1; ++j) init(j) = so * rng.normal();
  if (s > 1) init.array() -= init.mean();

  LlmSeries out;
  out.y.resize(cfg.n);
  out.level.resize(cfg.n);
  out.seasonal.resize(cfg.n);
  auto gamma_at = [&](Eigen::Index t) {
    return t >= 0 ? out.seasonal(t) : init(s - 1 + t);
  };
  double mu = 0.0;
  for (Eigen::Index t = 0; t < cfg.n; ++t) {
    mu += sc * rng.normal();
    double g = so * rng.normal();
    for (Eigen::Index j = 1; j < s; ++j) g -= gamma_at(t - j);
    out.level(t) = mu;
    out.seasonal(t) = g;
    out.y(t) = mu + g + su * rng.normal();
  }
  return out;
}

void AlphaRnnDgpConfig::check() const {
  if (seq_len < 1) throw UsageError("alpha-rnn dgp: p must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha-rnn dgp: alpha must lie in (0, 1]");
  if (!std::isfinite(phi)) throw UsageError("alpha-rnn dgp: phi must be finite");
  if (!(sigma_n >= 0.0)) throw UsageError("alpha-rnn dgp: sigma_n must be >= 0");
  if (n < 1) throw UsageError("alpha-rnn dgp: n must be >= 1");
}

CellParams alpha_rnn_dgp_cell(const AlphaRnnDgpConfig& cfg) {
  CellParams c = zero_cell(Architecture::AlphaRnn, Dims{1, 1, 1, cfg.seq_len});
  c.readout = Readout::Unsmoothed;
  c[Slot::Wh].setConstant(cfg.phi);
  c[Slot::Uh].setConstant(cfg.phi);
  c[Slot::Wy].setOnes();
  // sigmoid(50) rounds to exactly 1.
  c[Slot::AlphaRaw](0, 0) = cfg.alpha >= 1.0 ? 50.0 : logit(cfg.alpha);
  return c;
}

Vector generate_alpha_rnn(const AlphaRnnDgpConfig& cfg) {
  cfg.check();
  const CellParams cell = alpha_rnn_dgp_cell(cfg);
  const CellShape shape = shape_of(cell);
  const auto w = eval_weights(cell);
  const auto p = cfg.seq_len;
  EvalOps ops;
  Rng rng(cfg.seed);

  // y holds p leading zeros followed by the generated values.
  Vector y = Vector::Zero(cfg.n + p);
  std::vector<Matrix> steps(p);
  CellState carry = zero_state(ops, 1, 1);
  for (Eigen::Index t = p; t < cfg.n + p; ++t) {
    for (Eigen::Index k = 0; k < p; ++k) steps[k] = Matrix::Constant(1, 1, y(t - p + k));
    const auto states = run_window(ops, shape, w, std::span<const Matrix>(steps), carry, true);
    const Matrix& h = readout_state(shape, states.back());
    y(t) = h(0, 0) + cfg.sigma_n * rng.normal();
    carry = states.front();
  }
  return y.tail(cfg.n);
}

Vector generate_ar1(double phi, double sigma, Eigen::Index n, std::uint64_t seed,
                    Eigen::Index burn_in) {
  if (n < 1 || burn_in < 0) throw UsageError("ar1: n must be >= 1 and burn_in >= 0");
  Rng rng(seed);
  Vector y(n + burn_in);
  double prev = 0.0;
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    prev = phi * prev + sigma * rng.normal();
    y(t) = prev;
  }
  return y.tail(n);
}

}  // namespace arnn
