#include "alpharnn/training.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace arnn {

std::string to_string(LossKind k) { return k == LossKind::Mse ? "mse" : "mae"; }

LossKind parse_loss_kind(std::string_view s) {
  if (s == "mse") return LossKind::Mse;
  if (s == "mae") return LossKind::Mae;
  throw UsageError("unknown loss kind '" + std::string(s) + "' (expected mse or mae)");
}

void TrainConfig::check() const {
  if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (patience < 1) throw UsageError("patience must be >= 1");
  if (!(min_delta >= 0.0)) throw UsageError("min_delta must be >= 0");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be > 0");
  if (!(lambda1 >= 0.0)) throw UsageError("lambda1 must be >= 0");
}

double loss(const Matrix& pred, const Matrix& target, const CellParams& params, double lambda1,
            LossKind kind) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw UsageError("loss: prediction and target shapes differ");
  if (pred.size() == 0) throw UsageError("loss: empty prediction");
  const Matrix e = pred - target;
  double value = kind == LossKind::Mse ? e.squaredNorm() / double(e.size())
                                       : e.cwiseAbs().sum() / double(e.size());
  if (lambda1 != 0.0)
    for (Slot s : params.slots())
      if (is_weight_matrix(s)) value += lambda1 * params[s].cwiseAbs().sum();
  return value;
}

ad::Var loss(ad::Tape& tape, ad::Var pred, ad::Var target, const Weights<ad::Var>& weights,
             const CellParams& params, double lambda1, LossKind kind) {
  const Matrix& pv = tape.value(pred);
  const Matrix& tv = tape.value(target);
  if (pv.rows() != tv.rows() || pv.cols() != tv.cols())
    throw UsageError("loss: prediction and target shapes differ");
  const ad::Var err = tape.sub(pred, target);
  ad::Var total = kind == LossKind::Mse ? tape.mean_square(err) : tape.mean_abs(err);
  if (lambda1 != 0.0) {
    for (Slot s : params.slots()) {
      if (!is_weight_matrix(s)) continue;
      total = tape.add(total, tape.scale(tape.sum_abs(weights[static_cast<int>(s)]), lambda1));
    }
  }
  return total;
}

double loss_and_gradient(const CellParams& params, const Batch& batch, double lambda1,
                         LossKind kind, ParamGrads& grads) {
  ad::Tape tape;
  const auto w = tape_weights(tape, params);
  std::vector<ad::Var> inputs;
  inputs.reserve(batch.steps.size());
  for (const Matrix& x : batch.steps) inputs.push_back(tape.constant(x));
  TapeOps ops{tape};
  const ad::Var pred = forward_window(ops, shape_of(params), w, std::span<const ad::Var>(inputs),
                                      batch.size());
  const ad::Var target = tape.constant(batch.targets);
  const ad::Var l = loss(tape, pred, target, w, params, lambda1, kind);
  const auto g = tape.backward(l);
  for (Slot s : params.slots()) grads[static_cast<int>(s)] = g[w[static_cast<int>(s)]];
  return tape.scalar(l);
}

void adam_update(long long& step, std::span<Matrix* const> params,
                 std::span<const Matrix* const> grads, std::span<Matrix* const> first,
                 std::span<Matrix* const> second, double lr, double beta1, double beta2,
                 double eps) {
  for (const Matrix* g : grads)
    if (!g->allFinite()) throw TrainingError("adam: non-finite gradient");
  ++step;
  const double c1 = 1.0 - std::pow(beta1, double(step));
  const double c2 = 1.0 - std::pow(beta2, double(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = *first[i];
    Matrix& v = *second[i];
    const Matrix& g = *grads[i];
    if (m.size() == 0) m = Matrix::Zero(g.rows(), g.cols());
    if (v.size() == 0) v = Matrix::Zero(g.rows(), g.cols());
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseAbs2();
    params[i]->array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

void adam_step(AdamState& state, CellParams& params, const ParamGrads& grads, double lr) {
  std::vector<Matrix*> p, m, v;
  std::vector<const Matrix*> g;
  for (Slot s : params.slots()) {
    const int i = static_cast<int>(s);
    if (grads[i].rows() != params[s].rows() || grads[i].cols() != params[s].cols())
      throw UsageError("adam_step: gradient for " + std::string(slot_name(s)) + " has wrong shape");
    p.push_back(&params[s]);
    g.push_back(&grads[i]);
    m.push_back(&state.first[i]);
    v.push_back(&state.second[i]);
  }
  adam_update(state.step, p, g, m, v, lr, state.beta1, state.beta2, state.eps);
}

double clip_global_norm(ParamGrads& grads, double max_norm) {
  double sq = 0.0;
  for (const Matrix& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (Matrix& g : grads) g *= f;
  }
  return norm;
}

FitReport fit(CellParams& cell, const WindowedDataset& data, const TrainConfig& cfg) {
  return fit(cell, data, data.train(), cfg);
}

FitReport fit(CellParams& cell, const WindowedDataset& data, WindowRange train,
              const TrainConfig& cfg) {
  cfg.check();
  validate(cell);
  if (train.size() <= 0) throw UsageError("fit: empty training set");
  if (cell.dims.seq_len != data.seq_len)
    throw UsageError("fit: cell sequence length does not match dataset p");
  if (cell.dims.input != data.features.cols())
    throw UsageError("fit: cell input size does not match dataset feature count");

  // Mini-batches are taken in time order, never shuffled.
  std::vector<Batch> batches;
  for (auto b = train.begin; b < train.end; b += cfg.batch_size)
    batches.push_back(data.batch({b, std::min(train.end, b + cfg.batch_size)}));

  FitReport report;
  report.architecture = to_string(cell.arch);
  AdamState adam;
  ParamGrads grads;
  const auto start = std::chrono::steady_clock::now();
  double previous = std::numeric_limits<double>::quiet_NaN();
  int quiet = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs && !report.early_stopped; ++epoch) {
    double epoch_loss = 0.0;
    int done = 0;
    for (const Batch& batch : batches) {
      const double l = loss_and_gradient(cell, batch, cfg.lambda1, cfg.loss, grads);
      if (!std::isfinite(l))
        throw TrainingError("fit: non-finite loss at epoch " + std::to_string(epoch));
      clip_global_norm(grads, cfg.clip_norm);
      adam_step(adam, cell, grads, cfg.learning_rate);
      ++report.updates;
      epoch_loss += l;
      ++done;
      quiet = (std::isfinite(previous) && std::abs(l - previous) < cfg.min_delta) ? quiet + 1 : 0;
      previous = l;
      if (quiet >= cfg.patience) {
        report.early_stopped = true;
        break;
      }
    }
    report.loss_trace.push_back(epoch_loss / done);
    report.stopping_epoch = epoch;
  }
  report.training_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cell.has_static_alpha()) {
    report.alpha = cell.alpha();
    if (*report.alpha > 0.0 && *report.alpha < 1.0) report.half_life = half_life(*report.alpha);
  }
  return report;
}

double evaluate_loss(const CellParams& cell, const WindowedDataset& data, WindowRange range,
                     LossKind kind) {
  const Batch b = data.batch(range);
  return loss(forward_batch(cell, b.steps), b.targets, cell, 0.0, kind);
}

std::vector<std::pair<WindowRange, WindowRange>> cv_folds(Eigen::Index windows, int folds) {
  constexpr Eigen::Index kMinBlock = 10;
  if (folds < 1) throw UsageError("cross-validation needs at least one fold");
  const Eigen::Index pieces = folds + 1;
  if (windows < pieces * kMinBlock)
    throw UsageError("cross-validation: " + std::to_string(windows) + " windows are too few for " +
                     std::to_string(folds) + " folds (need " +
                     std::to_string(pieces * kMinBlock) + ")");
  std::vector<std::pair<WindowRange, WindowRange>> out;
  auto edge = [&](Eigen::Index k) { return k * windows / pieces; };
  for (int k = 0; k < folds; ++k) out.push_back({{0, edge(k + 1)}, {edge(k + 1), edge(k + 2)}});
  return out;
}

CvResult cross_validate(Architecture arch, const WindowedDataset& data, const CvGrid& grid,
                        const TrainConfig& cfg, const InitOptions& init) {
  if (grid.hidden_sizes.empty() || grid.lambda1s.empty())
    throw UsageError("cross-validation grid must be non-empty");
  const auto folds = cv_folds(data.n_train + data.n_validation, grid.folds);
  CvResult result;
  bool have_best = false;
  std::uint64_t grid_index = 0;
  for (Eigen::Index H : grid.hidden_sizes) {
    for (double lambda1 : grid.lambda1s) {
      double total = 0.0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        TrainConfig c = cfg;
        c.lambda1 = lambda1;
        c.seed = derive_seed(cfg.seed, grid_index, f);
        Rng rng(c.seed);
        Dims dims{data.features.cols(), H, 1, data.seq_len};
        CellParams cell = init_cell(arch, dims, rng, init);
        fit(cell, data, folds[f].first, c);
        const double v = evaluate_loss(cell, data, folds[f].second, cfg.loss);
        result.scores.push_back({H, lambda1, static_cast<int>(f), v});
        total += v;
      }
      const double mean = total / double(folds.size());
      // Ties go to the smaller model, then the smaller penalty.
      const bool better =
          !have_best || mean < result.best_score ||
          (mean == result.best_score &&
           (H < result.best_hidden || (H == result.best_hidden && lambda1 < result.best_lambda1)));
      if (better) {
        have_best = true;
        result.best_score = mean;
        result.best_hidden = H;
        result.best_lambda1 = lambda1;
      }
      ++grid_index;
    }
  }
  return result;
}

void write_fit_report(std::ostream& os, const FitReport& r) {
  os << std::setprecision(17);
  os << "architecture=" << r.architecture << '\n';
  os << "stopping_epoch=" << r.stopping_epoch << '\n';
  os << "early_stopped=" << (r.early_stopped ? "true" : "false") << '\n';
  os << "updates=" << r.updates << '\n';
  if (!r.checkpoint.empty()) os << "checkpoint=" << r.checkpoint << '\n';
  if (r.alpha) os << "alpha=" << *r.alpha << '\n';
  if (r.half_life) os << "half_life=" << *r.half_life << '\n';
  os << "epoch,train_loss\n";
  for (std::size_t i = 0; i < r.loss_trace.size(); ++i) os << i + 1 << ',' << r.loss_trace[i] << '\n';
}

}  // namespace arnn
