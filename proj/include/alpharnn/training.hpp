#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alpharnn/cells.hpp"
#include "alpharnn/forecasting.hpp"

namespace arnn {

enum class LossKind { Mse, Mae };

std::string to_string(LossKind k);
LossKind parse_loss_kind(std::string_view s);

struct TrainConfig {
  int max_epochs = 2000;
  Eigen::Index batch_size = 1000;
  /// Consecutive mini-batch updates whose loss change is below min_delta
  /// before training stops.
  int patience = 50;
  double min_delta = 1e-6;
  double learning_rate = 1e-3;
  double lambda1 = 0.0;
  LossKind loss = LossKind::Mse;
  std::uint64_t seed = 0;
  /// Global gradient norm cap; <= 0 disables clipping.
  double clip_norm = 5.0;

  void check() const;
};

struct FitReport {
  std::string architecture;
  std::vector<double> loss_trace;  // mean mini-batch loss per epoch
  int stopping_epoch = 0;
  bool early_stopped = false;
  long long updates = 0;
  double training_seconds = 0.0;
  std::string checkpoint;
  std::optional<double> alpha;
  std::optional<double> half_life;
};

/// Gradients indexed by parameter slot (unused slots empty).
using ParamGrads = std::array<Matrix, kSlotCount>;

/// Prediction loss plus lambda1 * sum |w| over weight-matrix entries.
double loss(const Matrix& pred, const Matrix& target, const CellParams& params, double lambda1,
            LossKind kind);

/// Tape version of loss(); `weights` are the tape leaves of `params`.
ad::Var loss(ad::Tape& tape, ad::Var pred, ad::Var target, const Weights<ad::Var>& weights,
             const CellParams& params, double lambda1, LossKind kind);

/// Loss of a batch and its gradient with respect to every used parameter.
double loss_and_gradient(const CellParams& params, const Batch& batch, double lambda1,
                         LossKind kind, ParamGrads& grads);

/// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
struct AdamState {
  long long step = 0;
  ParamGrads first;
  ParamGrads second;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Generic Adam update over parallel lists of parameters, gradients and
/// moment buffers. Throws TrainingError on a non-finite gradient.
void adam_update(long long& step, std::span<Matrix* const> params,
                 std::span<const Matrix* const> grads, std::span<Matrix* const> first,
                 std::span<Matrix* const> second, double lr, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

void adam_step(AdamState& state, CellParams& params, const ParamGrads& grads, double lr);

/// Scales all gradients down so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_global_norm(ParamGrads& grads, double max_norm);

/// Trains `cell` in place on the training block of `data`.
FitReport fit(CellParams& cell, const WindowedDataset& data, const TrainConfig& cfg);
FitReport fit(CellParams& cell, const WindowedDataset& data, WindowRange train,
              const TrainConfig& cfg);

/// Prediction loss (no penalty) of `cell` over a window range.
double evaluate_loss(const CellParams& cell, const WindowedDataset& data, WindowRange range,
                     LossKind kind);

struct CvGrid {
  std::vector<Eigen::Index> hidden_sizes = {5, 10, 20};
  std::vector<double> lambda1s = {0.0, 1e-3, 1e-2};
  int folds = 5;
};

struct CvScore {
  Eigen::Index hidden;
  double lambda1;
  int fold;
  double validation_loss;
};

struct CvResult {
  Eigen::Index best_hidden = 0;
  double best_lambda1 = 0.0;
  double best_score = 0.0;
  std::vector<CvScore> scores;  // grid-major, then fold
};

/// Expanding-window time-series cross-validation over the train +
/// validation windows: the block is cut into folds + 1 contiguous pieces and
/// fold k trains on pieces 0..k and validates on piece k + 1.
CvResult cross_validate(Architecture arch, const WindowedDataset& data, const CvGrid& grid,
                        const TrainConfig& cfg, const InitOptions& init = {});

/// Windows of each expanding-window fold, for inspection and tests.
std::vector<std::pair<WindowRange, WindowRange>> cv_folds(Eigen::Index windows, int folds);

/// Key-value header followed by an "epoch,train_loss" CSV trace.
void write_fit_report(std::ostream& os, const FitReport& report);

}  // namespace arnn
