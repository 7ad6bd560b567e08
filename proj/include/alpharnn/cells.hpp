#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alpharnn/linalg.hpp"
#include "alpharnn/tape.hpp"

namespace arnn {

enum class Architecture { PlainRnn, EsRnn, AlphaRnn, AlphaTRnn, Gru, Lstm };

inline constexpr std::array<Architecture, 6> kAllArchitectures = {
    Architecture::PlainRnn, Architecture::EsRnn, Architecture::AlphaRnn,
    Architecture::AlphaTRnn, Architecture::Gru,  Architecture::Lstm};

/// Tags used in files and on the command line: rnn, es_rnn, alpha_rnn,
/// alpha_t_rnn, gru, lstm.
std::string to_string(Architecture arch);
Architecture parse_architecture(std::string_view tag);

/// Which hidden state feeds the affine output layer. Smoothed reads h~ for
/// the smoothed cells; Unsmoothed reads h^ (the plain-RNN style readout).
/// Plain RNN and LSTM ignore it.
enum class Readout { Smoothed, Unsmoothed };
enum class Activation { Tanh, Identity };

std::string to_string(Readout r);
std::string to_string(Activation a);

/// Named parameter slots. Each architecture uses a subset.
enum class Slot : int {
  Wh, Uh, bh, Wy, by, AlphaRaw,
  Wa, Ua, ba,  // smoothing gate (alpha_t-RNN, GRU) / forget gate (LSTM)
  Wr, Ur, br,  // reset gate (GRU) / output gate (LSTM)
  Wz, Uz, bz,  // LSTM input gate
  Wc, Uc, bc,  // LSTM cell candidate
  Count
};
inline constexpr int kSlotCount = static_cast<int>(Slot::Count);

std::string_view slot_name(Slot s);
Slot parse_slot(std::string_view name);
/// True for weight matrices (W_*, U_*, W_y); these carry the L1 penalty.
bool is_weight_matrix(Slot s);
const std::vector<Slot>& slots_for(Architecture arch);

struct Dims {
  Eigen::Index input = 1;    // d
  Eigen::Index hidden = 1;   // H
  Eigen::Index output = 1;   // n
  Eigen::Index seq_len = 1;  // p
};

struct CellParams {
  Architecture arch = Architecture::PlainRnn;
  Dims dims;
  Readout readout = Readout::Smoothed;
  Activation activation = Activation::Tanh;
  std::array<Matrix, kSlotCount> values;

  Matrix& operator[](Slot s) { return values[static_cast<int>(s)]; }
  const Matrix& operator[](Slot s) const { return values[static_cast<int>(s)]; }

  const std::vector<Slot>& slots() const { return slots_for(arch); }
  bool has_static_alpha() const {
    return arch == Architecture::AlphaRnn || arch == Architecture::EsRnn;
  }
  /// sigmoid(alpha_raw); only for alpha-RNN and ES-RNN.
  double alpha() const;
  Eigen::Index parameter_count() const;
};

/// Expected shape of a slot for given dimensions.
std::pair<Eigen::Index, Eigen::Index> slot_shape(Slot s, const Dims& dims);

/// All-zero parameters with correct shapes (alpha_raw = 0, i.e. alpha = 0.5).
CellParams zero_cell(Architecture arch, const Dims& dims);

struct InitOptions {
  /// Starting smoothing level: alpha-RNN/ES-RNN alpha_raw and the alpha_t-RNN
  /// gate bias are set to logit(initial_alpha).
  double initial_alpha = 0.95;
  Readout readout = Readout::Smoothed;
  Activation activation = Activation::Tanh;
};

/// Glorot-uniform input/output weights, orthogonal recurrence weights, zero
/// biases (LSTM forget-gate bias 1).
CellParams init_cell(Architecture arch, const Dims& dims, Rng& rng, const InitOptions& opts = {});

/// Throws UsageError if any used slot has the wrong shape or a non-finite entry.
void validate(const CellParams& params);

/// Number of lags for (1 - alpha)^s to fall to one half.
double half_life(double alpha);

// ---------------------------------------------------------------------------
// Evaluation policies. Cell recurrences are written once against this small
// interface and run either eagerly on Eigen matrices or recorded on a tape.
// ---------------------------------------------------------------------------

struct EvalOps {
  using Value = Matrix;

  Value matmul(const Value& a, const Value& b) const { return a * b; }
  Value add(const Value& a, const Value& b) const {
    if (b.rows() == a.rows() && b.cols() == a.cols()) return a + b;
    if (b.size() == 1) return a.array() + b(0, 0);
    return a.colwise() + b.col(0);
  }
  Value hadamard(const Value& a, const Value& b) const { return a.cwiseProduct(b); }
  Value tanh(const Value& a) const { return tanh_act(a); }
  Value sigmoid(const Value& a) const { return sigmoid_act(a); }
  Value activate(Activation act, const Value& a) const {
    return act == Activation::Tanh ? tanh(a) : a;
  }
  Value mix(const Value& w, const Value& a, const Value& b) const {
    if (w.size() == 1) return w(0, 0) * a + (1.0 - w(0, 0)) * b;
    return w.cwiseProduct(a) + (Value::Ones(w.rows(), w.cols()) - w).cwiseProduct(b);
  }
  Value zeros(Eigen::Index r, Eigen::Index c) const { return Value::Zero(r, c); }
};

struct TapeOps {
  using Value = ad::Var;
  ad::Tape& tape;

  Value matmul(Value a, Value b) const { return tape.matmul(a, b); }
  Value add(Value a, Value b) const { return tape.add(a, b); }
  Value hadamard(Value a, Value b) const { return tape.hadamard(a, b); }
  Value tanh(Value a) const { return tape.tanh(a); }
  Value sigmoid(Value a) const { return tape.sigmoid(a); }
  Value activate(Activation act, Value a) const {
    return act == Activation::Tanh ? tape.tanh(a) : a;
  }
  Value mix(Value w, Value a, Value b) const { return tape.mix(w, a, b); }
  Value zeros(Eigen::Index r, Eigen::Index c) const { return tape.constant(Matrix::Zero(r, c)); }
};

template <typename V>
using Weights = std::array<V, kSlotCount>;

template <typename V>
struct BasicCellState {
  V h_hat;        // unsmoothed hidden state (LSTM: h_t)
  V h_tilde;      // smoothed hidden state (plain RNN/LSTM: copy of h_hat)
  V cell_memory;  // LSTM c_t
  V alpha_t;      // last smoothing/forget gate (dynamic cells)
};

using CellState = BasicCellState<Matrix>;

/// Cell-level settings the recurrences need besides the weights.
struct CellShape {
  Architecture arch;
  Activation activation;
  Readout readout;
  Eigen::Index hidden;
};

inline CellShape shape_of(const CellParams& p) {
  return {p.arch, p.activation, p.readout, p.dims.hidden};
}

namespace detail {

template <class Ops, class V = typename Ops::Value>
V affine(const Ops& ops, const Weights<V>& w, Slot W, Slot U, Slot b, const V& x, const V* h) {
  V pre = ops.matmul(w[static_cast<int>(W)], x);
  if (h) pre = ops.add(pre, ops.matmul(w[static_cast<int>(U)], *h));
  return ops.add(pre, w[static_cast<int>(b)]);
}

}  // namespace detail

/// One recurrence step. `alpha` is the precomputed sigmoid(alpha_raw) for the
/// static-alpha cells (ignored otherwise). With `window_start` set, the
/// recurrent term U_h h_{s-1} in the hidden-state update is dropped, which is
/// the sequence starting condition h^ = act(W_h x + b_h).
template <class Ops, class V = typename Ops::Value>
BasicCellState<V> cell_step(const Ops& ops, const CellShape& shape, const Weights<V>& w,
                            const V& alpha, const BasicCellState<V>& s, const V& x,
                            bool window_start) {
  using detail::affine;
  BasicCellState<V> out = s;
  const Activation act = shape.activation;
  switch (shape.arch) {
    case Architecture::PlainRnn: {
      out.h_hat = ops.activate(act, affine(ops, w, Slot::Wh, Slot::Uh, Slot::bh, x,
                                           window_start ? nullptr : &s.h_hat));
      out.h_tilde = out.h_hat;
      break;
    }
    case Architecture::EsRnn: {
      // Plain recurrence; smoothing only on the output path.
      out.h_hat = ops.activate(act, affine(ops, w, Slot::Wh, Slot::Uh, Slot::bh, x,
                                           window_start ? nullptr : &s.h_hat));
      out.h_tilde = ops.mix(alpha, out.h_hat, s.h_tilde);
      break;
    }
    case Architecture::AlphaRnn: {
      out.h_hat = ops.activate(act, affine(ops, w, Slot::Wh, Slot::Uh, Slot::bh, x,
                                           window_start ? nullptr : &s.h_tilde));
      out.h_tilde = ops.mix(alpha, out.h_hat, s.h_tilde);
      break;
    }
    case Architecture::AlphaTRnn: {
      out.alpha_t = ops.sigmoid(affine(ops, w, Slot::Wa, Slot::Ua, Slot::ba, x, &s.h_tilde));
      out.h_hat = ops.activate(act, affine(ops, w, Slot::Wh, Slot::Uh, Slot::bh, x,
                                           window_start ? nullptr : &s.h_tilde));
      out.h_tilde = ops.mix(out.alpha_t, out.h_hat, s.h_tilde);
      break;
    }
    case Architecture::Gru: {
      const V reset = ops.sigmoid(affine(ops, w, Slot::Wr, Slot::Ur, Slot::br, x, &s.h_tilde));
      out.alpha_t = ops.sigmoid(affine(ops, w, Slot::Wa, Slot::Ua, Slot::ba, x, &s.h_tilde));
      const V gated = ops.hadamard(reset, s.h_tilde);
      out.h_hat = ops.activate(act, affine(ops, w, Slot::Wh, Slot::Uh, Slot::bh, x,
                                           window_start ? nullptr : &gated));
      out.h_tilde = ops.mix(out.alpha_t, out.h_hat, s.h_tilde);
      break;
    }
    case Architecture::Lstm: {
      const V output_gate = ops.sigmoid(affine(ops, w, Slot::Wr, Slot::Ur, Slot::br, x, &s.h_hat));
      out.alpha_t = ops.sigmoid(affine(ops, w, Slot::Wa, Slot::Ua, Slot::ba, x, &s.h_hat));
      const V input_gate = ops.sigmoid(affine(ops, w, Slot::Wz, Slot::Uz, Slot::bz, x, &s.h_hat));
      const V candidate = ops.activate(act, affine(ops, w, Slot::Wc, Slot::Uc, Slot::bc, x, &s.h_hat));
      out.cell_memory = ops.add(ops.hadamard(out.alpha_t, s.cell_memory),
                                ops.hadamard(input_gate, candidate));
      out.h_hat = ops.hadamard(output_gate, ops.activate(act, out.cell_memory));
      out.h_tilde = out.h_hat;
      break;
    }
    default:
      throw UsageError("cell_step: unknown architecture");
  }
  return out;
}

/// Hidden state that the output layer reads.
template <class V>
const V& readout_state(const CellShape& shape, const BasicCellState<V>& s) {
  switch (shape.arch) {
    case Architecture::PlainRnn:
    case Architecture::Lstm:
      return s.h_hat;
    default:
      return shape.readout == Readout::Smoothed ? s.h_tilde : s.h_hat;
  }
}

template <class Ops, class V = typename Ops::Value>
BasicCellState<V> zero_state(const Ops& ops, Eigen::Index hidden, Eigen::Index batch) {
  V z = ops.zeros(hidden, batch);
  return {z, z, z, z};
}

/// Runs the recurrence over a window of inputs (each d x B) from `initial`
/// and returns every intermediate state. `stream_start` applies the
/// sequence starting condition at the first step.
template <class Ops, class V = typename Ops::Value>
std::vector<BasicCellState<V>> run_window(const Ops& ops, const CellShape& shape,
                                          const Weights<V>& w, std::span<const V> inputs,
                                          const BasicCellState<V>& initial, bool stream_start) {
  if (inputs.empty()) throw UsageError("run_window: empty input window");
  V alpha{};
  if (shape.arch == Architecture::AlphaRnn || shape.arch == Architecture::EsRnn)
    alpha = ops.sigmoid(w[static_cast<int>(Slot::AlphaRaw)]);
  std::vector<BasicCellState<V>> states;
  states.reserve(inputs.size());
  BasicCellState<V> s = initial;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    s = cell_step(ops, shape, w, alpha, s, inputs[k], stream_start && k == 0);
    states.push_back(s);
  }
  return states;
}

/// Full forward pass: zero initial state, recurrence across the window,
/// affine readout W_y h + b_y of the final state. Returns n x B.
template <class Ops, class V = typename Ops::Value>
V forward_window(const Ops& ops, const CellShape& shape, const Weights<V>& w,
                 std::span<const V> inputs, Eigen::Index batch) {
  auto states = run_window(ops, shape, w, inputs, zero_state(ops, shape.hidden, batch), false);
  const V& h = readout_state(shape, states.back());
  return ops.add(ops.matmul(w[static_cast<int>(Slot::Wy)], h), w[static_cast<int>(Slot::by)]);
}

/// Copies the used parameter matrices into an eager weight set.
Weights<Matrix> eval_weights(const CellParams& params);
/// Records every used parameter as a tracked tape leaf.
Weights<ad::Var> tape_weights(ad::Tape& tape, const CellParams& params);

/// Prediction for a single window given as a d x p matrix (column k is lag
/// position k, oldest first).
Vector forward_sequence(const CellParams& params, const Matrix& window);
Vector forward_sequence(const CellParams& params, std::span<const Vector> window);

/// Batched prediction: steps[k] is d x B (window position k for B samples).
Matrix forward_batch(const CellParams& params, std::span<const Matrix> steps);

/// Every intermediate state for one window from the zero state.
std::vector<CellState> sequence_states(const CellParams& params, const Matrix& window);

/// Sliding-window evaluation over a whole series where each window of
/// length p starts from the smoothed state carried over from the previous
/// window (the exponentially smoothed history of window-start states). With
/// alpha = 1 this has exactly p lags of memory; with alpha < 1 the carried
/// state supplies memory beyond the window.
struct StreamResult {
  std::vector<Eigen::Index> times;  // index of the last input in each window
  Matrix outputs;                   // n x T readouts
  Matrix hidden;                    // H x T readout hidden state per window
  Matrix alpha_t;                   // H x T final smoothing gate (dynamic cells)
};
StreamResult stream_forward(const CellParams& params, const Matrix& inputs_by_row);

}  // namespace arnn
