#include "alpharnn/cells.hpp"

#include <cmath>
#include <map>

namespace arnn {

namespace {

constexpr std::array<std::string_view, kSlotCount> kSlotNames = {
    "W_h", "U_h", "b_h", "W_y", "b_y", "alpha_raw", "W_alpha", "U_alpha", "b_alpha",
    "W_r", "U_r", "b_r", "W_z", "U_z", "b_z", "W_c", "U_c", "b_c"};

}  // namespace

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::PlainRnn: return "rnn";
    case Architecture::EsRnn: return "es_rnn";
    case Architecture::AlphaRnn: return "alpha_rnn";
    case Architecture::AlphaTRnn: return "alpha_t_rnn";
    case Architecture::Gru: return "gru";
    case Architecture::Lstm: return "lstm";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view tag) {
  static const std::map<std::string_view, Architecture> table = {
      {"rnn", Architecture::PlainRnn},       {"plain_rnn", Architecture::PlainRnn},
      {"es_rnn", Architecture::EsRnn},       {"esrnn", Architecture::EsRnn},
      {"alpha_rnn", Architecture::AlphaRnn}, {"alpha_t_rnn", Architecture::AlphaTRnn},
      {"gru", Architecture::Gru},            {"lstm", Architecture::Lstm}};
  auto it = table.find(tag);
  if (it == table.end()) throw UsageError("unknown architecture '" + std::string(tag) + "'");
  return it->second;
}

std::string to_string(Readout r) { return r == Readout::Smoothed ? "smoothed" : "unsmoothed"; }
std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

std::string_view slot_name(Slot s) { return kSlotNames[static_cast<int>(s)]; }

Slot parse_slot(std::string_view name) {
  for (int i = 0; i < kSlotCount; ++i)
    if (kSlotNames[i] == name) return static_cast<Slot>(i);
  throw UsageError("unknown parameter name '" + std::string(name) + "'");
}

bool is_weight_matrix(Slot s) {
  switch (s) {
    case Slot::bh: case Slot::by: case Slot::AlphaRaw:
    case Slot::ba: case Slot::br: case Slot::bz: case Slot::bc:
      return false;
    default:
      return true;
  }
}

const std::vector<Slot>& slots_for(Architecture arch) {
  using S = Slot;
  static const std::vector<Slot> plain = {S::Wh, S::Uh, S::bh, S::Wy, S::by};
  static const std::vector<Slot> smoothed = {S::Wh, S::Uh, S::bh, S::Wy, S::by, S::AlphaRaw};
  static const std::vector<Slot> alpha_t = {S::Wh, S::Uh, S::bh, S::Wy, S::by,
                                            S::Wa, S::Ua, S::ba};
  static const std::vector<Slot> gru = {S::Wh, S::Uh, S::bh, S::Wy, S::by, S::Wa,
                                        S::Ua, S::ba, S::Wr, S::Ur, S::br};
  static const std::vector<Slot> lstm = {S::Wy, S::by, S::Wa, S::Ua, S::ba, S::Wr, S::Ur,
                                         S::br, S::Wz, S::Uz, S::bz, S::Wc, S::Uc, S::bc};
  switch (arch) {
    case Architecture::PlainRnn: return plain;
    case Architecture::EsRnn:
    case Architecture::AlphaRnn: return smoothed;
    case Architecture::AlphaTRnn: return alpha_t;
    case Architecture::Gru: return gru;
    case Architecture::Lstm: return lstm;
  }
  throw UsageError("slots_for: unknown architecture");
}

std::pair<Eigen::Index, Eigen::Index> slot_shape(Slot s, const Dims& dims) {
  const auto H = dims.hidden, d = dims.input, n = dims.output;
  switch (s) {
    case Slot::Wh: case Slot::Wa: case Slot::Wr: case Slot::Wz: case Slot::Wc: return {H, d};
    case Slot::Uh: case Slot::Ua: case Slot::Ur: case Slot::Uz: case Slot::Uc: return {H, H};
    case Slot::bh: case Slot::ba: case Slot::br: case Slot::bz: case Slot::bc: return {H, 1};
    case Slot::Wy: return {n, H};
    case Slot::by: return {n, 1};
    case Slot::AlphaRaw: return {1, 1};
    case Slot::Count: break;
  }
  throw UsageError("slot_shape: invalid slot");
}

double CellParams::alpha() const {
  if (!has_static_alpha()) throw UsageError("alpha(): architecture has no static smoothing parameter");
  return sigmoid((*this)[Slot::AlphaRaw](0, 0));
}

Eigen::Index CellParams::parameter_count() const {
  Eigen::Index total = 0;
  for (Slot s : slots()) total += (*this)[s].size();
  return total;
}

CellParams zero_cell(Architecture arch, const Dims& dims) {
  if (dims.input < 1 || dims.hidden < 1 || dims.output < 1 || dims.seq_len < 1)
    throw UsageError("cell dimensions must all be >= 1");
  CellParams p;
  p.arch = arch;
  p.dims = dims;
  for (Slot s : slots_for(arch)) {
    auto [r, c] = slot_shape(s, dims);
    p[s] = Matrix::Zero(r, c);
  }
  return p;
}

CellParams init_cell(Architecture arch, const Dims& dims, Rng& rng, const InitOptions& opts) {
  if (!(opts.initial_alpha > 0.0 && opts.initial_alpha < 1.0))
    throw UsageError("initial_alpha must lie in (0, 1)");
  CellParams p = zero_cell(arch, dims);
  p.readout = opts.readout;
  p.activation = opts.activation;
  for (Slot s : p.slots()) {
    auto [r, c] = slot_shape(s, dims);
    switch (s) {
      case Slot::Wh: case Slot::Wa: case Slot::Wr: case Slot::Wz: case Slot::Wc: case Slot::Wy:
        p[s] = glorot_uniform(rng, r, c);
        break;
      case Slot::Uh: case Slot::Ua: case Slot::Ur: case Slot::Uz: case Slot::Uc:
        p[s] = orthogonal_init(rng, r);
        break;
      default:
        break;
    }
  }
  const double raw = logit(opts.initial_alpha);
  if (p.has_static_alpha()) p[Slot::AlphaRaw](0, 0) = raw;
  if (arch == Architecture::AlphaTRnn) p[Slot::ba].setConstant(raw);
  if (arch == Architecture::Lstm) p[Slot::ba].setOnes();
  return p;
}

void validate(const CellParams& params) {
  for (Slot s : params.slots()) {
    auto [r, c] = slot_shape(s, params.dims);
    const Matrix& m = params[s];
    if (m.rows() != r || m.cols() != c)
      throw UsageError("parameter " + std::string(slot_name(s)) + " has shape " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                       std::to_string(r) + "x" + std::to_string(c));
    if (!m.allFinite())
      throw UsageError("parameter " + std::string(slot_name(s)) + " has non-finite entries");
  }
}

double half_life(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("half_life: alpha must lie in (0, 1)");
  return -1.0 / std::log2(1.0 - alpha);
}

Weights<Matrix> eval_weights(const CellParams& params) {
  Weights<Matrix> w;
  for (Slot s : params.slots()) w[static_cast<int>(s)] = params[s];
  return w;
}

Weights<ad::Var> tape_weights(ad::Tape& tape, const CellParams& params) {
  Weights<ad::Var> w;
  for (Slot s : params.slots()) w[static_cast<int>(s)] = tape.parameter(params[s]);
  return w;
}

namespace {

void check_window_inputs(const CellParams& params, std::span<const Matrix> steps) {
  if (steps.empty()) throw UsageError("forward: empty input window");
  const auto cols = steps.front().cols();
  for (const Matrix& x : steps) {
    if (x.rows() != params.dims.input)
      throw UsageError("forward: input has " + std::to_string(x.rows()) +
                       " features, cell expects " + std::to_string(params.dims.input));
    if (x.cols() != cols) throw UsageError("forward: inconsistent batch sizes across window");
  }
}

std::vector<Matrix> columns_of(const Matrix& window) {
  std::vector<Matrix> steps;
  steps.reserve(window.cols());
  for (Eigen::Index k = 0; k < window.cols(); ++k) steps.emplace_back(window.col(k));
  return steps;
}

}  // namespace

Matrix forward_batch(const CellParams& params, std::span<const Matrix> steps) {
  check_window_inputs(params, steps);
  EvalOps ops;
  return forward_window(ops, shape_of(params), eval_weights(params), steps, steps.front().cols());
}

Vector forward_sequence(const CellParams& params, const Matrix& window) {
  const auto steps = columns_of(window);
  return forward_batch(params, steps).col(0);
}

Vector forward_sequence(const CellParams& params, std::span<const Vector> window) {
  std::vector<Matrix> steps(window.begin(), window.end());
  return forward_batch(params, steps).col(0);
}

std::vector<CellState> sequence_states(const CellParams& params, const Matrix& window) {
  const auto steps = columns_of(window);
  check_window_inputs(params, steps);
  EvalOps ops;
  return run_window(ops, shape_of(params), eval_weights(params), std::span<const Matrix>(steps),
                    zero_state(ops, params.dims.hidden, 1), false);
}

StreamResult stream_forward(const CellParams& params, const Matrix& inputs_by_row) {
  const auto p = params.dims.seq_len;
  const auto N = inputs_by_row.rows();
  if (inputs_by_row.cols() != params.dims.input)
    throw UsageError("stream_forward: input column count does not match cell input size");
  if (N < p) throw UsageError("stream_forward: series shorter than the sequence length");

  EvalOps ops;
  const CellShape shape = shape_of(params);
  const auto w = eval_weights(params);
  const auto H = params.dims.hidden;

  StreamResult out;
  const auto T = N - p + 1;
  out.outputs.resize(params.dims.output, T);
  out.hidden.resize(H, T);
  out.alpha_t = Matrix::Zero(H, T);

  CellState carry = zero_state(ops, H, 1);
  std::vector<Matrix> steps(p);
  for (Eigen::Index t = p - 1; t < N; ++t) {
    for (Eigen::Index k = 0; k < p; ++k) steps[k] = inputs_by_row.row(t - p + 1 + k).transpose();
    auto states = run_window(ops, shape, w, std::span<const Matrix>(steps), carry, true);
    const auto col = t - (p - 1);
    const Matrix& h = readout_state(shape, states.back());
    out.outputs.col(col) = (w[static_cast<int>(Slot::Wy)] * h + w[static_cast<int>(Slot::by)]);
    out.hidden.col(col) = h;
    if (states.back().alpha_t.size() == H) out.alpha_t.col(col) = states.back().alpha_t;
    out.times.push_back(t);
    carry = states.front();
  }
  return out;
}

}  // namespace arnn
