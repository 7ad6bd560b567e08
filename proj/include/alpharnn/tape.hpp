#pragma once

// Reverse-mode gradient tape over dense matrices.
//
// Every node holds a dense value; a column vector is the single-sample case
// and an H x B matrix carries a mini-batch of B samples through the same
// graph. Nodes are appended in evaluation order, so the node list is always
// topologically sorted and the backward sweep is a single reverse pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "alpharnn/error.hpp"
#include "alpharnn/linalg.hpp"

namespace arnn::ad {

/// Handle to a node on a tape.
struct Var {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
  friend bool operator==(Var, Var) = default;
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Tanh,
  Sigmoid,
  Softplus,
  Mix,
  Scale,
  Log,
  Square,
  Div,
  Sum,
  MeanSquare,
  MeanAbs,
  SumAbs,
  LogScaleMixture,
};

template <typename Scalar>
class BasicTape;

/// Adjoints of the tracked leaves after a backward sweep.
template <typename Scalar>
class BasicGradients {
 public:
  using Mat = MatrixX<Scalar>;

  const Mat& operator[](Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.index) >= grads_.size() || !tracked_[v.index])
      throw UsageError("gradient requested for an untracked node");
    return grads_[v.index];
  }

 private:
  friend class BasicTape<Scalar>;
  std::vector<Mat> grads_;
  std::vector<bool> tracked_;
};

template <typename Scalar>
class BasicTape {
 public:
  using Mat = MatrixX<Scalar>;
  using Gradients = BasicGradients<Scalar>;

  BasicTape() { nodes_.reserve(256); }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  const Mat& value(Var v) const { return node(v).value; }
  Scalar scalar(Var v) const {
    const Mat& m = value(v);
    if (m.size() != 1) throw UsageError("tape: node is not scalar");
    return m(0, 0);
  }

  // --- leaves -------------------------------------------------------------

  /// Untracked leaf: its adjoint is discarded.
  Var constant(Mat value) { return push(Op::Leaf, std::move(value), {}, false); }
  /// Tracked leaf: backward() reports its adjoint.
  Var parameter(Mat value) { return push(Op::Leaf, std::move(value), {}, true); }

  // --- primitives ---------------------------------------------------------

  Var matmul(Var a, Var b) {
    const Mat& x = value(a);
    const Mat& y = value(b);
    if (x.cols() != y.rows())
      throw UsageError("matmul: inner dimensions differ (" + std::to_string(x.cols()) + " vs " +
                       std::to_string(y.rows()) + ")");
    return push(Op::MatMul, x * y, {a, b});
  }

  /// a + b. b may also be a column vector broadcast across a's columns or a
  /// 1 x 1 value broadcast everywhere.
  Var add(Var a, Var b) { return push(Op::Add, value(a) + broadcast(b, value(a), "add"), {a, b}); }
  Var sub(Var a, Var b) { return push(Op::Sub, value(a) - broadcast(b, value(a), "sub"), {a, b}); }

  /// Elementwise product; either side may be 1 x 1.
  Var hadamard(Var a, Var b) {
    if (value(a).size() == 1 && value(b).size() != 1) std::swap(a, b);
    return push(Op::Hadamard, value(a).cwiseProduct(broadcast(b, value(a), "hadamard")), {a, b});
  }

  Var tanh(Var a) { return push(Op::Tanh, value(a).array().tanh().matrix(), {a}); }
  Var sigmoid(Var a) { return push(Op::Sigmoid, sigmoid_act(value(a)), {a}); }
  Var softplus(Var a) {
    return push(Op::Softplus, value(a).unaryExpr([](Scalar x) { return arnn::softplus(x); }), {a});
  }

  /// Convex combination w * a + (1 - w) * b, with w either 1 x 1 (a shared
  /// scalar weight) or the same shape as a (Hadamard weights).
  Var mix(Var w, Var a, Var b) {
    const Mat& x = value(a);
    const Mat& y = value(b);
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw UsageError("mix: operand shapes differ");
    Mat wv = broadcast(w, x, "mix");
    Mat out = wv.cwiseProduct(x) + (Mat::Ones(x.rows(), x.cols()) - wv).cwiseProduct(y);
    return push(Op::Mix, std::move(out), {w, a, b});
  }

  Var scale(Var a, Scalar c) {
    Var out = push(Op::Scale, value(a) * c, {a});
    nodes_[out.index].k[0] = c;
    return out;
  }

  Var log(Var a) { return push(Op::Log, value(a).array().log().matrix(), {a}); }
  Var square(Var a) { return push(Op::Square, value(a).array().square().matrix(), {a}); }
  Var div(Var a, Var b) {
    return push(Op::Div, value(a).cwiseQuotient(broadcast(b, value(a), "div")), {a, b});
  }

  // --- reductions to 1 x 1 -------------------------------------------------

  Var sum(Var a) { return push(Op::Sum, scalar_mat(value(a).sum()), {a}); }
  Var mean_square(Var a) {
    return push(Op::MeanSquare, scalar_mat(value(a).squaredNorm() / Scalar(value(a).size())), {a});
  }
  Var mean_abs(Var a) {
    return push(Op::MeanAbs, scalar_mat(value(a).cwiseAbs().sum() / Scalar(value(a).size())), {a});
  }
  Var sum_abs(Var a) { return push(Op::SumAbs, scalar_mat(value(a).cwiseAbs().sum()), {a}); }

  /// Sum over entries of log(pi N(x; 0, s1^2) + (1 - pi) N(x; 0, s2^2)).
  Var log_scale_mixture_sum(Var a, Scalar pi, Scalar s1, Scalar s2) {
    if (!(pi >= 0 && pi <= 1) || !(s1 > 0) || !(s2 > 0))
      throw UsageError("log_scale_mixture_sum: need pi in [0,1] and positive scales");
    Scalar total = 0;
    const Mat& x = value(a);
    for (Eigen::Index i = 0; i < x.size(); ++i) total += mixture_terms(x(i), pi, s1, s2).log_density;
    Var out = push(Op::LogScaleMixture, scalar_mat(total), {a});
    auto& n = nodes_[out.index];
    n.k[0] = pi;
    n.k[1] = s1;
    n.k[2] = s2;
    return out;
  }

  // --- backward -------------------------------------------------------------

  /// dLoss/dtheta for every tracked leaf recorded before `loss`.
  Gradients backward(Var loss) const {
    if (value(loss).size() != 1) throw UsageError("backward: loss node is not scalar");
    const std::size_t n = static_cast<std::size_t>(loss.index) + 1;
    std::vector<Mat> adj(n);
    adj[loss.index] = Mat::Ones(1, 1);

    for (std::size_t i = n; i-- > 0;) {
      if (adj[i].size() == 0) continue;
      const Node& nd = nodes_[i];
      const Mat& g = adj[i];
      switch (nd.op) {
        case Op::Leaf:
          break;
        case Op::MatMul:
          accumulate(adj, nd.in[0], g * value(nd.in[1]).transpose());
          accumulate(adj, nd.in[1], value(nd.in[0]).transpose() * g);
          break;
        case Op::Add:
          accumulate(adj, nd.in[0], g);
          accumulate(adj, nd.in[1], reduce_to(g, value(nd.in[1])));
          break;
        case Op::Sub:
          accumulate(adj, nd.in[0], g);
          accumulate(adj, nd.in[1], -reduce_to(g, value(nd.in[1])));
          break;
        case Op::Hadamard: {
          const Mat& a = value(nd.in[0]);
          const Mat& b = value(nd.in[1]);
          accumulate(adj, nd.in[0], g.cwiseProduct(broadcast_value(b, a)));
          accumulate(adj, nd.in[1], reduce_to(g.cwiseProduct(a), b));
          break;
        }
        case Op::Tanh:
          accumulate(adj, nd.in[0],
                     g.cwiseProduct((Scalar(1) - nd.value.array().square()).matrix()));
          break;
        case Op::Sigmoid:
          accumulate(adj, nd.in[0],
                     g.cwiseProduct((nd.value.array() * (Scalar(1) - nd.value.array())).matrix()));
          break;
        case Op::Softplus:
          accumulate(adj, nd.in[0], g.cwiseProduct(sigmoid_act(value(nd.in[0])).eval()));
          break;
        case Op::Mix: {
          const Mat& w = value(nd.in[0]);
          const Mat& a = value(nd.in[1]);
          const Mat& b = value(nd.in[2]);
          const Mat wv = broadcast_value(w, a);
          accumulate(adj, nd.in[0], reduce_to(g.cwiseProduct(a - b), w));
          accumulate(adj, nd.in[1], g.cwiseProduct(wv));
          accumulate(adj, nd.in[2], g.cwiseProduct((Mat::Ones(a.rows(), a.cols()) - wv)));
          break;
        }
        case Op::Scale:
          accumulate(adj, nd.in[0], g * nd.k[0]);
          break;
        case Op::Log:
          accumulate(adj, nd.in[0], g.cwiseQuotient(value(nd.in[0])));
          break;
        case Op::Square:
          accumulate(adj, nd.in[0], Scalar(2) * g.cwiseProduct(value(nd.in[0])));
          break;
        case Op::Div: {
          const Mat& a = value(nd.in[0]);
          const Mat bv = broadcast_value(value(nd.in[1]), a);
          accumulate(adj, nd.in[0], g.cwiseQuotient(bv));
          const Mat gb = -(g.array() * a.array() / bv.array().square()).matrix();
          accumulate(adj, nd.in[1], reduce_to(gb, value(nd.in[1])));
          break;
        }
        case Op::Sum: {
          const Mat& a = value(nd.in[0]);
          accumulate(adj, nd.in[0], Mat::Constant(a.rows(), a.cols(), g(0, 0)));
          break;
        }
        case Op::MeanSquare: {
          const Mat& a = value(nd.in[0]);
          accumulate(adj, nd.in[0], a * (Scalar(2) * g(0, 0) / Scalar(a.size())));
          break;
        }
        case Op::MeanAbs: {
          const Mat& a = value(nd.in[0]);
          accumulate(adj, nd.in[0], sign(a) * (g(0, 0) / Scalar(a.size())));
          break;
        }
        case Op::SumAbs:
          accumulate(adj, nd.in[0], sign(value(nd.in[0])) * g(0, 0));
          break;
        case Op::LogScaleMixture: {
          const Mat& a = value(nd.in[0]);
          Mat d(a.rows(), a.cols());
          for (Eigen::Index j = 0; j < a.size(); ++j)
            d(j) = g(0, 0) * mixture_terms(a(j), nd.k[0], nd.k[1], nd.k[2]).derivative;
          accumulate(adj, nd.in[0], d);
          break;
        }
      }
    }

    Gradients out;
    out.grads_.resize(n);
    out.tracked_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (nodes_[i].op != Op::Leaf || !nodes_[i].tracked) continue;
      out.tracked_[i] = true;
      out.grads_[i] = adj[i].size() ? std::move(adj[i])
                                     : Mat::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
    return out;
  }

 private:
  struct Node {
    Op op = Op::Leaf;
    bool tracked = false;
    std::array<Var, 3> in{};
    Scalar k[3] = {0, 0, 0};
    Mat value;
  };

  struct MixtureTerms {
    Scalar log_density;
    Scalar derivative;
  };

  static MixtureTerms mixture_terms(Scalar x, Scalar pi, Scalar s1, Scalar s2) {
    const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
    const Scalar l1 = pi > 0 ? std::log(pi) - std::log(s1) - x * x / (2 * s1 * s1) - half_log_2pi
                             : neg_inf;
    const Scalar l2 = pi < 1 ? std::log1p(-pi) - std::log(s2) - x * x / (2 * s2 * s2) - half_log_2pi
                             : neg_inf;
    const Scalar m = std::max(l1, l2);
    const Scalar lse = m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
    const Scalar r1 = std::exp(l1 - lse);
    const Scalar r2 = std::exp(l2 - lse);
    return {lse, -x * (r1 / (s1 * s1) + r2 / (s2 * s2))};
  }

  const Node& node(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.index) >= nodes_.size())
      throw UsageError("tape: invalid node handle");
    return nodes_[v.index];
  }

  Var push(Op op, Mat value, std::initializer_list<Var> inputs, bool tracked = false) {
    Node n;
    n.op = op;
    n.tracked = tracked;
    std::size_t k = 0;
    for (Var v : inputs) n.in[k++] = v;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  static Mat scalar_mat(Scalar s) { return Mat::Constant(1, 1, s); }

  static Mat sign(const Mat& a) {
    return a.unaryExpr([](Scalar x) { return x > 0 ? Scalar(1) : (x < 0 ? Scalar(-1) : Scalar(0)); });
  }

  static bool broadcastable(const Mat& b, const Mat& like) {
    if (b.rows() == like.rows() && b.cols() == like.cols()) return true;
    if (b.size() == 1) return true;
    return b.cols() == 1 && b.rows() == like.rows();
  }

  static Mat broadcast_value(const Mat& b, const Mat& like) {
    if (b.rows() == like.rows() && b.cols() == like.cols()) return b;
    if (b.size() == 1) return Mat::Constant(like.rows(), like.cols(), b(0, 0));
    return b.replicate(1, like.cols());
  }

  Mat broadcast(Var b, const Mat& like, const char* what) const {
    const Mat& bv = value(b);
    if (!broadcastable(bv, like))
      throw UsageError(std::string(what) + ": shape " + std::to_string(bv.rows()) + "x" +
                       std::to_string(bv.cols()) + " does not broadcast to " +
                       std::to_string(like.rows()) + "x" + std::to_string(like.cols()));
    return broadcast_value(bv, like);
  }

  // Sums a full-shape adjoint down to the shape of a broadcast operand.
  static Mat reduce_to(const Mat& g, const Mat& target) {
    if (g.rows() == target.rows() && g.cols() == target.cols()) return g;
    if (target.size() == 1) return Mat::Constant(1, 1, g.sum());
    return g.rowwise().sum();
  }

  static void accumulate(std::vector<Mat>& adj, Var v, const Mat& g) {
    Mat& a = adj[v.index];
    if (a.size() == 0) a = g;
    else a += g;
  }

  std::vector<Node> nodes_;
};

using Tape = BasicTape<double>;
using Gradients = BasicGradients<double>;

}  // namespace arnn::ad
