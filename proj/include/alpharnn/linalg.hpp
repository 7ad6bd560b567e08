#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

#include "alpharnn/error.hpp"

namespace arnn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// ---------------------------------------------------------------------------
// Elementwise activations. Free functions over any dense expression so they
// compose with Eigen expressions without forcing a temporary.
// ---------------------------------------------------------------------------

template <typename Derived>
auto tanh_act(const Eigen::MatrixBase<Derived>& v) {
  return v.array().tanh().matrix();
}

template <typename Scalar>
inline Scalar sigmoid(Scalar x) {
  // Split on sign so exp never overflows.
  if (x >= Scalar(0)) {
    const Scalar e = std::exp(-x);
    return Scalar(1) / (Scalar(1) + e);
  }
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
auto sigmoid_act(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([](Scalar x) { return sigmoid(x); });
}

/// log(1 + e^x), stable for large |x|.
template <typename Scalar>
inline Scalar softplus(Scalar x) {
  if (x > Scalar(30)) return x;
  return std::log1p(std::exp(x));
}

/// Inverse of softplus for y > 0.
template <typename Scalar>
inline Scalar softplus_inverse(Scalar y) {
  if (y > Scalar(30)) return y;
  return std::log(std::expm1(y));
}

template <typename Scalar>
inline Scalar logit(Scalar p) {
  return std::log(p / (Scalar(1) - p));
}

/// Matrix-vector product with a dimension check.
Vector matvec(const Matrix& m, const Vector& v);

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

/// 64-bit seeded generator. Identical seeds give identical draw sequences on
/// every platform: the distributions are implemented here rather than taken
/// from <random>, whose distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Marsaglia's polar method.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent child seed from a master seed and a path of
/// indices (grid point, fold, draw, ...). SplitMix64 finaliser.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Glorot & Bengio uniform initialisation on +-sqrt(6 / (rows + cols)).
Matrix glorot_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Orthogonal n x n matrix from classical Gram-Schmidt on a Gaussian sample.
Matrix orthogonal_init(Rng& rng, Eigen::Index n);

}  // namespace arnn
