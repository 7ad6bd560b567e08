#include "alpharnn/linalg.hpp"

#include <string>

namespace arnn {

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw UsageError("matvec: matrix has " + std::to_string(m.cols()) +
                     " columns but vector has length " + std::to_string(v.size()));
  }
  return m * v;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Matrix Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

Matrix glorot_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw UsageError("glorot_uniform: rows and cols must be >= 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.uniform(-bound, bound);
  return out;
}

Matrix orthogonal_init(Rng& rng, Eigen::Index n) {
  if (n < 1) throw UsageError("orthogonal_init: n must be >= 1");
  for (;;) {
    Matrix q = rng.normal_matrix(n, n);
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) {
      // Re-orthogonalise twice; one pass loses orthogonality at the 1e-10
      // level for ill-conditioned samples.
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      const double norm = q.col(j).norm();
      if (norm < 1e-8) ok = false;
      else q.col(j) /= norm;
    }
    if (ok) return q;
  }
}

}  // namespace arnn
