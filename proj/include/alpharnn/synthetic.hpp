#pragma once

#include <cstdint>

#include "alpharnn/cells.hpp"

namespace arnn {

/// Local level model with additive seasonality:
///   y_t = mu_t + gamma_t + u_t,        u_t ~ N(0, sigma_u2)
///   mu_t = mu_{t-1} + chi_t,           chi_t ~ N(0, sigma_chi2)
///   gamma_t = -sum_{j=1}^{s-1} gamma_{t-j} + omega_t, omega_t ~ N(0, sigma_omega2)
struct LlmConfig {
  Eigen::Index period = 24;
  Eigen::Index n = 10000;
  double sigma_u2 = 300.0;
  double sigma_chi2 = 1.0;
  double sigma_omega2 = 1.0;
  std::uint64_t seed = 0;

  void check() const;
};

struct LlmSeries {
  Vector y;
  Vector level;     // mu_t
  Vector seasonal;  // gamma_t
};

/// The first s - 1 seasonal states are N(0, sigma_omega2) draws shifted to
/// sum to zero; mu_0 = 0.
LlmSeries generate_llm(const LlmConfig& cfg);

/// Scalar alpha-RNN(p) driven by its own noisy output: W_h = U_h = phi,
/// biases 0, unsmoothed readout, y_{t+1} = h^_t + eps, eps ~ N(0, sigma_n^2).
/// Each window starts from the carried smoothed state as in stream_forward.
struct AlphaRnnDgpConfig {
  Eigen::Index seq_len = 3;
  double alpha = 1.0;
  double phi = 0.5;
  double sigma_n = 0.1;
  Eigen::Index n = 10000;
  std::uint64_t seed = 0;

  void check() const;
};

Vector generate_alpha_rnn(const AlphaRnnDgpConfig& cfg);

/// The scalar cell used by generate_alpha_rnn.
CellParams alpha_rnn_dgp_cell(const AlphaRnnDgpConfig& cfg);

/// AR(1) y_t = phi y_{t-1} + sigma e_t started at 0, with `burn_in` steps dropped.
Vector generate_ar1(double phi, double sigma, Eigen::Index n, std::uint64_t seed,
                    Eigen::Index burn_in = 100);

}  // namespace arnn
