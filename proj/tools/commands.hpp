#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alpharnn/bayes.hpp"
#include "alpharnn/training.hpp"

namespace arnn::cli {

/// $ARNN_OUTPUT_DIR, or "." when unset.
std::string default_output_dir();

struct SimulateOptions {
  std::string kind = "llm";  // llm | alpha-rnn-dgp
  std::string output;        // default <output_dir>/<kind>.csv
  std::string output_dir;
  std::uint64_t seed = 0;
  Eigen::Index n = 10000;
  Eigen::Index period = 24;
  double sigma_u2 = 300.0;
  double sigma_chi2 = 1.0;
  double sigma_omega2 = 1.0;
  Eigen::Index p = 3;
  double alpha = 1.0;
  double phi = 0.5;
  double sigma_n = 0.1;
};

struct DiagnoseOptions {
  std::string data;
  std::string column;  // default: first numeric column
  std::string output_dir;
  Eigen::Index max_lag = 40;
  int adf_max_lag = -1;  // -1: 12 (N/100)^(1/4)
  Eigen::Index max_p = 30;
  std::string p_rule = "cutoff";  // cutoff | largest
  Eigen::Index period = 0;        // > 0: also decompose and diagnose the residual
};

/// Data and windowing shared by train / forecast / bayes commands.
struct DataOptions {
  std::string data;
  std::string target;                 // default: first numeric column
  std::vector<std::string> features;  // default: the target alone
  Eigen::Index p = 10;
  Eigen::Index m = 1;
  double train_frac = 0.7;
  double val_frac = 0.1;
};

struct TrainOptions {
  DataOptions data;
  std::string arch = "alpha_rnn";
  std::string name;  // default: arch tag
  std::string output_dir;
  Eigen::Index hidden = 10;
  TrainConfig train;
  std::string loss = "mse";
  std::string readout = "smoothed";
  double initial_alpha = 0.95;
  bool cv = false;
  std::vector<Eigen::Index> cv_hidden = {5, 10, 20};
  std::vector<double> cv_lambda = {0.0, 1e-3, 1e-2};
  int cv_folds = 5;
};

struct ForecastOptions {
  std::string checkpoint;
  std::string data;  // default: path stored in the checkpoint
  std::string arch;  // optional guard against the wrong checkpoint
  std::string mode = "direct";  // direct | rolling
  Eigen::Index m = 1;           // rolling block length
  Eigen::Index horizon = 0;     // optional guard: expected training horizon
  std::string range = "test";   // test | validation | all
  std::string output;           // default <output_dir>/<name>.forecast.csv
  std::string output_dir;
};

struct EvaluateOptions {
  std::vector<std::string> inputs;
  std::string output;  // default <output_dir>/summary.csv
  std::string output_dir;
  bool timing = false;  // add training time from .timing sidecars
};

struct BayesTrainOptions {
  DataOptions data;
  std::string arch = "alpha_rnn";
  std::string name;
  std::string output_dir;
  Eigen::Index hidden = 10;
  BayesConfig bayes;
  int warm_epochs = 200;
  std::string mean_init = "standard-normal";  // standard-normal | warm-start
};

struct BayesForecastOptions {
  std::string checkpoint;
  std::string data;
  std::string arch;
  std::string mode = "direct";
  Eigen::Index m = 1;
  std::string range = "test";
  int n_draws = 10;
  double level = 0.95;
  bool observation_noise = true;
  std::uint64_t seed = 0;
  std::string output;
  std::string output_dir;
};

void run_simulate(const SimulateOptions& o);
void run_diagnose(const DiagnoseOptions& o);
void run_train(const TrainOptions& o);
void run_forecast(const ForecastOptions& o);
void run_evaluate(const EvaluateOptions& o);
void run_bayes_train(const BayesTrainOptions& o);
void run_bayes_forecast(const BayesForecastOptions& o);

/// Maps an in-flight exception to the process exit code
/// (1 usage, 2 I/O or parse, 3 state mismatch, 4 training divergence).
int exit_code_for(const std::exception& e);

}  // namespace arnn::cli
