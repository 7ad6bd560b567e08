#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "alpharnn/checkpoint.hpp"
#include "alpharnn/csv.hpp"
#include "alpharnn/diagnostics.hpp"
#include "alpharnn/synthetic.hpp"

namespace fs = std::filesystem;

namespace arnn::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw IoError("cannot parse " + what + " '" + s + "'");
  return v;
}

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(1, sep) : "") + parts[i];
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string out_dir(const std::string& requested) {
  std::string dir = requested.empty() ? default_output_dir() : requested;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string in_dir(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "'");
}

std::ofstream open_out(const std::string& path) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

void write_kv(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  auto os = open_out(path);
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream is(path);
  std::map<std::string, std::string> out;
  if (!is) return out;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::string stem_of(const std::string& path) {
  std::string s = fs::path(path).filename().string();
  for (const char* ext : {".vckpt", ".ckpt"})
    if (s.size() > std::strlen(ext) && s.ends_with(ext)) return s.substr(0, s.size() - std::strlen(ext));
  return fs::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// Data loading shared by the model commands.

struct LoadedData {
  WindowedDataset windows;
  std::string target;
  std::vector<std::string> features;
};

std::pair<Matrix, Vector> select_columns(const Table& table, std::string& target,
                                         std::vector<std::string>& features) {
  if (target.empty()) target = table.columns.front();
  if (features.empty()) features = {target};
  Matrix series(table.rows(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    series.col(static_cast<Eigen::Index>(j)) = table.column(features[j]);
  return {series, table.column(target)};
}

LoadedData load_windows(DataOptions d) {
  if (d.data.empty()) throw UsageError("--data is required");
  const Table table = read_csv(d.data);
  LoadedData out;
  auto [series, target] = select_columns(table, d.target, d.features);
  out.windows = make_windows(series, target, d.p, d.m, {d.train_frac, d.val_frac}, table.timestamps);
  out.target = d.target;
  out.features = d.features;
  return out;
}

void store_data_meta(Checkpoint& c, const DataOptions& d, const LoadedData& loaded) {
  c.meta.emplace_back("data", d.data);
  c.meta.emplace_back("target", loaded.target);
  c.meta.emplace_back("features", join(loaded.features));
  c.meta.emplace_back("horizon", std::to_string(d.m));
  c.meta.emplace_back("train_frac", fmt(d.train_frac));
  c.meta.emplace_back("val_frac", fmt(d.val_frac));
  const Normalization& n = loaded.windows.norm;
  c.extras.emplace_back("feature_mean", Matrix(n.feature_mean));
  c.extras.emplace_back("feature_std", Matrix(n.feature_std));
  Matrix tm(2, 1);
  tm << n.target_mean, n.target_std;
  c.extras.emplace_back("target_moments", tm);
}

const std::string& need_meta(const Checkpoint& c, const char* key) {
  const std::string* v = c.find_meta(key);
  if (!v) throw StateMismatch(std::string("checkpoint has no '") + key + "' entry");
  return *v;
}

const Matrix& need_extra(const Checkpoint& c, const char* key) {
  const Matrix* m = c.find_extra(key);
  if (!m) throw StateMismatch(std::string("checkpoint has no '") + key + "' block");
  return *m;
}

// Rebuilds the windows a checkpoint was trained on, with its stored moments.
WindowedDataset windows_for(const Checkpoint& c, const std::string& data_override) {
  const std::string path = data_override.empty() ? need_meta(c, "data") : data_override;
  const Table table = read_csv(path);
  std::string target = need_meta(c, "target");
  std::vector<std::string> features = split(need_meta(c, "features"));
  auto [series, y] = select_columns(table, target, features);
  if (series.cols() != c.params.dims.input)
    throw StateMismatch("checkpoint expects " + std::to_string(c.params.dims.input) +
                        " features, data provides " + std::to_string(series.cols()));
  Normalization norm;
  norm.feature_mean = need_extra(c, "feature_mean").col(0);
  norm.feature_std = need_extra(c, "feature_std").col(0);
  const Matrix& tm = need_extra(c, "target_moments");
  if (tm.size() != 2) throw StateMismatch("checkpoint target moments are malformed");
  norm.target_mean = tm(0, 0);
  norm.target_std = tm(1, 0);
  const auto m = static_cast<Eigen::Index>(to_double(need_meta(c, "horizon"), "horizon"));
  const SplitFractions splits{to_double(need_meta(c, "train_frac"), "train_frac"),
                              to_double(need_meta(c, "val_frac"), "val_frac")};
  return make_windows(series, y, c.params.dims.seq_len, m, splits, norm, table.timestamps);
}

WindowRange pick_range(const WindowedDataset& w, const std::string& name) {
  if (name == "test") return w.test();
  if (name == "validation") return w.validation();
  if (name == "all") return w.all();
  throw UsageError("unknown range '" + name + "' (expected test, validation or all)");
}

void guard_architecture(const Checkpoint& c, const std::string& expected) {
  if (expected.empty()) return;
  const Architecture want = parse_architecture(expected);
  if (want != c.params.arch)
    throw StateMismatch("checkpoint architecture is " + to_string(c.params.arch) + ", expected " +
                        to_string(want));
}

void add_alpha_summary(std::vector<std::pair<std::string, std::string>>& kv, const CellParams& cell) {
  if (!cell.has_static_alpha()) return;
  const double a = cell.alpha();
  kv.emplace_back("alpha", fmt(a));
  if (a > 0.0 && a < 1.0) kv.emplace_back("half_life", fmt(half_life(a)));
}

}  // namespace

std::string default_output_dir() {
  const char* env = std::getenv("ARNN_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 1;
  if (dynamic_cast<const DegenerateError*>(&e)) return 1;
  if (dynamic_cast<const IoError*>(&e)) return 2;
  if (dynamic_cast<const StateMismatch*>(&e)) return 3;
  if (dynamic_cast<const TrainingError*>(&e)) return 4;
  return 1;
}

// ---------------------------------------------------------------------------

void run_simulate(const SimulateOptions& o) {
  Table t;
  t.comments.push_back(" kind=" + o.kind);
  t.comments.push_back(" seed=" + std::to_string(o.seed));
  if (o.kind == "llm") {
    LlmConfig cfg{o.period, o.n, o.sigma_u2, o.sigma_chi2, o.sigma_omega2, o.seed};
    const LlmSeries s = generate_llm(cfg);
    t.comments.push_back(" period=" + std::to_string(o.period) + " sigma_u2=" + fmt(o.sigma_u2) +
                         " sigma_chi2=" + fmt(o.sigma_chi2) + " sigma_omega2=" + fmt(o.sigma_omega2));
    t.columns = {"value", "level", "seasonal"};
    t.values.resize(cfg.n, 3);
    t.values << s.y, s.level, s.seasonal;
  } else if (o.kind == "alpha-rnn-dgp") {
    AlphaRnnDgpConfig cfg{o.p, o.alpha, o.phi, o.sigma_n, o.n, o.seed};
    t.comments.push_back(" p=" + std::to_string(o.p) + " alpha=" + fmt(o.alpha) +
                         " phi=" + fmt(o.phi) + " sigma_n=" + fmt(o.sigma_n));
    t.columns = {"value"};
    t.values = generate_alpha_rnn(cfg);
  } else {
    throw UsageError("unknown simulation kind '" + o.kind + "' (expected llm or alpha-rnn-dgp)");
  }
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) t.timestamps.push_back(std::to_string(i));
  const std::string path = o.output.empty() ? in_dir(out_dir(o.output_dir), o.kind + ".csv") : o.output;
  ensure_parent(path);
  write_csv(path, t);
  std::cout << "wrote " << t.values.rows() << " rows to " << path << '\n';
}

void run_diagnose(const DiagnoseOptions& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  if (o.p_rule != "cutoff" && o.p_rule != "largest")
    throw UsageError("--p-rule must be cutoff or largest");
  const Table table = read_csv(o.data);
  const std::string column = o.column.empty() ? table.columns.front() : o.column;
  const Vector y = table.column(column);
  const std::string dir = out_dir(o.output_dir);

  auto correlograms = [&](const Vector& series, const std::string& prefix) {
    const Eigen::Index h = std::min<Eigen::Index>(o.max_lag, series.size() - 2);
    const Vector tau = acf(series, h);
    std::vector<Eigen::Index> lags;
    for (Eigen::Index j = 0; j <= h; ++j) lags.push_back(j);
    const double band = 1.96 / std::sqrt(double(series.size()));
    {
      auto os = open_out(in_dir(dir, prefix + "acf.csv"));
      write_correlogram_csv(os, lags, tau, band);
    }
    const PacfResult pr = pacf(series, h);
    {
      auto os = open_out(in_dir(dir, prefix + "pacf.csv"));
      write_correlogram_csv(os, pr.lags, pr.estimates, pr.band);
    }
    return pr;
  };

  const PacfResult pr = correlograms(y, "");
  const auto sig = pr.significant_lags();
  Eigen::Index cutoff = 0;
  while (cutoff < pr.estimates.size() && pr.significant(cutoff + 1)) ++cutoff;
  const Eigen::Index largest = sig.empty() ? 0 : sig.back();
  Eigen::Index recommended = o.p_rule == "cutoff" ? cutoff : largest;
  recommended = std::clamp<Eigen::Index>(recommended, 1, std::max<Eigen::Index>(o.max_p, 1));

  const int adf_lags = o.adf_max_lag >= 0 ? o.adf_max_lag : adf_default_max_lag(y.size());
  const AdfResult adf = adf_test(y, adf_lags);

  std::vector<std::string> sig_text;
  for (auto l : sig) sig_text.push_back(std::to_string(l));
  std::vector<std::pair<std::string, std::string>> kv = {
      {"column", column},
      {"n", std::to_string(y.size())},
      {"pacf_band", fmt(pr.band)},
      {"significant_lags", join(sig_text, ' ')},
      {"pacf_cutoff_lag", std::to_string(cutoff)},
      {"largest_significant_lag", std::to_string(largest)},
      {"p_rule", o.p_rule},
      {"recommended_p", std::to_string(recommended)},
      {"adf_statistic", fmt(adf.statistic)},
      {"adf_lags", std::to_string(adf.lags)},
      {"adf_nobs", std::to_string(adf.nobs)},
      {"adf_critical_1pct", fmt(AdfResult::kCritical[0])},
      {"adf_critical_5pct", fmt(AdfResult::kCritical[1])},
      {"adf_critical_10pct", fmt(AdfResult::kCritical[2])},
      {"adf_reject_1pct", adf.reject(0.01) ? "true" : "false"},
      {"adf_reject_5pct", adf.reject(0.05) ? "true" : "false"},
      {"adf_reject_10pct", adf.reject(0.10) ? "true" : "false"},
      {"adf_regression", "constant, no trend"},
      {"verdict", adf.stationary() ? "stationary" : "non-stationary"},
  };

  if (o.period > 0) {
    const Decomposition d = decompose(y, o.period);
    Table t;
    t.timestamps = table.timestamps;
    if (t.timestamps.empty())
      for (Eigen::Index i = 0; i < y.size(); ++i) t.timestamps.push_back(std::to_string(i));
    t.columns = {"observed", "trend", "seasonal", "residual"};
    t.values.resize(y.size(), 4);
    t.values << y, d.trend, d.seasonal, d.residual;
    write_csv(in_dir(dir, "decomposition.csv"), t);
    const PacfResult rp = correlograms(d.residual, "residual_");
    std::vector<std::string> rs;
    for (auto l : rp.significant_lags()) rs.push_back(std::to_string(l));
    kv.emplace_back("period", std::to_string(o.period));
    kv.emplace_back("residual_significant_lags", join(rs, ' '));
    const AdfResult radf = adf_test(d.residual, adf_lags);
    kv.emplace_back("residual_adf_statistic", fmt(radf.statistic));
    kv.emplace_back("residual_verdict", radf.stationary() ? "stationary" : "non-stationary");
  }
  write_kv(in_dir(dir, "diagnose.txt"), kv);
  for (const auto& [k, v] : kv) std::cout << k << '=' << v << '\n';
}

void run_train(const TrainOptions& o) {
  const Architecture arch = parse_architecture(o.arch);
  LoadedData loaded = load_windows(o.data);
  const WindowedDataset& w = loaded.windows;
  TrainConfig cfg = o.train;
  cfg.loss = parse_loss_kind(o.loss);
  InitOptions init;
  init.initial_alpha = o.initial_alpha;
  if (o.readout == "smoothed") init.readout = Readout::Smoothed;
  else if (o.readout == "unsmoothed") init.readout = Readout::Unsmoothed;
  else throw UsageError("--readout must be smoothed or unsmoothed");

  const std::string dir = out_dir(o.output_dir);
  const std::string name = o.name.empty() ? to_string(arch) : o.name;
  Eigen::Index hidden = o.hidden;
  double lambda1 = cfg.lambda1;
  double seconds = 0.0;
  if (o.cv) {
    CvGrid grid{o.cv_hidden, o.cv_lambda, o.cv_folds};
    const auto t0 = std::chrono::steady_clock::now();
    const CvResult cv = cross_validate(arch, w, grid, cfg, init);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    hidden = cv.best_hidden;
    lambda1 = cv.best_lambda1;
    auto os = open_out(in_dir(dir, name + ".cv.csv"));
    os << std::setprecision(17) << "hidden,lambda1,fold,validation_loss\n";
    for (const auto& s : cv.scores)
      os << s.hidden << ',' << s.lambda1 << ',' << s.fold << ',' << s.validation_loss << '\n';
  }
  cfg.lambda1 = lambda1;
  Rng rng(derive_seed(cfg.seed, 0xF17));
  CellParams cell = init_cell(arch, Dims{w.features.cols(), hidden, 1, w.seq_len}, rng, init);
  FitReport report = fit(cell, w, cfg);
  seconds += report.training_seconds;

  Checkpoint ckpt;
  ckpt.params = cell;
  ckpt.meta.emplace_back("kind", "deterministic");
  store_data_meta(ckpt, o.data, loaded);
  ckpt.meta.emplace_back("lambda1", fmt(lambda1));
  ckpt.meta.emplace_back("seed", std::to_string(cfg.seed));
  const std::string ckpt_path = in_dir(dir, name + ".ckpt");
  save_checkpoint(ckpt_path, ckpt);
  report.checkpoint = ckpt_path;
  {
    auto os = open_out(in_dir(dir, name + ".fit.txt"));
    write_fit_report(os, report);
  }
  write_kv(ckpt_path + ".timing", {{"training_seconds", fmt(seconds)}});

  std::cout << "architecture=" << to_string(arch) << "\nhidden=" << hidden << "\nlambda1=" << lambda1
            << "\nstopping_epoch=" << report.stopping_epoch << "\nfinal_train_loss="
            << report.loss_trace.back() << '\n';
  if (report.alpha) std::cout << "alpha=" << *report.alpha << '\n';
  if (report.half_life) std::cout << "half_life=" << *report.half_life << '\n';
  std::cout << "checkpoint=" << ckpt_path << '\n';
}

void run_forecast(const ForecastOptions& o) {
  if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  if (const std::string* kind = ckpt.find_meta("kind"); kind && *kind != "deterministic")
    throw StateMismatch("'" + o.checkpoint + "' is not a deterministic model checkpoint");
  guard_architecture(ckpt, o.arch);
  const WindowedDataset w = windows_for(ckpt, o.data);
  if (o.horizon > 0 && o.horizon != w.horizon)
    throw StateMismatch("checkpoint was trained for m=" + std::to_string(w.horizon) +
                        ", requested m=" + std::to_string(o.horizon));
  const TrainedModel model{ckpt.params, w.horizon};
  const WindowRange range = pick_range(w, o.range);
  ForecastResult f;
  if (o.mode == "direct") f = forecast_direct(model, w, range);
  else if (o.mode == "rolling") {
    if (w.horizon != 1) throw StateMismatch("rolling forecasts need a model trained with m=1");
    f = forecast_rolling(model, w, o.m, range);
  } else throw UsageError("--mode must be direct or rolling");

  std::vector<std::pair<std::string, std::string>> summary = {
      {"architecture", to_string(ckpt.params.arch)},
      {"checkpoint", o.checkpoint},
      {"mode", o.mode},
      {"m", std::to_string(o.mode == "rolling" ? o.m : w.horizon)},
      {"range", o.range}};
  add_alpha_summary(summary, ckpt.params);
  const std::string path = o.output.empty()
                               ? in_dir(out_dir(o.output_dir), stem_of(o.checkpoint) + ".forecast.csv")
                               : o.output;
  ensure_parent(path);
  write_forecast_csv(path, f, summary);
  std::cout << std::setprecision(10) << "n=" << f.size() << "\nmse=" << f.metrics.mse
            << "\nmae=" << f.metrics.mae << "\nrmse=" << f.metrics.rmse << "\nforecast=" << path
            << '\n';
}

void run_evaluate(const EvaluateOptions& o) {
  if (o.inputs.empty()) throw UsageError("evaluate needs at least one forecast CSV");
  std::ostringstream os;
  os << std::setprecision(17) << "name,architecture,mode,m,n,mse,mae,rmse,alpha,half_life";
  if (o.timing) os << ",training_seconds";
  os << '\n';
  for (const std::string& in : o.inputs) {
    const Table t = read_csv(in);
    const Vector obs = t.column("observed");
    const Vector pred = t.column("predicted");
    const Metrics m = compute_metrics(obs, pred);
    auto meta = read_kv(in + ".metrics");
    auto get = [&](const char* k) { return meta.count(k) ? meta[k] : std::string(); };
    std::string name = fs::path(in).filename().string();
    if (name.ends_with(".forecast.csv")) name = name.substr(0, name.size() - 13);
    os << name << ',' << get("architecture") << ',' << get("mode") << ',' << get("m") << ','
       << obs.size() << ',' << m.mse << ',' << m.mae << ',' << m.rmse << ',' << get("alpha") << ','
       << get("half_life");
    if (o.timing) {
      const std::string ck = get("checkpoint");
      auto timing = read_kv(ck + ".timing");
      os << ',' << (timing.count("training_seconds") ? timing["training_seconds"] : "");
    }
    os << '\n';
  }
  const std::string path = o.output.empty() ? in_dir(out_dir(o.output_dir), "summary.csv") : o.output;
  auto f = open_out(path);
  f << os.str();
  std::cout << os.str();
}

void run_bayes_train(const BayesTrainOptions& o) {
  const Architecture arch = parse_architecture(o.arch);
  LoadedData loaded = load_windows(o.data);
  BayesConfig cfg = o.bayes;
  if (o.mean_init == "standard-normal") cfg.mean_init = MeanInit::StandardNormal;
  else if (o.mean_init == "warm-start") cfg.mean_init = MeanInit::WarmStart;
  else throw UsageError("--mean-init must be standard-normal or warm-start");
  cfg.warm_start = cfg.train;
  cfg.warm_start.max_epochs = o.warm_epochs;

  const std::string dir = out_dir(o.output_dir);
  const std::string name = o.name.empty() ? to_string(arch) : o.name;
  BayesFit fitted = bayes_fit(arch, o.hidden, loaded.windows, cfg);
  Checkpoint ckpt = to_checkpoint(fitted.posterior);
  store_data_meta(ckpt, o.data, loaded);
  ckpt.meta.emplace_back("seed", std::to_string(cfg.train.seed));
  const std::string path = in_dir(dir, name + ".vckpt");
  save_checkpoint(path, ckpt);
  {
    auto os = open_out(in_dir(dir, name + ".bayes.txt"));
    os << std::setprecision(17) << "architecture=" << to_string(arch)
       << "\nstopping_epoch=" << fitted.report.stopping_epoch
       << "\nearly_stopped=" << (fitted.report.early_stopped ? "true" : "false")
       << "\nobs_std=" << fitted.report.obs_std << "\ncheckpoint=" << path << "\nepoch,elbo\n";
    for (std::size_t i = 0; i < fitted.report.elbo_trace.size(); ++i)
      os << i + 1 << ',' << fitted.report.elbo_trace[i] << '\n';
  }
  write_kv(path + ".timing", {{"training_seconds", fmt(fitted.report.training_seconds)}});
  std::cout << "architecture=" << to_string(arch) << "\nstopping_epoch="
            << fitted.report.stopping_epoch << "\nobs_std=" << fitted.report.obs_std
            << "\ncheckpoint=" << path << '\n';
}

void run_bayes_forecast(const BayesForecastOptions& o) {
  if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (o.n_draws < 2) throw UsageError("--n-draws must be >= 2");
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  guard_architecture(ckpt, o.arch);
  const VariationalParams vp = from_checkpoint(ckpt);
  const WindowedDataset w = windows_for(ckpt, o.data);
  PredictOptions po;
  po.n_draws = o.n_draws;
  po.level = o.level;
  po.observation_noise = o.observation_noise;
  po.seed = o.seed;
  if (o.mode == "rolling") {
    if (w.horizon != 1) throw StateMismatch("rolling forecasts need a model trained with m=1");
    po.rolling = true;
    po.horizon = o.m;
  } else if (o.mode != "direct") {
    throw UsageError("--mode must be direct or rolling");
  }
  const PredictiveResult r = bayes_predict(vp, w, pick_range(w, o.range), po);
  const std::string path = o.output.empty()
                               ? in_dir(out_dir(o.output_dir), stem_of(o.checkpoint) + ".predictive.csv")
                               : o.output;
  {
    auto os = open_out(path);
    write_predictive_csv(os, r);
  }
  std::vector<std::pair<std::string, std::string>> kv = {
      {"architecture", to_string(ckpt.params.arch)},
      {"checkpoint", o.checkpoint},
      {"mode", o.mode},
      {"m", std::to_string(po.rolling ? o.m : w.horizon)},
      {"n_draws", std::to_string(o.n_draws)},
      {"level", fmt(o.level)},
      {"n", std::to_string(r.size())},
      {"rmse", fmt(r.metrics.rmse)},
      {"mae", fmt(r.metrics.mae)},
      {"mse", fmt(r.metrics.mse)},
      {"coverage", fmt(r.coverage)},
      {"pred_std", fmt(r.std.mean())},
  };
  if (po.rolling) {
    for (Eigen::Index j = 1; j <= o.m; ++j) {
      double err = 0.0, inside = 0.0, count = 0.0;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r.step[i] != j) continue;
        err += std::abs(r.observed(i) - r.mean(i));
        inside += r.inside(i) ? 1.0 : 0.0;
        count += 1.0;
      }
      if (count == 0.0) continue;
      kv.emplace_back("step" + std::to_string(j) + "_mae", fmt(err / count));
      kv.emplace_back("step" + std::to_string(j) + "_coverage", fmt(inside / count));
    }
  }
  write_kv(path + ".metrics", kv);
  for (const auto& [k, v] : kv) std::cout << k << '=' << v << '\n';
  std::cout << "predictive=" << path << '\n';
}

}  // namespace arnn::cli
