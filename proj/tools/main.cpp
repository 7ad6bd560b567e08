// alpharnn: command-line front end.
//
//   alpharnn simulate       --kind llm|alpha-rnn-dgp
//   alpharnn diagnose       --data FILE
//   alpharnn train          --data FILE --arch TAG
//   alpharnn forecast       --checkpoint FILE
//   alpharnn evaluate       FORECAST.csv...
//   alpharnn bayes-train    --data FILE --arch TAG
//   alpharnn bayes-forecast --checkpoint FILE
//
// Every flag can also come from an INI/TOML file given with --config, one
// [section] per subcommand; command-line flags win.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace arnn;
using namespace arnn::cli;

void add_data_options(CLI::App* c, DataOptions& d) {
  c->add_option("--data", d.data, "Input CSV");
  c->add_option("--target", d.target, "Target column (default: first numeric column)");
  c->add_option("--features", d.features, "Feature columns (default: the target)")->delimiter(',');
  c->add_option("-p,--seq-len", d.p, "Sequence length p")->capture_default_str();
  c->add_option("-m,--horizon", d.m, "Forecast horizon m the model is trained for")
      ->capture_default_str();
  c->add_option("--train-frac", d.train_frac, "Training fraction of the windows")->capture_default_str();
  c->add_option("--val-frac", d.val_frac, "Validation fraction of the windows")->capture_default_str();
}

void add_train_config(CLI::App* c, TrainConfig& t) {
  c->add_option("--epochs", t.max_epochs, "Maximum epochs")->capture_default_str();
  c->add_option("--batch-size", t.batch_size, "Mini-batch size")->capture_default_str();
  c->add_option("--patience", t.patience, "Updates below --min-delta before stopping")
      ->capture_default_str();
  c->add_option("--min-delta", t.min_delta, "Loss change treated as no progress")->capture_default_str();
  c->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  c->add_option("--lambda1", t.lambda1, "L1 penalty on weight matrices")->capture_default_str();
  c->add_option("--clip-norm", t.clip_norm, "Global gradient norm cap (<= 0 disables)")
      ->capture_default_str();
  c->add_option("--seed", t.seed, "Master seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponentially smoothed recurrent networks for time-series forecasting", "alpharnn"};
  app.set_config("--config", "", "INI/TOML config file with one section per subcommand");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic series");
  s->add_option("--kind", sim.kind, "llm or alpha-rnn-dgp")->capture_default_str();
  s->add_option("-o,--output", sim.output, "Output CSV");
  s->add_option("--output-dir", sim.output_dir, "Output directory (default $ARNN_OUTPUT_DIR or .)");
  s->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  s->add_option("-n,--length", sim.n, "Number of observations")->capture_default_str();
  s->add_option("--period", sim.period, "Seasonal period (llm)")->capture_default_str();
  s->add_option("--sigma-u2", sim.sigma_u2, "Observation noise variance (llm)")->capture_default_str();
  s->add_option("--sigma-chi2", sim.sigma_chi2, "Level noise variance (llm)")->capture_default_str();
  s->add_option("--sigma-omega2", sim.sigma_omega2, "Seasonal noise variance (llm)")
      ->capture_default_str();
  s->add_option("-p,--seq-len", sim.p, "Sequence length (alpha-rnn-dgp)")->capture_default_str();
  s->add_option("--alpha", sim.alpha, "Smoothing level (alpha-rnn-dgp)")->capture_default_str();
  s->add_option("--phi", sim.phi, "Recurrence weight (alpha-rnn-dgp)")->capture_default_str();
  s->add_option("--sigma-n", sim.sigma_n, "Noise std (alpha-rnn-dgp)")->capture_default_str();
  s->callback([&] { run_simulate(sim); });

  DiagnoseOptions diag;
  auto* d = app.add_subcommand("diagnose", "ACF/PACF, ADF test and sequence-length suggestion");
  d->add_option("--data", diag.data, "Input CSV");
  d->add_option("--column", diag.column, "Column to analyse (default: first numeric)");
  d->add_option("--output-dir", diag.output_dir, "Output directory");
  d->add_option("--max-lag", diag.max_lag, "Largest correlogram lag")->capture_default_str();
  d->add_option("--adf-max-lag", diag.adf_max_lag, "ADF lag cap (-1: 12 (N/100)^(1/4))")
      ->capture_default_str();
  d->add_option("--max-p", diag.max_p, "Cap on the recommended sequence length")->capture_default_str();
  d->add_option("--p-rule", diag.p_rule,
                "cutoff: end of the leading run of significant PACF lags; largest: largest "
                "significant lag")
      ->capture_default_str();
  d->add_option("--period", diag.period, "Seasonal period; > 0 adds a decomposition")
      ->capture_default_str();
  d->callback([&] { run_diagnose(diag); });

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Fit a cell and write a checkpoint");
  add_data_options(t, tr.data);
  add_train_config(t, tr.train);
  t->add_option("--arch", tr.arch, "rnn, es_rnn, alpha_rnn, alpha_t_rnn, gru or lstm")
      ->capture_default_str();
  t->add_option("--name", tr.name, "Output file stem (default: architecture tag)");
  t->add_option("--output-dir", tr.output_dir, "Output directory");
  t->add_option("-H,--hidden", tr.hidden, "Hidden units")->capture_default_str();
  t->add_option("--loss", tr.loss, "mse or mae")->capture_default_str();
  t->add_option("--readout", tr.readout, "smoothed or unsmoothed")->capture_default_str();
  t->add_option("--initial-alpha", tr.initial_alpha, "Starting smoothing level")->capture_default_str();
  t->add_flag("--cv", tr.cv, "Select hidden size and lambda1 by cross-validation");
  t->add_option("--cv-hidden", tr.cv_hidden, "Hidden sizes to try")->delimiter(',');
  t->add_option("--cv-lambda", tr.cv_lambda, "L1 penalties to try")->delimiter(',');
  t->add_option("--cv-folds", tr.cv_folds, "Expanding-window folds")->capture_default_str();
  t->callback([&] { run_train(tr); });

  ForecastOptions fc;
  auto* f = app.add_subcommand("forecast", "Forecast with a trained checkpoint");
  f->add_option("--checkpoint", fc.checkpoint, "Checkpoint from train");
  f->add_option("--data", fc.data, "Input CSV (default: the training data)");
  f->add_option("--arch", fc.arch, "Expected architecture; mismatch exits with 3");
  f->add_option("--expect-horizon", fc.horizon, "Expected training horizon; mismatch exits with 3");
  f->add_option("--mode", fc.mode, "direct or rolling")->capture_default_str();
  f->add_option("-m,--rolling-steps", fc.m, "Rolling block length")->capture_default_str();
  f->add_option("--range", fc.range, "test, validation or all")->capture_default_str();
  f->add_option("-o,--output", fc.output, "Forecast CSV");
  f->add_option("--output-dir", fc.output_dir, "Output directory");
  f->callback([&] { run_forecast(fc); });

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Summarise forecast CSVs into one table");
  e->add_option("inputs", ev.inputs, "Forecast CSVs");
  e->add_option("-o,--output", ev.output, "Summary CSV");
  e->add_option("--output-dir", ev.output_dir, "Output directory");
  e->add_flag("--timing", ev.timing, "Add training time from the .timing sidecars");
  e->callback([&] { run_evaluate(ev); });

  BayesTrainOptions bt;
  auto* b = app.add_subcommand("bayes-train", "Variational fit with a scale-mixture prior");
  add_data_options(b, bt.data);
  add_train_config(b, bt.bayes.train);
  b->add_option("--arch", bt.arch, "Architecture tag")->capture_default_str();
  b->add_option("--name", bt.name, "Output file stem");
  b->add_option("--output-dir", bt.output_dir, "Output directory");
  b->add_option("-H,--hidden", bt.hidden, "Hidden units")->capture_default_str();
  b->add_option("--n-samples", bt.bayes.n_samples, "Posterior samples per ELBO estimate")
      ->capture_default_str();
  b->add_option("--elbo-patience", bt.bayes.patience_epochs, "Epochs without ELBO gain before stopping")
      ->capture_default_str();
  b->add_option("--init-std", bt.bayes.init_std, "Initial posterior std")->capture_default_str();
  b->add_option("--mean-init", bt.mean_init, "standard-normal or warm-start")->capture_default_str();
  b->add_option("--warm-epochs", bt.warm_epochs, "Epochs of the deterministic warm start")
      ->capture_default_str();
  b->add_option("--prior-pi", bt.bayes.prior.pi, "Prior mixture weight")->capture_default_str();
  b->add_option("--prior-sigma1", bt.bayes.prior.sigma1, "Wide prior std")->capture_default_str();
  b->add_option("--prior-sigma2", bt.bayes.prior.sigma2, "Narrow prior std")->capture_default_str();
  b->callback([&] { run_bayes_train(bt); });

  BayesForecastOptions bf;
  auto* g = app.add_subcommand("bayes-forecast", "Predictive intervals from a variational checkpoint");
  g->add_option("--checkpoint", bf.checkpoint, "Checkpoint from bayes-train");
  g->add_option("--data", bf.data, "Input CSV (default: the training data)");
  g->add_option("--arch", bf.arch, "Expected architecture; mismatch exits with 3");
  g->add_option("--mode", bf.mode, "direct or rolling")->capture_default_str();
  g->add_option("-m,--rolling-steps", bf.m, "Rolling block length")->capture_default_str();
  g->add_option("--range", bf.range, "test, validation or all")->capture_default_str();
  g->add_option("--n-draws", bf.n_draws, "Posterior draws")->capture_default_str();
  g->add_option("--level", bf.level, "Interval level")->capture_default_str();
  g->add_flag("!--no-observation-noise", bf.observation_noise,
              "Interval from the spread of the draws alone");
  g->add_option("--seed", bf.seed, "Seed for the posterior draws")->capture_default_str();
  g->add_option("-o,--output", bf.output, "Predictive CSV");
  g->add_option("--output-dir", bf.output_dir, "Output directory");
  g->callback([&] { run_bayes_forecast(bf); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code_for(err);
  }
  return 0;
}
