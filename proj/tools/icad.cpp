// icad: command-line front end. Exit codes: 0 clean, 2 alarm raised, 1 error.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "icad/cli.hpp"

namespace {

using namespace icad;

// `--config FILE` supplies key=value defaults for the subcommand's flags;
// anything given explicitly on the command line wins. The file is expanded
// into ordinary `--key=value` arguments before parsing.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (file.empty()) return args;
  const auto cfg = io::load_config(file);
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [k, v] : cfg.values()) {
    if (k == "command" || given(k)) continue;
    args.push_back("--" + k + "=" + v);
  }
  return args;
}

const CLI::Validator kAtLeastOne(
    [](std::string& s) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      return used == s.size() && v >= 1 ? std::string() : "must be an integer of at least 1, got " + s;
    },
    "INT>=1");

void add_suite_flags(CLI::App* sub, cli::SuiteOptions& o) {
  sub->add_option("--method", o.method, "vae or svdd")->check(CLI::IsMember({"vae", "svdd"}));
  sub->add_option("--model", o.model, "model file")->required();
  sub->add_option("--cal", o.cal, "calibration file")->required();
  sub->add_option("--out", o.out, "output directory")->required();
  sub->add_option("--episodes", o.episodes, "number of episodes, half in-distribution")->capture_default_str();
  sub->add_option("--N", o.N, "window size / reconstructions per frame")->capture_default_str()->check(kAtLeastOne);
  sub->add_option("--seed", o.seed, "detector seed")->capture_default_str();
  sub->add_option("--suite-seed", o.suite_seed, "seed for schedules and scenes")->capture_default_str();
  sub->add_option("--max-steps", o.max_steps, "steps per episode")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal out-of-distribution detection with VAE and deep SVDD nonconformity"};
  app.require_subcommand(1);

  cli::GenDataOptions gen;
  auto* g = app.add_subcommand("gen-data", "generate a synthetic dataset");
  g->add_option("--out", gen.out, "dataset file")->required();
  g->add_option("--count", gen.count, "number of examples")->capture_default_str();
  g->add_option("--dim", gen.dim, "pixels per frame (a square)")->capture_default_str();
  g->add_option("--r-min", gen.r_min, "lowest corruption level")->capture_default_str();
  g->add_option("--r-max", gen.r_max, "highest corruption level")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();

  cli::TrainOptions vae_opts;
  cli::TrainOptions svdd_opts;
  auto add_train = [](CLI::App* sub, cli::TrainOptions& o) {
    sub->add_option("--data", o.data, "training dataset")->required();
    sub->add_option("--out", o.out, "model file")->required();
    sub->add_option("--epochs", o.epochs, "first-phase epochs")->capture_default_str();
    sub->add_option("--fine-tune-epochs", o.fine_tune_epochs, "second-phase epochs")->capture_default_str();
    sub->add_option("--lr", o.lr, "first-phase learning rate")->capture_default_str();
    sub->add_option("--lr2", o.lr2, "fine-tune learning rate")->capture_default_str();
    sub->add_option("--batch", o.batch, "minibatch size")->capture_default_str();
    sub->add_option("--seed", o.seed)->capture_default_str();
    sub->add_option("--widths", o.widths, "hidden layer widths")->delimiter(',')->capture_default_str();
  };
  auto* tv = app.add_subcommand("train-vae", "train the VAE");
  add_train(tv, vae_opts);
  tv->add_option("--latent", vae_opts.latent, "latent dimension")->capture_default_str();
  auto* ts = app.add_subcommand("train-svdd", "train the deep SVDD mapper");
  add_train(ts, svdd_opts);
  ts->add_option("--out-dim", svdd_opts.out_dim, "representation size")->capture_default_str();
  ts->add_option("--weight-decay", svdd_opts.weight_decay, "lambda")->capture_default_str();
  ts->add_flag("--pretrain", svdd_opts.pretrain, "initialize the mapper from a trained autoencoder");

  cli::CalibrateOptions cal;
  auto* c = app.add_subcommand("calibrate", "score a calibration set");
  c->add_option("--scorer", cal.scorer, "knn, kde, vae or svdd")
      ->check(CLI::IsMember({"knn", "kde", "vae", "svdd"}))
      ->capture_default_str();
  c->add_option("--model", cal.model, "model file (vae, svdd)");
  c->add_option("--train-data", cal.train_data, "proper training set (knn, kde)");
  c->add_option("--cal-data", cal.cal_data, "calibration dataset")->required();
  c->add_option("--out", cal.out, "calibration file")->required();
  c->add_option("--k", cal.k, "neighbours for knn")->capture_default_str()->check(kAtLeastOne);
  double bandwidth = 0.0;
  auto* bw = c->add_option("--bandwidth", bandwidth, "kde bandwidth, Silverman when omitted")
                 ->check(CLI::PositiveNumber);
  c->add_option("--cal-samples", cal.cal_samples, "vae: sampled reconstructions per example, 0 = mean")
      ->capture_default_str();
  c->add_option("--seed", cal.seed)->capture_default_str();

  cli::DetectOptions det;
  auto* d = app.add_subcommand("detect", "stream a dataset through a detector");
  d->add_option("--method", det.method, "vae or svdd")->check(CLI::IsMember({"vae", "svdd"}))->capture_default_str();
  d->add_option("--model", det.model)->required();
  d->add_option("--cal", det.cal)->required();
  d->add_option("--input", det.input)->required();
  d->add_option("--out", det.out, "per-step diagnostics CSV")->required();
  d->add_option("--N", det.N)->capture_default_str()->check(kAtLeastOne);
  d->add_option("--delta", det.delta, "CUSUM drift on log M (vae)")->capture_default_str();
  d->add_option("--tau", det.tau, "alarm threshold on log M or S")->capture_default_str();
  d->add_option("--seed", det.seed)->capture_default_str();

  cli::SuiteOptions sim;
  auto* s = app.add_subcommand("simulate", "run drift episodes");
  add_suite_flags(s, sim);
  s->add_option("--delta", sim.delta)->capture_default_str();
  s->add_option("--tau", sim.tau)->capture_default_str();
  s->add_option("--threads", sim.threads)->capture_default_str()->check(kAtLeastOne);

  cli::SuiteOptions tun;
  auto* t = app.add_subcommand("tune", "grid search over (delta, tau)");
  add_suite_flags(t, tun);
  t->add_option("--grid", tun.grid, "e.g. \"delta=0:30:1;tau=0.5:100:0.5\"");

  cli::BenchOptions ben;
  auto* b = app.add_subcommand("bench", "time detection steps");
  b->add_option("--method", ben.method)->check(CLI::IsMember({"vae", "svdd"}))->capture_default_str();
  b->add_option("--model", ben.model)->required();
  b->add_option("--cal", ben.cal)->required();
  b->add_option("--out", ben.out, "timing CSV")->required();
  b->add_option("--N-list", ben.N_list)->delimiter(',')->capture_default_str();
  b->add_option("--steps", ben.steps)->capture_default_str()->check(kAtLeastOne);
  b->add_option("--warmup", ben.warmup)->capture_default_str();
  b->add_option("--seed", ben.seed)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->add_option("--config", "key=value defaults for this command");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }

  try {
    if (*bw) cal.bandwidth = bandwidth;
    if (*g) return cli::gen_data(gen, std::cout);
    if (*tv) return cli::train_vae_cmd(vae_opts, std::cout);
    if (*ts) return cli::train_svdd_cmd(svdd_opts, std::cout);
    if (*c) return cli::calibrate_cmd(cal, std::cout);
    if (*d) return cli::detect_cmd(det, std::cout);
    if (*s) return cli::simulate_cmd(sim, std::cout);
    if (*t) return cli::tune_cmd(tun, std::cout);
    if (*b) return cli::bench_cmd(ben, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }
  return cli::kExitError;
}
