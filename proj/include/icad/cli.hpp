#pragma once

// Command implementations behind the `icad` tool. Each command takes a plain
// options struct, writes its outputs plus a resolved `.cfg` next to them, and
// returns an exit code: 0 clean, 2 alarm raised. Errors are thrown as
// icad::Error and mapped to exit code 1 by the caller.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icad/conformal.hpp"
#include "icad/episodes.hpp"
#include "icad/models.hpp"
#include "icad/nonconformity.hpp"
#include "icad/persistence.hpp"

namespace icad::cli {

namespace fs = std::filesystem;

inline constexpr int kExitClean = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

// ---------------------------------------------------------------------------
// Helpers

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

/// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
inline std::vector<double> parse_grid_axis(const std::string& spec) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty(), Errc::invalid_argument, "bad number '" + s + "' in grid '" + spec + "'");
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    require(parts.size() == 3, Errc::invalid_argument, "range grid must be start:stop:step, got '" + spec + "'");
    const double a = number(parts[0]), b = number(parts[1]), h = number(parts[2]);
    require(h > 0.0 && b >= a, Errc::invalid_argument, "range grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  require(!out.empty(), Errc::invalid_argument, "grid '" + spec + "' is empty");
  return out;
}

struct Grid {
  std::vector<double> deltas;
  std::vector<double> taus;
};

/// "delta=<axis>;tau=<axis>"; either part may be omitted to keep the default.
inline Grid parse_grid(const std::string& spec, Grid defaults) {
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ';');) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    require(eq != std::string::npos, Errc::invalid_argument, "grid part '" + part + "' has no '='");
    const auto key = part.substr(0, eq);
    if (key == "delta")
      defaults.deltas = parse_grid_axis(part.substr(eq + 1));
    else if (key == "tau")
      defaults.taus = parse_grid_axis(part.substr(eq + 1));
    else
      throw Error(Errc::invalid_argument, "unknown grid axis '" + key + "'");
  }
  return defaults;
}

/// Side length of a square frame with `dim` pixels.
inline std::size_t frame_side(std::size_t dim) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
  require(side * side == dim && side >= 4, Errc::invalid_argument,
          "dimension " + std::to_string(dim) + " is not a square frame of side >= 4");
  return side;
}

inline SceneGenerator scene_for(std::size_t dim) {
  SceneConfig sc;
  sc.side = frame_side(dim);
  return SceneGenerator(sc);
}

inline fs::path config_path_for_file(const fs::path& out) {
  auto p = out;
  p += ".cfg";
  return p;
}

/// A loaded detection pipeline: scorer plus the calibration bound to it.
struct Pipeline {
  Method method = Method::svdd;
  Scorer scorer;
  std::shared_ptr<const CalibrationSet> cal;

  std::unique_ptr<Detector> detector(std::size_t N, double delta, double tau, std::uint64_t seed) const {
    if (method == Method::vae) return std::make_unique<VaeDetector>(scorer, cal, N, delta, tau, seed);
    return std::make_unique<SvddDetector>(scorer, cal, N, tau, seed);
  }
};

inline Pipeline load_pipeline(Method method, const fs::path& model, const fs::path& cal) {
  auto scorer = method == Method::vae ? Scorer::vae(std::make_shared<VaeModel>(io::load_vae(model)))
                                      : Scorer::svdd(std::make_shared<SvddModel>(io::load_svdd(model)));
  auto c = std::make_shared<const CalibrationSet>(io::load_calibration(cal, scorer));
  return {method, std::move(scorer), std::move(c)};
}

inline void write_step_header(std::vector<std::string>& h, Method method, std::size_t N) {
  h = {"step", "score"};
  if (method == Method::vae) {
    for (std::size_t i = 1; i <= N; ++i) h.push_back("p_" + std::to_string(i));
  } else {
    h.push_back("p");
  }
  h.insert(h.end(), {"log_M", "S", "alarm"});
}

inline io::CsvWriter step_csv(Method method, std::size_t N) {
  std::vector<std::string> h;
  write_step_header(h, method, N);
  return io::CsvWriter(h);
}

inline void add_step_row(io::CsvWriter& csv, const StepRecord& r) {
  csv.cell(static_cast<std::uint64_t>(r.step)).cell(r.score);
  for (double p : r.p) csv.cell(p);
  csv.cell(r.log_m).cell(r.S).cell(r.alarm);
  csv.end_row();
}

inline std::string optional_text(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

inline std::string ratio_text(std::size_t k, std::size_t n) {
  return n == 0 ? std::string("n/a") : std::to_string(k) + "/" + std::to_string(n);
}

inline std::string delay_text(const std::optional<double>& d) {
  return d ? io::Config::format_number(*d) : std::string("n/a");
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOptions {
  fs::path out;
  std::size_t count = 1000;
  std::size_t dim = 256;
  double r_min = 0.0;
  double r_max = kInDistributionMaxR;
  std::uint64_t seed = 0;

  io::Config config() const {
    io::Config c;
    c.set("command", std::string("gen-data"));
    c.set("out", out.string());
    c.set("count", std::uint64_t{count});
    c.set("dim", std::uint64_t{dim});
    c.set("r-min", r_min);
    c.set("r-max", r_max);
    c.set("seed", seed);
    return c;
  }
};

inline int gen_data(const GenDataOptions& o, std::ostream& log) {
  require(o.count >= 1, Errc::invalid_argument, "--count must be at least 1");
  const auto gen = scene_for(o.dim);
  const auto data = generate_dataset(gen, o.count, o.r_min, o.r_max, o.seed);
  io::save_dataset(o.out, data);
  io::save_config(config_path_for_file(o.out), o.config());
  log << "wrote " << o.count << " examples of dimension " << o.dim << " to " << o.out.string() << "\n";
  return kExitClean;
}

// ---------------------------------------------------------------------------
// train-vae / train-svdd

struct TrainOptions {
  fs::path data;
  fs::path out;
  std::size_t epochs = 60;
  std::size_t fine_tune_epochs = 20;
  double lr = 1e-3;
  double lr2 = 1e-4;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  std::vector<std::size_t> widths{64, 32};
  std::size_t latent = 8;      // VAE latent size
  std::size_t out_dim = 16;    // SVDD representation size
  double weight_decay = 1e-6;  // SVDD lambda
  bool pretrain = false;       // SVDD autoencoder pretraining

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.fine_tune_epochs = fine_tune_epochs;
    t.learning_rate = lr;
    t.fine_tune_learning_rate = lr2;
    t.batch_size = batch;
    t.seed = seed;
    return t;
  }

  io::Config config(Method m) const {
    io::Config c;
    c.set("command", std::string(m == Method::vae ? "train-vae" : "train-svdd"));
    c.set("data", data.string());
    c.set("out", out.string());
    c.set("epochs", std::uint64_t{epochs});
    c.set("fine-tune-epochs", std::uint64_t{fine_tune_epochs});
    c.set("lr", lr);
    c.set("lr2", lr2);
    c.set("batch", std::uint64_t{batch});
    c.set("seed", seed);
    c.set("widths", join_sizes(widths));
    if (m == Method::vae) {
      c.set("latent", std::uint64_t{latent});
    } else {
      c.set("out-dim", std::uint64_t{out_dim});
      c.set("weight-decay", weight_decay);
      c.set("pretrain", std::string(pretrain ? "true" : "false"));
    }
    return c;
  }
};

inline fs::path loss_path_for(const fs::path& out) {
  auto p = out;
  p += ".loss.csv";
  return p;
}

inline int train_vae_cmd(const TrainOptions& o, std::ostream& log) {
  const auto data = io::load_dataset(o.data);
  require(!data.examples.empty(), Errc::invalid_argument, "training data is empty");
  std::mt19937_64 init(derive_seed(o.seed, 0x1417));
  auto model = VaeModel::create(data.examples.front().size(), o.widths, o.latent, init);
  const auto res = train_vae(std::move(model), data.examples, o.train_config());
  io::save_model(o.out, res.model);
  io::CsvWriter csv({"epoch", "loss"});
  for (std::size_t e = 0; e < res.loss_curve.size(); ++e)
    csv.cell(static_cast<std::uint64_t>(e + 1)).cell(res.loss_curve[e]).end_row();
  csv.save(loss_path_for(o.out));
  io::save_config(config_path_for_file(o.out), o.config(Method::vae));
  log << "trained VAE for " << res.loss_curve.size() << " epochs, final loss " << res.loss_curve.back() << "\n";
  return kExitClean;
}

inline int train_svdd_cmd(const TrainOptions& o, std::ostream& log) {
  const auto data = io::load_dataset(o.data);
  require(!data.examples.empty(), Errc::invalid_argument, "training data is empty");
  std::mt19937_64 init(derive_seed(o.seed, 0x1417));
  auto model = SvddModel::create(data.examples.front().size(), o.widths, o.out_dim, o.weight_decay, init);
  const auto cfg = o.train_config();
  auto pre = pretrain_autoencoder_then_copy(std::move(model), data.examples, cfg, o.pretrain);
  const auto res = train_svdd(std::move(pre.model), data.examples, cfg);
  io::save_model(o.out, res.model);
  io::CsvWriter csv({"epoch", "loss", "mean_distance"});
  for (std::size_t e = 0; e < res.loss_curve.size(); ++e)
    csv.cell(static_cast<std::uint64_t>(e + 1)).cell(res.loss_curve[e]).cell(res.distance_curve[e]).end_row();
  csv.save(loss_path_for(o.out));
  if (!pre.autoencoder_loss_curve.empty()) {
    io::CsvWriter ae({"epoch", "loss"});
    for (std::size_t e = 0; e < pre.autoencoder_loss_curve.size(); ++e)
      ae.cell(static_cast<std::uint64_t>(e + 1)).cell(pre.autoencoder_loss_curve[e]).end_row();
    auto p = o.out;
    p += ".pretrain.csv";
    ae.save(p);
  }
  io::save_config(config_path_for_file(o.out), o.config(Method::svdd));
  log << "trained SVDD for " << res.loss_curve.size() << " epochs, mean distance " << res.distance_curve.front()
      << " -> " << res.distance_curve.back() << "\n";
  return kExitClean;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  std::string scorer = "svdd";
  fs::path model;       // vae / svdd
  fs::path train_data;  // knn / kde
  fs::path cal_data;
  fs::path out;
  std::size_t k = kDefaultKnnK;
  std::optional<double> bandwidth;  // kde; Silverman per dimension when unset
  std::size_t cal_samples = 0;      // vae; sampled reconstructions per example
  std::uint64_t seed = 0;

  io::Config config() const {
    io::Config c;
    c.set("command", std::string("calibrate"));
    c.set("scorer", scorer);
    if (!model.empty()) c.set("model", model.string());
    if (!train_data.empty()) c.set("train-data", train_data.string());
    c.set("cal-data", cal_data.string());
    c.set("out", out.string());
    c.set("k", std::uint64_t{k});
    if (bandwidth) c.set("bandwidth", *bandwidth);
    c.set("cal-samples", std::uint64_t{cal_samples});
    c.set("seed", seed);
    return c;
  }
};

inline Scorer build_scorer(const CalibrateOptions& o) {
  switch (parse_scorer_kind(o.scorer)) {
    case ScorerKind::knn:
    case ScorerKind::kde: {
      require(!o.train_data.empty(), Errc::invalid_argument, "--train-data is required for " + o.scorer);
      auto train = io::load_dataset(o.train_data).examples;
      if (parse_scorer_kind(o.scorer) == ScorerKind::knn) return Scorer::knn(std::move(train), o.k);
      std::vector<double> h;
      if (o.bandwidth) h.assign(train.front().size(), *o.bandwidth);
      return Scorer::kde(std::move(train), std::move(h));
    }
    case ScorerKind::vae:
      require(!o.model.empty(), Errc::invalid_argument, "--model is required for vae");
      return Scorer::vae(std::make_shared<VaeModel>(io::load_vae(o.model)));
    case ScorerKind::svdd:
      require(!o.model.empty(), Errc::invalid_argument, "--model is required for svdd");
      return Scorer::svdd(std::make_shared<SvddModel>(io::load_svdd(o.model)));
  }
  throw Error(Errc::invalid_argument, "unknown scorer");
}

inline int calibrate_cmd(const CalibrateOptions& o, std::ostream& log) {
  const auto scorer = build_scorer(o);
  const auto cal_data = io::load_dataset(o.cal_data);
  const auto cal = calibrate(scorer, cal_data.examples, {o.cal_samples, o.seed});
  io::save_calibration(o.out, cal);
  io::save_config(config_path_for_file(o.out), o.config());
  log << "calibrated " << scorer_kind_name(cal.kind()) << " on " << cal.size() << " scores\n";
  return kExitClean;
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::string method = "svdd";
  fs::path model;
  fs::path cal;
  fs::path input;
  fs::path out;
  std::size_t N = 10;
  double delta = 0.0;
  double tau = 10.0;
  std::uint64_t seed = 0;

  io::Config config() const {
    io::Config c;
    c.set("command", std::string("detect"));
    c.set("method", method);
    c.set("model", model.string());
    c.set("cal", cal.string());
    c.set("input", input.string());
    c.set("out", out.string());
    c.set("N", std::uint64_t{N});
    c.set("delta", delta);
    c.set("tau", tau);
    c.set("seed", seed);
    return c;
  }
};

struct DetectSummary {
  std::size_t steps = 0;
  std::optional<std::size_t> first_alarm;
  std::size_t alarms = 0;
};

/// Streams every example of the input through the detector. The CUSUM resets
/// after an alarm and keeps going, so later alarms are also reported.
inline DetectSummary detect_stream(const Pipeline& p, std::span<const Example> input, const DetectOptions& o,
                                   io::CsvWriter& csv) {
  auto det = p.detector(o.N, o.delta, o.tau, o.seed);
  DetectSummary s;
  for (const auto& z : input) {
    const auto r = det->step(z);
    add_step_row(csv, r);
    ++s.steps;
    if (r.alarm) {
      ++s.alarms;
      if (!s.first_alarm) s.first_alarm = r.step;
    }
  }
  return s;
}

inline int detect_cmd(const DetectOptions& o, std::ostream& log) {
  require(o.N >= 1, Errc::invalid_argument, "--N must be at least 1");
  const auto method = parse_method(o.method);
  const auto p = load_pipeline(method, o.model, o.cal);
  const auto input = io::load_dataset(o.input);
  auto csv = step_csv(method, o.N);
  const auto s = detect_stream(p, input.examples, o, csv);
  csv.save(o.out);
  io::save_config(config_path_for_file(o.out), o.config());
  if (s.first_alarm) {
    log << "alarm_step=" << *s.first_alarm << " alarms=" << s.alarms << " steps=" << s.steps << "\n";
    return kExitAlarm;
  }
  log << "no alarm in " << s.steps << " steps\n";
  return kExitClean;
}

// ---------------------------------------------------------------------------
// simulate

struct SuiteOptions {
  std::string method = "svdd";
  fs::path model;
  fs::path cal;
  fs::path out;  // directory
  std::size_t episodes = 50;
  std::size_t N = 10;
  double delta = 0.0;
  double tau = 10.0;
  std::uint64_t seed = 0;        // detector randomness
  std::uint64_t suite_seed = 1;  // schedules and scenes
  std::size_t max_steps = kDefaultEpisodeSteps;
  std::size_t threads = 1;
  std::string grid;  // tune only

  SuiteConfig suite() const {
    require(episodes >= 1, Errc::invalid_argument, "--episodes must be at least 1");
    SuiteConfig s;
    s.in_distribution = (episodes + 1) / 2;
    s.out_of_distribution = episodes / 2;
    s.max_steps = max_steps;
    s.seed = suite_seed;
    return s;
  }

  io::Config config(const std::string& command) const {
    io::Config c;
    c.set("command", command);
    c.set("method", method);
    c.set("model", model.string());
    c.set("cal", cal.string());
    c.set("out", out.string());
    c.set("episodes", std::uint64_t{episodes});
    c.set("N", std::uint64_t{N});
    if (command == "simulate") {
      c.set("delta", delta);
      c.set("tau", tau);
      c.set("threads", std::uint64_t{threads});
    } else {
      c.set("grid", grid);
    }
    c.set("seed", seed);
    c.set("suite-seed", suite_seed);
    c.set("max-steps", std::uint64_t{max_steps});
    return c;
  }
};

inline std::string episode_file(std::size_t i) {
  std::ostringstream s;
  s << "episode_" << std::setw(3) << std::setfill('0') << i << ".csv";
  return s.str();
}

inline void write_metrics_row(io::CsvWriter& csv, Method method, std::size_t N, double delta, double tau,
                              const SuiteMetrics& m) {
  csv.cell(method_name(method)).cell(static_cast<std::uint64_t>(N));
  if (method == Method::vae)
    csv.cell(delta);
  else
    csv.blank();
  csv.cell(tau)
      .cell(ratio_text(m.false_positives, m.in_distribution))
      .cell(ratio_text(m.false_negatives, m.out_of_distribution))
      .cell(delay_text(m.mean_delay))
      .end_row();
}

inline io::CsvWriter metrics_csv() {
  return io::CsvWriter({"method", "N", "delta", "tau", "false_positive", "false_negative", "average_delay"});
}

struct SimulateResult {
  SuiteRun run;
  int exit_code = kExitClean;
};

inline SimulateResult simulate(const SuiteOptions& o, std::ostream& log) {
  const auto method = parse_method(o.method);
  const auto p = load_pipeline(method, o.model, o.cal);
  const auto gen = scene_for(p.scorer.input_dim());
  const auto specs = sample_suite(o.suite());
  auto run = run_suite(gen, specs, [&] { return p.detector(o.N, o.delta, o.tau, o.seed); }, o.max_steps, o.threads);

  fs::create_directories(o.out);
  io::CsvWriter episodes({"episode", "label", "r0", "t0", "t1", "beta", "onset_step", "alarm_step", "verdict",
                          "delay_frames"});
  for (std::size_t i = 0; i < run.episodes.size(); ++i) {
    const auto& e = run.episodes[i];
    const auto& s = specs[i].schedule;
    episodes.cell(static_cast<std::uint64_t>(i))
        .cell(e.result.ood ? "ood" : "in_dist")
        .cell(s.r0)
        .cell(static_cast<std::uint64_t>(s.t0))
        .cell(static_cast<std::uint64_t>(s.t1))
        .cell(s.beta)
        .cell(optional_text(e.result.onset_step))
        .cell(optional_text(e.result.alarm_step))
        .cell(verdict_name(e.result.verdict))
        .cell(optional_text(e.result.delay_frames))
        .end_row();
    auto csv = step_csv(method, o.N);
    for (const auto& r : e.records) add_step_row(csv, r);
    csv.save(o.out / episode_file(i));
  }
  episodes.save(o.out / "episodes.csv");
  auto metrics = metrics_csv();
  write_metrics_row(metrics, method, o.N, o.delta, o.tau, run.metrics);
  metrics.save(o.out / "metrics.csv");
  io::save_config(o.out / "run.cfg", o.config("simulate"));

  const auto& m = run.metrics;
  log << method_name(method) << " N=" << o.N << ": FP " << ratio_text(m.false_positives, m.in_distribution)
      << ", FN " << ratio_text(m.false_negatives, m.out_of_distribution) << ", mean delay "
      << delay_text(m.mean_delay) << "\n";
  const bool any_alarm = m.false_positives + m.true_positives > 0;
  return {std::move(run), any_alarm ? kExitAlarm : kExitClean};
}

inline int simulate_cmd(const SuiteOptions& o, std::ostream& log) { return simulate(o, log).exit_code; }

// ---------------------------------------------------------------------------
// tune

/// Log-domain grids. The VAE CUSUM and the SVDD threshold both act on log M.
inline Grid default_grid() {
  return {parse_grid_axis("0:30:1"), parse_grid_axis("0.5:100:0.5")};
}

struct TuneOutcome {
  TuneResult result;
  Method method = Method::svdd;
};

inline TuneOutcome tune(const SuiteOptions& o, std::ostream& log) {
  const auto method = parse_method(o.method);
  const auto grid = parse_grid(o.grid, default_grid());
  const auto p = load_pipeline(method, o.model, o.cal);
  const auto gen = scene_for(p.scorer.input_dim());
  const auto specs = sample_suite(o.suite());
  // Alarms disabled while recording: the martingale trace does not depend on (delta, tau).
  auto det = p.detector(o.N, 0.0, std::numeric_limits<double>::infinity(), o.seed);
  std::vector<EpisodeTrace> traces;
  traces.reserve(specs.size());
  for (const auto& s : specs) traces.push_back(record_trace(gen, s, *det, o.max_steps));
  auto result = tune_thresholds(traces, method, grid.deltas, grid.taus);

  fs::create_directories(o.out);
  auto all = metrics_csv();
  for (const auto& g : result.grid) write_metrics_row(all, method, o.N, g.delta, g.tau, g.metrics);
  all.save(o.out / "grid.csv");
  auto best = metrics_csv();
  if (result.best) write_metrics_row(best, method, o.N, result.best->delta, result.best->tau, result.best->metrics);
  best.save(o.out / "best.csv");
  io::save_config(o.out / "run.cfg", o.config("tune"));

  if (result.best) {
    const auto& b = *result.best;
    log << method_name(method) << " best";
    if (method == Method::vae) log << " delta=" << b.delta;
    log << " tau=" << b.tau << ": FP " << ratio_text(b.metrics.false_positives, b.metrics.in_distribution)
        << ", FN " << ratio_text(b.metrics.false_negatives, b.metrics.out_of_distribution) << ", mean delay "
        << delay_text(b.metrics.mean_delay) << "\n";
  } else {
    log << method_name(method) << ": no grid point is free of false positives\n";
  }
  return {std::move(result), method};
}

inline int tune_cmd(const SuiteOptions& o, std::ostream& log) {
  tune(o, log);
  return kExitClean;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::string method = "svdd";
  fs::path model;
  fs::path cal;
  fs::path out;  // CSV
  std::vector<std::size_t> N_list{5, 10, 20};
  std::size_t steps = 1000;
  std::size_t warmup = 50;
  std::uint64_t seed = 0;

  io::Config config() const {
    io::Config c;
    c.set("command", std::string("bench"));
    c.set("method", method);
    c.set("model", model.string());
    c.set("cal", cal.string());
    c.set("out", out.string());
    c.set("N-list", join_sizes(N_list));
    c.set("steps", std::uint64_t{steps});
    c.set("warmup", std::uint64_t{warmup});
    c.set("seed", seed);
    return c;
  }
};

inline io::CsvWriter timing_csv() { return io::CsvWriter({"method", "N", "min", "Q1", "Q2", "Q3", "max"}); }

inline void add_timing_row(io::CsvWriter& csv, const TimingRow& row) {
  csv.cell(method_name(row.method))
      .cell(static_cast<std::uint64_t>(row.N))
      .cell(row.ms.min)
      .cell(row.ms.q1)
      .cell(row.ms.q2)
      .cell(row.ms.q3)
      .cell(row.ms.max)
      .end_row();
}

/// Times detection on in-distribution frames; large thresholds keep alarms out of the measurement.
inline std::vector<TimingRow> bench(const BenchOptions& o, std::ostream& log) {
  require(!o.N_list.empty(), Errc::invalid_argument, "--N-list is empty");
  for (std::size_t N : o.N_list) require(N >= 1, Errc::invalid_argument, "every N must be at least 1");
  const auto method = parse_method(o.method);
  const auto p = load_pipeline(method, o.model, o.cal);
  const auto gen = scene_for(p.scorer.input_dim());
  const auto frames = generate_dataset(gen, 200, 0.0, kInDistributionMaxR, derive_seed(o.seed, 0xbe));
  const double big = std::numeric_limits<double>::infinity();
  const auto rows = benchmark_timing([&](std::size_t N) { return p.detector(N, 0.0, big, o.seed); }, frames.examples,
                                     o.steps, o.N_list, o.warmup);
  auto csv = timing_csv();
  for (const auto& r : rows) {
    add_timing_row(csv, r);
    log << method_name(r.method) << " N=" << r.N << ": median " << r.ms.q2 << " ms\n";
  }
  csv.save(o.out);
  io::save_config(config_path_for_file(o.out), o.config());
  return rows;
}

inline int bench_cmd(const BenchOptions& o, std::ostream& log) {
  bench(o, log);
  return kExitClean;
}

}  // namespace icad::cli
