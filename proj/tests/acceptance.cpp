// Acceptance run: builds desk-scale models through the CLI layer, then checks
// every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance [work_dir]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icad/cli.hpp"

namespace fs = std::filesystem;
using namespace icad;

namespace {

// Pinned tolerances.
constexpr double kCalibrationSlack = 0.02;
constexpr double kKsCritical1pct = 1.628;  // asymptotic Kolmogorov 1% value, times 1/sqrt(n)
constexpr double kClosedFormTol = 1e-6;
constexpr double kQuadratureTol = 1e-8;
constexpr double kWindowTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kSvddShrink = 0.5;
constexpr std::size_t kMaxFalsePositives = 1;
constexpr double kMaxMeanDelay = 25.0;
constexpr double kSvddTimingSpread = 0.20;
constexpr double kVaeLinearSlack = 0.25;

constexpr std::size_t kStreamLength = 5000;
constexpr std::size_t kN = 10;
constexpr std::uint64_t kDetectorSeed = 7;
constexpr std::uint64_t kSuiteSeed = 1;

struct Work {
  fs::path dir;
  fs::path train, cal, held_in, held_ood;
  fs::path vae, svdd, vae_cal, svdd_cal;
};

std::ostream& quiet() {
  static std::ostream s(nullptr);
  return s;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};
std::vector<Line> results;

void report(int id, bool pass, const std::string& detail) {
  results.push_back({id, pass, detail});
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

void info(const std::string& s) { std::cout << "  info: " << s << std::endl; }

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

Work build(const fs::path& dir) {
  Work w;
  w.dir = dir;
  fs::create_directories(dir);
  w.train = dir / "train.dat";
  w.cal = dir / "cal.dat";
  w.held_in = dir / "held_in.dat";
  w.held_ood = dir / "held_ood.dat";
  w.vae = dir / "vae.mdl";
  w.svdd = dir / "svdd.mdl";
  w.vae_cal = dir / "vae.cal";
  w.svdd_cal = dir / "svdd.cal";

  auto gen = [&](const fs::path& out, std::size_t count, double r_min, double r_max, std::uint64_t seed) {
    cli::GenDataOptions o;
    o.out = out;
    o.count = count;
    o.r_min = r_min;
    o.r_max = r_max;
    o.seed = seed;
    cli::gen_data(o, quiet());
  };
  gen(w.train, 1000, 0.0, 20.0, 1);
  gen(w.cal, 2000, 0.0, 20.0, 2);
  gen(w.held_in, kStreamLength, 0.0, 20.0, 5);
  gen(w.held_ood, 500, 25.0, 40.0, 6);

  cli::TrainOptions t;
  t.data = w.train;
  t.seed = 4;
  t.out = w.vae;
  cli::train_vae_cmd(t, quiet());
  t.out = w.svdd;
  t.pretrain = true;
  cli::train_svdd_cmd(t, quiet());

  cli::CalibrateOptions c;
  c.cal_data = w.cal;
  c.scorer = "vae";
  c.model = w.vae;
  c.out = w.vae_cal;
  cli::calibrate_cmd(c, quiet());
  c.scorer = "svdd";
  c.model = w.svdd;
  c.out = w.svdd_cal;
  cli::calibrate_cmd(c, quiet());
  return w;
}

// ---------------------------------------------------------------------------
// 1 and 2: calibration and uniformity of in-distribution p-values

void criteria_1_2(const Work& w) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = cli::load_pipeline(Method::svdd, w.svdd, w.svdd_cal);
  auto det = p.detector(kN, 0.0, std::numeric_limits<double>::infinity(), kDetectorSeed);
  const auto stream = io::load_dataset(w.held_in).examples;
  std::vector<double> ps;
  ps.reserve(stream.size());
  for (const auto& z : stream) ps.push_back(det->step(z).p.front());
  const double secs = seconds_since(t0);

  bool ok = secs < 60.0;
  std::string detail;
  for (double eps : {0.01, 0.05, 0.1}) {
    const double frac = static_cast<double>(std::count_if(ps.begin(), ps.end(), [&](double v) { return v < eps; })) /
                        static_cast<double>(ps.size());
    ok = ok && frac <= eps + kCalibrationSlack;
    detail += "P(p<" + fmt(eps) + ")=" + fmt(frac) + " (max " + fmt(eps + kCalibrationSlack) + ") ";
  }
  report(1, ok, detail + "over " + std::to_string(ps.size()) + " steps in " + fmt(secs, 3) + " s");

  std::sort(ps.begin(), ps.end());
  const double n = static_cast<double>(ps.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    ks = std::max({ks, static_cast<double>(i + 1) / n - ps[i], ps[i] - static_cast<double>(i) / n});
  const double bound = kKsCritical1pct / std::sqrt(n) + p_value_floor(p.cal->size());
  report(2, ks < bound,
         "KS=" + fmt(ks) + " bound=" + fmt(bound) + " (|cal|=" + std::to_string(p.cal->size()) + ")");
  // The bound treats the calibration CDF as exact; the calibration sample's own
  // fluctuation is of the same order at |cal|=2000.
  info("two-sample 1% critical value for n=" + std::to_string(ps.size()) + ", |cal|=" +
       std::to_string(p.cal->size()) + ": " +
       fmt(kKsCritical1pct * std::sqrt(1.0 / n + 1.0 / static_cast<double>(p.cal->size()))));
}

// ---------------------------------------------------------------------------
// 3: martingale closed forms and quadrature

long double simpson3(const std::function<long double(long double)>& f, long double a, long double b) {
  return (b - a) / 6.0L * (f(a) + 4.0L * f((a + b) / 2.0L) + f(b));
}
long double adaptive(const std::function<long double(long double)>& f, long double a, long double b,
                     long double whole, long double tol, int depth) {
  const long double m = (a + b) / 2.0L;
  const long double l = simpson3(f, a, m), r = simpson3(f, m, b);
  if (depth <= 0 || std::fabs(l + r - whole) <= 15.0L * tol) return l + r + (l + r - whole) / 15.0L;
  return adaptive(f, a, m, l, tol / 2.0L, depth - 1) + adaptive(f, m, b, r, tol / 2.0L, depth - 1);
}

void criterion_3() {
  double worst_closed = 0.0;
  for (std::size_t N = 1; N <= 50; ++N)
    worst_closed = std::max(worst_closed,
                            std::fabs(std::exp(mixture_martingale_log(N, 0.0)) - 1.0 / (static_cast<double>(N) + 1.0)));

  // N = 1 against an adaptive long-double oracle. M grows like 1/(p log^2 p),
  // so below p = 0.01 the 1e-8 is applied relative to M.
  double worst_quad = 0.0;
  for (double p : {1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 1e-3, 1.0 / 2001.0, 1e-4}) {
    const long double lp = std::log(static_cast<long double>(p));
    auto f = [&](long double e) { return e * std::exp((e - 1.0L) * lp); };
    const long double rough = simpson3(f, 0.0L, 1.0L);
    const long double oracle = adaptive(f, 0.0L, 1.0L, rough, 1e-15L * rough, 40);
    const double got = std::exp(mixture_martingale_log(std::vector<double>{p}));
    double err = std::fabs(got - static_cast<double>(oracle));
    if (p < 0.01) err /= static_cast<double>(oracle);
    worst_quad = std::max(worst_quad, err);
  }

  // Unit mean of one power-martingale factor; p = t^10 removes the endpoint singularity.
  double worst_unit = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double eps = 0.1 * i, m = 10.0;
    const double v = log_simpson(
        [&](double t) {
          const double power = m * eps - 1.0;
          if (std::fabs(power) < 1e-12) return std::log(eps * m);
          return std::log(eps * m) + power * std::log(t);
        },
        0.0, 1.0);
    worst_unit = std::max(worst_unit, std::fabs(std::exp(v) - 1.0));
  }
  report(3, worst_closed < kClosedFormTol && worst_quad < kQuadratureTol && worst_unit < kClosedFormTol,
         "closed-form err " + fmt(worst_closed) + ", quadrature err " + fmt(worst_quad) + ", unit-mean err " +
             fmt(worst_unit));
}

// ---------------------------------------------------------------------------
// 4: sliding window equals recomputation

void criterion_4() {
  double worst = 0.0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t N : {5u, 10u, 20u}) {
    auto st = MartingaleState::warmed_up(N, 3);
    for (int t = 0; t < 10000; ++t) {
      // Mix in floor-sized values so the log-sum spans a wide range.
      const double p = t % 7 == 0 ? 1.0 / 2001.0 : 1.0 - u(rng);
      st.push(p);
      const auto c = st.contents();
      double s = 0.0;
      for (double v : c) s += v;
      worst = std::max(worst, std::fabs(mixture_martingale_log(st) - mixture_martingale_log(c.size(), s)));
    }
  }
  report(4, worst < kWindowTol, "max |recursive - recomputed| log M = " + fmt(worst) + " over 10000 steps, N=5,10,20");
}

// ---------------------------------------------------------------------------
// 5: gradients

void scale(nn::Gradients& g, double k) {
  for (auto& w : g.weights)
    for (double& v : w.values()) v *= k;
  for (auto& b : g.bias)
    if (b)
      for (double& v : *b) v *= k;
}

Example normal_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Example v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void criterion_5() {
  double worst_vae = 0.0, worst_svdd = 0.0;
  std::size_t control_caught = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    auto vae = VaeModel::create(8, std::vector<std::size_t>{6, 5}, 3, rng);
    const auto z = normal_vector(8, rng);
    const auto noise = normal_vector(3, rng);
    const auto g = vae_loss_and_grad(vae, z, noise);
    nn::Mlp* nets[] = {&vae.mutable_encoder(), &vae.mutable_decoder()};
    nn::Gradients analytic[] = {g.encoder, g.decoder};
    auto loss = [&] { return vae_loss(vae, z, noise).loss; };
    worst_vae = std::max(worst_vae, nn::grad_check(nets, loss, analytic, kGradTol).max_rel_error);
    scale(analytic[0], 2.0);
    scale(analytic[1], 2.0);
    const bool vae_caught = !nn::grad_check(nets, loss, analytic, kGradTol).passed;

    auto svdd = SvddModel::create(8, std::vector<std::size_t>{6, 5}, 4, 0.05, rng);
    Dataset batch;
    for (int i = 0; i < 6; ++i) batch.push_back(normal_vector(8, rng));
    svdd_init_center(svdd, std::span<const Example>(batch).subspan(0, 3));
    auto sg = svdd_loss_and_grad(svdd, batch, true).grad;
    nn::Mlp* mapper[] = {&svdd.mutable_mapper()};
    auto sloss = [&] { return svdd_loss(svdd, batch); };
    worst_svdd = std::max(worst_svdd,
                          nn::grad_check(mapper, sloss, std::span<const nn::Gradients>(&sg, 1), kGradTol).max_rel_error);
    scale(sg, 2.0);
    const bool svdd_caught = !nn::grad_check(mapper, sloss, std::span<const nn::Gradients>(&sg, 1), kGradTol).passed;
    control_caught += vae_caught && svdd_caught;
  }
  report(5, worst_vae < kGradTol && worst_svdd < kGradTol && control_caught == 100,
         "max rel err VAE " + fmt(worst_vae) + ", SVDD " + fmt(worst_svdd) + " over 100 seeds; doubled-gradient control "
             "rejected in " + std::to_string(control_caught) + "/100");
}

// ---------------------------------------------------------------------------
// 6: SVDD training contract

void criterion_6(const Work& w) {
  // epoch,loss,mean_distance
  std::ifstream in(cli::loss_path_for(w.svdd));
  std::string line;
  std::getline(in, line);
  std::vector<double> dist;
  while (std::getline(in, line)) dist.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  const auto model = std::make_shared<SvddModel>(io::load_svdd(w.svdd));
  std::vector<double> in_scores, ood_scores;
  for (const auto& z : io::load_dataset(w.held_in).examples) in_scores.push_back(svdd_score(*model, z));
  for (const auto& z : io::load_dataset(w.held_ood).examples) ood_scores.push_back(svdd_score(*model, z));
  const auto qi = quartiles(in_scores);
  const auto qo = quartiles(ood_scores);
  const bool shrink = !dist.empty() && dist.back() <= kSvddShrink * dist.front();
  report(6, shrink && qo.q2 > qi.q3,
         "mean distance " + fmt(dist.empty() ? 0.0 : dist.front()) + " -> " + fmt(dist.empty() ? 0.0 : dist.back()) +
             "; OOD median " + fmt(qo.q2) + " vs in-dist Q3 " + fmt(qi.q3));
}

// ---------------------------------------------------------------------------
// 7: tuned desk-scale detection suite

cli::SuiteOptions suite_options(const Work& w, Method m, const std::string& out, std::uint64_t suite_seed) {
  cli::SuiteOptions o;
  o.method = method_name(m);
  o.model = m == Method::vae ? w.vae : w.svdd;
  o.cal = m == Method::vae ? w.vae_cal : w.svdd_cal;
  o.out = w.dir / out;
  o.episodes = 50;
  o.N = kN;
  o.seed = kDetectorSeed;
  o.suite_seed = suite_seed;
  o.threads = 4;
  return o;
}

std::string metrics_text(const SuiteMetrics& m) {
  return "FP " + cli::ratio_text(m.false_positives, m.in_distribution) + ", FN " +
         cli::ratio_text(m.false_negatives, m.out_of_distribution) + ", mean delay " + cli::delay_text(m.mean_delay);
}

void criterion_7(const Work& w) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (Method m : {Method::vae, Method::svdd}) {
    const auto name = std::string(method_name(m));
    const auto tuned = cli::tune(suite_options(w, m, "tune_" + name, kSuiteSeed), quiet());
    if (!tuned.result.best) {
      ok = false;
      detail += name + ": no zero-false-positive grid point; ";
      continue;
    }
    const auto& b = *tuned.result.best;
    const bool pass = b.metrics.false_negatives == 0 && b.metrics.false_positives <= kMaxFalsePositives &&
                      b.metrics.mean_delay && *b.metrics.mean_delay <= kMaxMeanDelay;
    ok = ok && pass;
    detail += name + " (N=" + std::to_string(kN) + (m == Method::vae ? ", delta=" + fmt(b.delta) : std::string()) +
              ", tau=" + fmt(b.tau) + "): " + metrics_text(b.metrics) + "; ";

    // Live simulation at the tuned point has to reproduce the replayed metrics.
    auto so = suite_options(w, m, "sim_" + name, kSuiteSeed);
    so.delta = b.delta;
    so.tau = b.tau;
    const auto live = cli::simulate(so, quiet()).run.metrics;
    const bool same = live.false_positives == b.metrics.false_positives &&
                      live.false_negatives == b.metrics.false_negatives && live.mean_delay == b.metrics.mean_delay;
    if (!same) {
      ok = false;
      detail += name + " live simulate disagrees (" + metrics_text(live) + "); ";
    }
    for (std::uint64_t s : {2u, 3u}) {
      const auto held = cli::simulate(
          [&] {
            auto o = suite_options(w, m, "held_" + name + "_" + std::to_string(s), s);
            o.delta = b.delta;
            o.tau = b.tau;
            return o;
          }(),
          quiet());
      info(name + " tuned point on held-out suite seed " + std::to_string(s) + ": " + metrics_text(held.run.metrics));
    }
  }
  const double secs = seconds_since(t0);
  report(7, ok && secs < 600.0, detail + "(" + fmt(secs, 3) + " s)");
}

// ---------------------------------------------------------------------------
// 8: timing

void criterion_8(const Work& w) {
  auto run = [&](Method m) {
    cli::BenchOptions b;
    b.method = method_name(m);
    b.model = m == Method::vae ? w.vae : w.svdd;
    b.cal = m == Method::vae ? w.vae_cal : w.svdd_cal;
    b.out = w.dir / ("bench_" + b.method + ".csv");
    b.steps = 2000;
    b.warmup = 100;
    return cli::bench(b, quiet());
  };
  const auto svdd = run(Method::svdd);
  const auto vae = run(Method::vae);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : svdd) {
    lo = std::min(lo, r.ms.q2);
    hi = std::max(hi, r.ms.q2);
  }
  const double spread = (hi - lo) / lo;
  const double v5 = vae[0].ms.q2, v10 = vae[1].ms.q2, v20 = vae[2].ms.q2;
  const double linear10 = v5 + (v20 - v5) * (10.0 - 5.0) / (20.0 - 5.0);
  const bool monotone = v5 < v10 && v10 < v20;
  const double off = std::fabs(v10 - linear10) / linear10;
  report(8, spread < kSvddTimingSpread && monotone && off < kVaeLinearSlack,
         "SVDD medians " + fmt(svdd[0].ms.q2) + "/" + fmt(svdd[1].ms.q2) + "/" + fmt(svdd[2].ms.q2) +
             " ms (spread " + fmt(100 * spread, 3) + "%); VAE medians " + fmt(v5) + "/" + fmt(v10) + "/" + fmt(v20) +
             " ms (N=10 off linear by " + fmt(100 * off, 3) + "%)");
}

// ---------------------------------------------------------------------------
// 9: persistence

template <class Fn>
std::optional<Errc> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

void criterion_9(const Work& w) {
  const fs::path dir = w.dir / "persist";
  fs::create_directories(dir);
  std::size_t ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> width(1, 12);
    bool good = true;

    const auto vae = VaeModel::create(width(rng), std::vector<std::size_t>{width(rng)}, width(rng) % 4 + 1, rng);
    io::save_model(dir / "v.mdl", vae);
    const auto vbytes = slurp(dir / "v.mdl");
    io::save_model(dir / "v2.mdl", io::load_vae(dir / "v.mdl"));
    good = good && vbytes == slurp(dir / "v2.mdl");

    const std::size_t d = width(rng);
    auto svdd = SvddModel::create(d, std::vector<std::size_t>{width(rng), width(rng)}, width(rng), 1e-3, rng);
    Dataset data;
    for (int i = 0; i < 5; ++i) data.push_back(normal_vector(d, rng));
    svdd_init_center(svdd, data);
    io::save_model(dir / "s.mdl", svdd);
    const auto loaded = io::load_svdd(dir / "s.mdl");
    io::save_model(dir / "s2.mdl", loaded);
    good = good && slurp(dir / "s.mdl") == slurp(dir / "s2.mdl") && loaded.center() == svdd.center();

    std::vector<double> scores(width(rng) * 10);
    for (double& s : scores) s = normal_vector(1, rng)[0] * 100.0;
    const auto cal = CalibrationSet::from_unsorted(scores, rng(), ScorerKind::svdd);
    io::save_calibration(dir / "c.cal", cal);
    good = good && io::load_calibration(dir / "c.cal") == cal;

    LabeledDataset ds;
    for (int i = 0; i < 7; ++i) {
      auto z = normal_vector(d, rng);
      for (double& v : z) v = static_cast<float>(v);
      ds.examples.push_back(z);
      ds.r.push_back(normal_vector(1, rng)[0]);
    }
    io::save_dataset(dir / "d.dat", ds);
    const auto back = io::load_dataset(dir / "d.dat");
    good = good && back.examples == ds.examples && back.r == ds.r;

    io::Config c;
    c.set("seed", static_cast<std::uint64_t>(rng()));
    c.set("tau", normal_vector(1, rng)[0] * 1e3);
    c.set("method", std::string("svdd"));
    io::save_config(dir / "r.cfg", c);
    good = good && io::load_config(dir / "r.cfg") == c;
    ok += good;
  }

  auto bytes = io::encode_calibration(CalibrationSet({1.0, 2.0}, 1, ScorerKind::svdd));
  auto magic = bytes;
  magic[0] = 'X';
  auto unsorted = bytes;
  std::rotate(unsorted.end() - 16, unsorted.end() - 8, unsorted.end());
  const auto e_magic = error_of([&] { io::decode_calibration(magic); });
  const auto e_unsorted = error_of([&] { io::decode_calibration(unsorted); });
  const bool distinct = e_magic == Errc::bad_magic && e_unsorted == Errc::unsorted_scores;
  report(9, ok == 100 && distinct,
         std::to_string(ok) + "/100 seeds bit-exact across model, calibration, dataset and config files; corrupt magic -> " +
             (e_magic ? errc_name(*e_magic) : "accepted") + ", unsorted -> " +
             (e_unsorted ? errc_name(*e_unsorted) : "accepted"));
}

// ---------------------------------------------------------------------------
// 10: reproducibility of the binary

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ICAD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    if (slurp(e.path()) != slurp(b / e.path().filename())) return false;
  }
  return true;
}

void criterion_10(const Work& w) {
  const fs::path dir = w.dir / "repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;
  std::size_t files = 0;
  int codes = 0;
  for (const char* m : {"vae", "svdd"}) {
    const std::string method = m;
    const auto model = (method == "vae" ? w.vae : w.svdd).string();
    const auto cal = (method == "vae" ? w.vae_cal : w.svdd_cal).string();
    const std::string det = "detect --method " + method + " --model " + model + " --cal " + cal + " --input " +
                            w.held_ood.string() + " --N 10 --delta 6 --tau 14 --seed 3 --out ";
    const std::string sim = "simulate --method " + method + " --model " + model + " --cal " + cal +
                            " --episodes 10 --N 10 --delta 6 --tau 14 --seed 3 --threads 2 --out ";
    for (int k = 1; k <= 2; ++k) {
      const auto tag = method + std::to_string(k);
      codes += run_cli(det + (dir / ("detect_" + tag + ".csv")).string()) == 1;
      codes += run_cli(sim + (dir / ("sim_" + tag)).string()) == 1;
    }
    ++files;
    ok = ok && slurp(dir / ("detect_" + method + "1.csv")) == slurp(dir / ("detect_" + method + "2.csv")) &&
         !slurp(dir / ("detect_" + method + "1.csv")).empty();
    ok = ok && same_tree(dir / ("sim_" + method + "1"), dir / ("sim_" + method + "2"), files);
  }
  report(10, ok && codes == 0,
         std::to_string(files) + " CSV files byte-identical across two runs" +
             (codes ? " (" + std::to_string(codes) + " commands failed)" : std::string()));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto w = build(dir);
    info("models trained and calibrated in " + fmt(seconds_since(t0), 3) + " s");
    criteria_1_2(w);
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6(w);
    criterion_7(w);
    criterion_8(w);
    criterion_9(w);
    criterion_10(w);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << passed << "/" << results.size() << " criteria passed in " << fmt(seconds_since(t0), 3) << " s"
            << std::endl;
  return passed == results.size() ? 0 : 1;
}
