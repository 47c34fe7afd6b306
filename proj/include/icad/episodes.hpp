#pragma once

// Synthetic drift episodes: a 16x16 scene generator with a rain-streak
// corruption controlled by r, the piecewise-linear precipitation ramp, episode
// classification (false positive / negative, delay in frames), threshold
// search and per-step timing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "icad/conformal.hpp"
#include "icad/error.hpp"
#include "icad/types.hpp"

namespace icad {

/// Corruption levels above this are out of distribution.
inline constexpr double kInDistributionMaxR = 20.0;

struct SceneConfig {
  std::size_t side = 16;
  double pixel_noise = 0.01;
  double streaks_per_unit_r = 2.0;
  std::size_t streak_length = 3;
  double streak_intensity = 0.25;
  double curtain_full_r = 40.0;
  double curtain_fade_rows = 0.25;  // streak intensity ramps up over this many rows above the curtain edge
  double gain = 4.0;  // overall intensity scale of the rendered frame
};

/// Renders a lead-vehicle-like disk on a graded background, plus rain
/// streaks whose expected count is proportional to r.
class SceneGenerator {
 public:
  explicit SceneGenerator(SceneConfig cfg = {}) : cfg_(cfg) {
    require(cfg_.side >= 4, Errc::invalid_argument, "scene side must be at least 4");
    require(cfg_.streak_length >= 1 && cfg_.curtain_fade_rows > 0.0 && cfg_.curtain_full_r > 0.0,
            Errc::invalid_argument, "streak length, curtain fade and curtain range must be positive");
    require(cfg_.streaks_per_unit_r >= 0.0 && cfg_.pixel_noise >= 0.0, Errc::invalid_argument,
            "scene parameters must be nonnegative");
  }

  const SceneConfig& config() const noexcept { return cfg_; }
  std::size_t dim() const noexcept { return cfg_.side * cfg_.side; }

  /// Base scene without any rain.
  Example render_clean(std::mt19937_64& rng) const {
    const std::size_t n = cfg_.side;
    const double s = static_cast<double>(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double base = 0.2 + 0.2 * u(rng);
    const double slope = 0.1 + 0.2 * u(rng);
    const double cx = s * (0.3 + 0.4 * u(rng));
    const double cy = s * (0.35 + 0.3 * u(rng));
    const double radius = s * (0.12 + 0.13 * u(rng));
    const double shade = 0.6 + 0.3 * u(rng);
    std::normal_distribution<double> noise(0.0, cfg_.pixel_noise);
    Example img(n * n);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - cx;
        const double dy = static_cast<double>(y) + 0.5 - cy;
        double v = base + slope * static_cast<double>(y) / (s - 1.0);
        if (dx * dx + dy * dy <= radius * radius) v = shade;
        img[y * n + x] = v + (cfg_.pixel_noise > 0.0 ? noise(rng) : 0.0);
      }
    }
    return img;
  }

  /// Number of streaks for level r: floor(k r) plus one more with probability frac(k r).
  std::size_t streak_count(double r, std::mt19937_64& rng) const {
    if (r <= 0.0) return 0;
    const double expected = cfg_.streaks_per_unit_r * r;
    const double whole = std::floor(expected);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return static_cast<std::size_t>(whole) + (u(rng) < expected - whole ? 1 : 0);
  }

  /// Lower edge of the rain curtain in rows; it reaches the bottom of the frame at r = curtain_full_r.
  double curtain_depth(double r) const {
    return static_cast<double>(cfg_.side) * std::clamp(r / cfg_.curtain_full_r, 0.0, 1.0);
  }

  /// Adds diagonal streaks in place. Streaks start inside the curtain and fade
  /// out over the last curtain_fade_rows rows above its lower edge.
  void add_rain(Example& img, double r, std::mt19937_64& rng) const {
    const std::size_t n = cfg_.side;
    const std::size_t count = streak_count(r, rng);
    if (count == 0) return;
    const double depth = curtain_depth(r);
    const auto rows = static_cast<std::size_t>(std::ceil(depth));
    std::uniform_int_distribution<std::size_t> col(0, n - 1);
    std::uniform_int_distribution<std::size_t> row(0, rows - 1);
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t x = col(rng);
      std::size_t y = row(rng);
      for (std::size_t j = 0; j < cfg_.streak_length && y < n; ++j) {
        const double fade = std::clamp((depth - static_cast<double>(y)) / cfg_.curtain_fade_rows, 0.0, 1.0);
        img[y * n + (x % n)] += cfg_.streak_intensity * fade;
        ++y;
        if (j % 2 == 1) ++x;
      }
    }
  }

  Example render(double r, std::mt19937_64& rng) const {
    auto img = render_clean(rng);
    add_rain(img, r, rng);
    for (double& v : img) v *= cfg_.gain;
    return img;
  }

 private:
  SceneConfig cfg_;
};

struct LabeledDataset {
  Dataset examples;
  std::vector<double> r;
};

/// `count` scenes with r ~ U[r_min, r_max]; example i depends only on (seed, i).
inline LabeledDataset generate_dataset(const SceneGenerator& gen, std::size_t count, double r_min, double r_max,
                                       std::uint64_t seed) {
  require(count >= 1, Errc::invalid_argument, "count must be at least 1");
  require(r_min >= 0.0 && r_max >= r_min, Errc::invalid_argument, "need 0 <= r_min <= r_max");
  LabeledDataset out;
  out.examples.reserve(count);
  out.r.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_real_distribution<double> ur(r_min, r_max);
    const double r = r_max > r_min ? ur(rng) : r_min;
    out.r.push_back(r);
    out.examples.push_back(gen.render(r, rng));
  }
  return out;
}

/// Piecewise-linear precipitation ramp: r0 before t0, slope beta on [t0, t1], flat after t1.
struct DriftSchedule {
  double r0 = 0.0;
  std::size_t t0 = 10;
  std::size_t t1 = 90;
  double beta = 0.1;

  double value(std::size_t t) const {
    if (t < t0) return r0;
    if (t <= t1) return r0 + beta * static_cast<double>(t - t0);
    return r0 + beta * static_cast<double>(t1 - t0);
  }

  /// r0 ~ U[0,10], t0 ~ U{10..30}, t1 ~ U{90..110}, beta ~ U[0.1,0.5].
  static DriftSchedule sample(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ur0(0.0, 10.0);
    std::uniform_int_distribution<std::size_t> ut0(10, 30);
    std::uniform_int_distribution<std::size_t> ut1(90, 110);
    std::uniform_real_distribution<double> ubeta(0.1, 0.5);
    DriftSchedule s;
    s.r0 = ur0(rng);
    s.t0 = ut0(rng);
    s.t1 = ut1(rng);
    s.beta = ubeta(rng);
    return s;
  }

  /// First step in [0, max_steps) with r > 20, if any.
  std::optional<std::size_t> onset(std::size_t max_steps) const {
    for (std::size_t t = 0; t < max_steps; ++t)
      if (value(t) > kInDistributionMaxR) return t;
    return std::nullopt;
  }
};

inline constexpr std::size_t kDefaultEpisodeSteps = 150;

enum class Verdict { true_positive, false_positive, true_negative, false_negative };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::true_positive: return "true_positive";
    case Verdict::false_positive: return "false_positive";
    case Verdict::true_negative: return "true_negative";
    case Verdict::false_negative: return "false_negative";
  }
  return "?";
}

struct EpisodeResult {
  bool ood = false;
  std::optional<std::size_t> alarm_step;
  std::optional<std::size_t> onset_step;
  Verdict verdict = Verdict::true_negative;
  std::optional<std::size_t> delay_frames;  // true positives only
};

/// An alarm counts as a detection only at or after the onset; anything earlier is a false alarm.
inline EpisodeResult classify_episode(std::optional<std::size_t> onset, std::optional<std::size_t> alarm) {
  EpisodeResult r;
  r.ood = onset.has_value();
  r.onset_step = onset;
  r.alarm_step = alarm;
  if (alarm) {
    if (onset && *alarm >= *onset) {
      r.verdict = Verdict::true_positive;
      r.delay_frames = *alarm - *onset;
    } else {
      r.verdict = Verdict::false_positive;
    }
  } else {
    r.verdict = onset ? Verdict::false_negative : Verdict::true_negative;
  }
  return r;
}

struct EpisodeSpec {
  DriftSchedule schedule;
  std::uint64_t seed = 0;  // scene randomness
};

struct EpisodeRun {
  EpisodeResult result;
  std::vector<StepRecord> records;
};

/// Frame t of an episode; depends only on (spec.seed, t).
inline Example episode_frame(const SceneGenerator& gen, const EpisodeSpec& spec, std::size_t t) {
  std::mt19937_64 rng(derive_seed(spec.seed, t));
  return gen.render(spec.schedule.value(t), rng);
}

/// Resets the detector, then streams frames until the first alarm or max_steps.
inline EpisodeRun run_episode(const SceneGenerator& gen, const EpisodeSpec& spec, Detector& detector,
                              std::size_t max_steps = kDefaultEpisodeSteps) {
  detector.reset();
  EpisodeRun run;
  std::optional<std::size_t> alarm;
  for (std::size_t t = 0; t < max_steps; ++t) {
    const auto frame = episode_frame(gen, spec, t);
    run.records.push_back(detector.step(frame));
    if (run.records.back().alarm) {
      alarm = t;
      break;
    }
  }
  run.result = classify_episode(spec.schedule.onset(max_steps), alarm);
  return run;
}

struct SuiteConfig {
  std::size_t in_distribution = 25;
  std::size_t out_of_distribution = 25;
  std::size_t max_steps = kDefaultEpisodeSteps;
  std::uint64_t seed = 0;
};

/// Draws schedules from the ramp distribution, keeping the first
/// `in_distribution` in-distribution and `out_of_distribution` OOD ones in
/// draw order.
inline constexpr std::uint64_t kMaxSuiteDraws = 1'000'000;

inline std::vector<EpisodeSpec> sample_suite(const SuiteConfig& cfg) {
  require(cfg.in_distribution + cfg.out_of_distribution >= 1, Errc::invalid_argument, "suite needs an episode");
  std::mt19937_64 rng(cfg.seed);
  std::vector<EpisodeSpec> out;
  std::size_t n_in = 0;
  std::size_t n_ood = 0;
  std::uint64_t draw = 0;
  while (n_in < cfg.in_distribution || n_ood < cfg.out_of_distribution) {
    // Short episodes can make one label unreachable (no ramp passes r = 20 before step 31).
    require(draw < kMaxSuiteDraws, Errc::invalid_argument,
            "could not draw the requested episode split within " + std::to_string(cfg.max_steps) +
                " steps; use longer episodes");
    const auto s = DriftSchedule::sample(rng);
    const bool ood = s.onset(cfg.max_steps).has_value();
    ++draw;
    if (ood ? n_ood >= cfg.out_of_distribution : n_in >= cfg.in_distribution) continue;
    (ood ? n_ood : n_in) += 1;
    out.push_back({s, derive_seed(cfg.seed, 0x5eed0000ULL + draw)});
  }
  return out;
}

struct SuiteMetrics {
  std::size_t episodes = 0;
  std::size_t in_distribution = 0;
  std::size_t out_of_distribution = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_positives = 0;
  std::optional<double> mean_delay;  // over true positives
};

inline SuiteMetrics summarize(std::span<const EpisodeResult> results) {
  SuiteMetrics m;
  double delay = 0.0;
  for (const auto& r : results) {
    ++m.episodes;
    (r.ood ? m.out_of_distribution : m.in_distribution) += 1;
    switch (r.verdict) {
      case Verdict::false_positive: ++m.false_positives; break;
      case Verdict::false_negative: ++m.false_negatives; break;
      case Verdict::true_positive:
        ++m.true_positives;
        delay += static_cast<double>(*r.delay_frames);
        break;
      case Verdict::true_negative: break;
    }
  }
  if (m.true_positives > 0) m.mean_delay = delay / static_cast<double>(m.true_positives);
  return m;
}

using DetectorFactory = std::function<std::unique_ptr<Detector>()>;

struct SuiteRun {
  std::vector<EpisodeRun> episodes;
  SuiteMetrics metrics;
};

/// Runs every episode with a private detector; results are merged by episode index.
inline SuiteRun run_suite(const SceneGenerator& gen, std::span<const EpisodeSpec> specs,
                          const DetectorFactory& make_detector, std::size_t max_steps = kDefaultEpisodeSteps,
                          std::size_t threads = 1) {
  SuiteRun out;
  out.episodes.resize(specs.size());
  auto worker = [&](std::size_t first, std::size_t stride) {
    auto det = make_detector();
    for (std::size_t i = first; i < specs.size(); i += stride) out.episodes[i] = run_episode(gen, specs[i], *det, max_steps);
  };
  threads = std::max<std::size_t>(1, std::min(threads, specs.size()));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          worker(w, threads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<EpisodeResult> results;
  for (const auto& e : out.episodes) results.push_back(e.result);
  out.metrics = summarize(results);
  return out;
}

// ---------------------------------------------------------------------------
// Threshold search

/// Martingale sequence of a full-length episode, recorded with alarms disabled.
/// Martingale values do not depend on (delta, tau), so any detector setting
/// can be replayed from it.
struct EpisodeTrace {
  std::optional<std::size_t> onset;
  std::vector<double> log_m;
};

inline EpisodeTrace record_trace(const SceneGenerator& gen, const EpisodeSpec& spec, Detector& detector,
                                 std::size_t max_steps = kDefaultEpisodeSteps) {
  detector.reset();
  EpisodeTrace tr{spec.schedule.onset(max_steps), {}};
  tr.log_m.reserve(max_steps);
  for (std::size_t t = 0; t < max_steps; ++t) tr.log_m.push_back(detector.step(episode_frame(gen, spec, t)).log_m);
  return tr;
}

/// First alarm step the detector would raise on `log_m`.
inline std::optional<std::size_t> replay_alarm(std::span<const double> log_m, Method method, double delta,
                                               double tau) {
  if (method == Method::svdd) {
    for (std::size_t t = 0; t < log_m.size(); ++t)
      if (log_m[t] > tau) return t;
    return std::nullopt;
  }
  DetectorState st = DetectorState::cusum(delta, tau);
  for (std::size_t t = 1; t < log_m.size(); ++t) {
    const auto step = cusum_step(st, log_m[t - 1]);
    st = step.state;
    if (step.alarm) return t;
  }
  return std::nullopt;
}

struct GridPoint {
  double delta = 0.0;  // unused for SVDD
  double tau = 0.0;
  SuiteMetrics metrics;
};

struct TuneResult {
  std::vector<GridPoint> grid;
  std::optional<GridPoint> best;  // zero false positives, then fewest misses, then smallest mean delay
};

inline TuneResult tune_thresholds(std::span<const EpisodeTrace> traces, Method method, std::span<const double> deltas,
                                  std::span<const double> taus) {
  require(!taus.empty(), Errc::invalid_argument, "tau grid is empty");
  const std::vector<double> no_delta{0.0};
  if (method == Method::svdd || deltas.empty()) deltas = no_delta;
  TuneResult out;
  for (double delta : deltas) {
    for (double tau : taus) {
      std::vector<EpisodeResult> results;
      results.reserve(traces.size());
      for (const auto& tr : traces) results.push_back(classify_episode(tr.onset, replay_alarm(tr.log_m, method, delta, tau)));
      GridPoint gp{delta, tau, summarize(results)};
      out.grid.push_back(gp);
      if (gp.metrics.false_positives != 0) continue;
      auto key = [](const GridPoint& g) {
        return std::make_pair(g.metrics.false_negatives,
                              g.metrics.mean_delay.value_or(std::numeric_limits<double>::infinity()));
      };
      if (!out.best || key(gp) < key(*out.best)) out.best = gp;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Timing

struct Quartiles {
  double min = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0, max = 0.0;
};

/// Linear-interpolation quantile of sorted data (position q (n - 1)).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), Errc::invalid_argument, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Quartiles quartiles(std::vector<double> data) {
  std::sort(data.begin(), data.end());
  return {data.front(), quantile_sorted(data, 0.25), quantile_sorted(data, 0.5), quantile_sorted(data, 0.75),
          data.back()};
}

struct TimingRow {
  Method method = Method::svdd;
  std::size_t N = 0;
  Quartiles ms;
};

/// Wall-clock milliseconds per detect step over `steps` in-distribution frames,
/// after a short warm-up, for every N.
inline std::vector<TimingRow> benchmark_timing(const std::function<std::unique_ptr<Detector>(std::size_t N)>& make,
                                               std::span<const Example> frames, std::size_t steps,
                                               std::span<const std::size_t> N_values, std::size_t warmup = 50) {
  require(!frames.empty(), Errc::invalid_argument, "benchmark needs frames");
  require(steps >= 1, Errc::invalid_argument, "benchmark needs at least one step");
  // Steps are interleaved across window sizes so machine drift hits every N alike.
  std::vector<std::unique_ptr<Detector>> dets;
  for (std::size_t N : N_values) {
    dets.push_back(make(N));
    for (std::size_t i = 0; i < warmup; ++i) dets.back()->step(frames[i % frames.size()]);
  }
  std::vector<std::vector<double>> ms(dets.size(), std::vector<double>(steps));
  for (std::size_t i = 0; i < steps; ++i) {
    const auto& f = frames[i % frames.size()];
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto rec = dets[k]->step(f);
      const auto t1 = std::chrono::steady_clock::now();
      if (rec.alarm) dets[k]->reset();
      ms[k][i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  }
  std::vector<TimingRow> rows;
  for (std::size_t k = 0; k < dets.size(); ++k)
    rows.push_back({dets[k]->method(), N_values[k], quartiles(std::move(ms[k]))});
  return rows;
}

}  // namespace icad
