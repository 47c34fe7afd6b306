#pragma once

// Inductive conformal anomaly detection: calibration, conformal p-values,
// power / simple-mixture martingales, the CUSUM and threshold detectors, and
// the per-step VAE and SVDD detection pipelines.
//
// Martingales are handled in the log domain throughout. The detector
// parameters delta and tau are therefore log-domain quantities as well.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icad/error.hpp"
#include "icad/models.hpp"
#include "icad/nonconformity.hpp"
#include "icad/types.hpp"

namespace icad {

/// Sorted calibration nonconformity scores bound to the scorer that produced them.
class CalibrationSet {
 public:
  CalibrationSet(std::vector<double> sorted_scores, std::uint64_t fingerprint, ScorerKind kind)
      : scores_(std::move(sorted_scores)), fingerprint_(fingerprint), kind_(kind) {
    require(!scores_.empty(), Errc::invalid_argument, "calibration set is empty");
    require_finite(scores_, "calibration scores");
    require(std::is_sorted(scores_.begin(), scores_.end()), Errc::unsorted_scores,
            "calibration scores are not sorted ascending");
  }

  static CalibrationSet from_unsorted(std::vector<double> scores, std::uint64_t fingerprint, ScorerKind kind) {
    std::sort(scores.begin(), scores.end());
    return CalibrationSet(std::move(scores), fingerprint, kind);
  }

  std::span<const double> scores() const noexcept { return scores_; }
  std::size_t size() const noexcept { return scores_.size(); }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  ScorerKind kind() const noexcept { return kind_; }

  bool operator==(const CalibrationSet&) const = default;

 private:
  std::vector<double> scores_;
  std::uint64_t fingerprint_;
  ScorerKind kind_;
};

struct CalibrationOptions {
  // VAE only: when > 0 each calibration example contributes this many scores
  // from sampled reconstructions instead of one mean-reconstruction score.
  std::size_t vae_samples = 0;
  std::uint64_t seed = 0;
};

/// Scores every calibration example against `scorer` and sorts the result.
inline CalibrationSet calibrate(const Scorer& scorer, std::span<const Example> calibration,
                                const CalibrationOptions& opts = {}) {
  require(!calibration.empty(), Errc::invalid_argument, "calibration portion is empty");
  std::vector<double> scores;
  scores.reserve(calibration.size() * std::max<std::size_t>(1, opts.vae_samples));
  for (std::size_t i = 0; i < calibration.size(); ++i) {
    const auto& z = calibration[i];
    require(z.size() == scorer.input_dim(), Errc::dimension_mismatch,
            "calibration example " + std::to_string(i) + " has dimension " + std::to_string(z.size()) +
                ", scorer expects " + std::to_string(scorer.input_dim()));
    if (opts.vae_samples > 0 && scorer.kind() == ScorerKind::vae) {
      auto many = scorer.score_many(z, opts.vae_samples, derive_seed(opts.seed, i));
      scores.insert(scores.end(), many.begin(), many.end());
    } else {
      scores.push_back(scorer.score(z));
    }
  }
  return CalibrationSet::from_unsorted(std::move(scores), scorer.fingerprint(), scorer.kind());
}

/// Splits `train` into the first m (proper) and the rest (calibration), builds
/// the scorer on the proper part and scores the calibration part.
inline CalibrationSet calibrate(std::span<const Example> train, std::size_t m,
                                const std::function<Scorer(std::span<const Example>)>& build_scorer,
                                const CalibrationOptions& opts = {}) {
  require(m > 0 && m < train.size(), Errc::invalid_argument,
          "proper training size m=" + std::to_string(m) + " must satisfy 0 < m < " + std::to_string(train.size()));
  const Scorer scorer = build_scorer(train.subspan(0, m));
  return calibrate(scorer, train.subspan(m), opts);
}

/// Smallest p-value ever reported: 1 / (|cal| + 1).
inline double p_value_floor(std::size_t calibration_size) { return 1.0 / (static_cast<double>(calibration_size) + 1.0); }

/// Fraction of calibration scores >= alpha, floored at 1/(|cal|+1).
inline double p_value(double alpha, const CalibrationSet& cal) {
  require(std::isfinite(alpha), Errc::non_finite, "nonconformity score");
  const auto s = cal.scores();
  const auto first_ge = std::lower_bound(s.begin(), s.end(), alpha);
  const double count = static_cast<double>(s.end() - first_ge);
  return std::max(count / static_cast<double>(s.size()), p_value_floor(s.size()));
}

/// log of prod_i eps * p_i^(eps - 1).
inline double power_martingale_log(std::span<const double> p, double eps) {
  require(eps > 0.0 && eps <= 1.0, Errc::invalid_argument, "epsilon must be in (0, 1]");
  double acc = 0.0;
  const double log_eps = std::log(eps);
  for (double v : p) {
    require(v > 0.0 && v <= 1.0, Errc::invalid_argument, "p-value outside (0, 1]");
    acc += log_eps + (eps - 1.0) * std::log(v);
  }
  return acc;
}

inline constexpr std::size_t kMixtureIntervals = 1000;

/// log of the integral over [a, b] of exp(log_f(x)), composite Simpson with
/// log-sum-exp accumulation. `intervals` must be even.
inline double log_simpson(const std::function<double(double)>& log_f, double a, double b,
                          std::size_t intervals = kMixtureIntervals) {
  require(intervals >= 2 && intervals % 2 == 0, Errc::invalid_argument, "Simpson needs an even interval count");
  require(b > a, Errc::invalid_argument, "empty integration range");
  const double h = (b - a) / static_cast<double>(intervals);
  std::vector<double> terms(intervals + 1);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = (i == intervals) ? b : a + h * static_cast<double>(i);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    terms[i] = std::log(w) + log_f(x);
    mx = std::max(mx, terms[i]);
  }
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return mx + std::log(acc) + std::log(h / 3.0);
}

/// log of the simple mixture martingale, integral over eps in [0, 1] of
/// exp(n log eps + (eps - 1) sum_log_p). Depends on the p-values only through
/// their log-sum, which is what makes the sliding-window update exact.
inline double mixture_martingale_log(std::size_t n, double sum_log_p) {
  require(n > 0, Errc::invalid_argument, "mixture martingale needs at least one p-value");
  require(std::isfinite(sum_log_p) && sum_log_p <= 0.0, Errc::invalid_argument, "log p-value sum must be <= 0");
  const double dn = static_cast<double>(n);
  const double h = 1.0 / static_cast<double>(kMixtureIntervals);
  double terms[kMixtureIntervals + 1];
  terms[0] = -std::numeric_limits<double>::infinity();  // eps = 0 contributes nothing for n >= 1
  double mx = terms[0];
  for (std::size_t i = 1; i <= kMixtureIntervals; ++i) {
    const double eps = (i == kMixtureIntervals) ? 1.0 : h * static_cast<double>(i);
    const double w = (i == kMixtureIntervals) ? 0.0 : (i % 2 == 1 ? std::log(4.0) : std::log(2.0));
    terms[i] = w + dn * std::log(eps) + (eps - 1.0) * sum_log_p;
    mx = std::max(mx, terms[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 1; i <= kMixtureIntervals; ++i) acc += std::exp(terms[i] - mx);
  return mx + std::log(acc) + std::log(h / 3.0);
}

inline double mixture_martingale_log(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) {
    require(v > 0.0 && v <= 1.0, Errc::invalid_argument, "p-value outside (0, 1]");
    s += std::log(v);
  }
  return mixture_martingale_log(p.size(), s);
}

/// Sliding window of the last N log p-values with a running sum.
class MartingaleState {
 public:
  static constexpr std::size_t kRecomputeEvery = 1024;

  explicit MartingaleState(std::size_t window) : window_(window) {
    require(window > 0, Errc::invalid_argument, "window size must be positive");
    ring_.reserve(window);
  }

  /// Window pre-filled with seeded uniform p-values in (0, 1].
  static MartingaleState warmed_up(std::size_t window, std::uint64_t seed) {
    MartingaleState st(window);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < window; ++i) st.push(1.0 - u(rng));
    return st;
  }

  void push(double p) {
    require(p > 0.0 && p <= 1.0, Errc::invalid_argument, "p-value outside (0, 1]");
    const double lp = std::log(p);
    if (ring_.size() < window_) {
      ring_.push_back(lp);
      sum_ += lp;
    } else {
      sum_ += lp - ring_[head_];
      ring_[head_] = lp;
      head_ = (head_ + 1) % window_;
    }
    if (++pushes_ % kRecomputeEvery == 0) recompute();
  }

  void recompute() {
    double s = 0.0;
    for (double v : ring_) s += v;
    sum_ = s;
  }

  std::size_t window() const noexcept { return window_; }
  std::size_t size() const noexcept { return ring_.size(); }
  bool full() const noexcept { return ring_.size() == window_; }
  double sum_log() const noexcept { return sum_; }

  /// Window contents (log p), oldest first.
  std::vector<double> contents() const {
    std::vector<double> out;
    out.reserve(ring_.size());
    for (std::size_t i = 0; i < ring_.size(); ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
  }

 private:
  std::size_t window_;
  std::vector<double> ring_;
  std::size_t head_ = 0;  // oldest entry once full
  double sum_ = 0.0;
  std::uint64_t pushes_ = 0;
};

inline double mixture_martingale_log(const MartingaleState& st) {
  require(st.size() > 0, Errc::invalid_argument, "martingale window is empty");
  return mixture_martingale_log(st.size(), std::min(st.sum_log(), 0.0));
}

enum class DetectorMode { stateful_cusum, stateless_threshold };

struct DetectorState {
  DetectorMode mode = DetectorMode::stateless_threshold;
  double S = 0.0;
  double tau = 0.0;
  double delta = 0.0;
  double last_M_log = 0.0;
  bool has_last = false;

  static DetectorState cusum(double delta, double tau) {
    return {DetectorMode::stateful_cusum, 0.0, tau, delta, 0.0, false};
  }
  static DetectorState stateless(double tau) { return {DetectorMode::stateless_threshold, 0.0, tau, 0.0, 0.0, false}; }
};

struct DetectorStep {
  DetectorState state;
  bool alarm = false;
};

/// S <- max(0, S + M_log_prev - delta); alarm iff S > tau, after which S resets to 0.
inline DetectorStep cusum_step(DetectorState state, double M_log_prev) {
  require(state.mode == DetectorMode::stateful_cusum, Errc::invalid_argument, "detector is not in CUSUM mode");
  state.S = std::max(0.0, state.S + M_log_prev - state.delta);
  const bool alarm = state.S > state.tau;
  if (alarm) state.S = 0.0;
  return {state, alarm};
}

/// Alarm iff M_log > tau.
inline DetectorStep stateless_step(DetectorState state, double M_log) {
  require(state.mode == DetectorMode::stateless_threshold, Errc::invalid_argument,
          "detector is not in stateless mode");
  state.last_M_log = M_log;
  state.has_last = true;
  return {state, M_log > state.tau};
}

struct VaeStepDiagnostics {
  std::vector<double> scores;
  std::vector<double> p_values;
  double M_log = 0.0;
  double S = 0.0;
  bool alarm = false;
};

/// One step of VAE detection: N sampled reconstructions, N p-values, the
/// mixture martingale over them, then CUSUM driven by the previous step's
/// martingale (the first step has no predecessor and leaves S at 0).
inline VaeStepDiagnostics vae_detect_step(std::span<const double> z, const VaeModel& vae, const CalibrationSet& cal,
                                          std::size_t N, DetectorState& detector, std::uint64_t seed) {
  require(N >= 1, Errc::invalid_argument, "N must be at least 1");
  require(cal.kind() == ScorerKind::vae, Errc::fingerprint_mismatch, "calibration was not built with the VAE scorer");
  VaeStepDiagnostics d;
  const auto recon = vae_sample_reconstructions(vae, z, N, seed);
  d.scores.reserve(N);
  d.p_values.reserve(N);
  for (const auto& r : recon) {
    d.scores.push_back(vae_score(z, r));
    d.p_values.push_back(p_value(d.scores.back(), cal));
  }
  d.M_log = mixture_martingale_log(d.p_values);
  if (detector.has_last) {
    const auto step = cusum_step(detector, detector.last_M_log);
    detector = step.state;
    d.alarm = step.alarm;
  } else {
    detector.S = 0.0;
    d.alarm = detector.S > detector.tau;
  }
  detector.last_M_log = d.M_log;
  detector.has_last = true;
  d.S = detector.S;
  return d;
}

struct SvddStepDiagnostics {
  double score = 0.0;
  double p = 1.0;
  double M_log = 0.0;
  double window_sum = 0.0;
  bool alarm = false;
};

/// One step of SVDD detection: score, p-value, sliding-window update,
/// mixture martingale over the window, stateless threshold.
inline SvddStepDiagnostics svdd_detect_step(std::span<const double> z, const SvddModel& svdd, const CalibrationSet& cal,
                                            MartingaleState& martingale, DetectorState& detector) {
  require(cal.kind() == ScorerKind::svdd, Errc::fingerprint_mismatch,
          "calibration was not built with the SVDD scorer");
  SvddStepDiagnostics d;
  d.score = svdd_score(svdd, z);
  d.p = p_value(d.score, cal);
  martingale.push(d.p);
  d.window_sum = martingale.sum_log();
  d.M_log = mixture_martingale_log(martingale);
  const auto step = stateless_step(detector, d.M_log);
  detector = step.state;
  d.alarm = step.alarm;
  return d;
}

/// One row of per-step diagnostics, shared by both pipelines.
struct StepRecord {
  std::size_t step = 0;
  double score = 0.0;          // VAE: mean of the N sampled scores
  std::vector<double> p;       // VAE: p_1..p_N; SVDD: the single p_t
  double log_m = 0.0;
  double S = 0.0;              // VAE: CUSUM statistic; SVDD: window log-p sum
  bool alarm = false;
};

enum class Method { vae, svdd };

inline const char* method_name(Method m) { return m == Method::vae ? "vae" : "svdd"; }
inline Method parse_method(const std::string& s) {
  if (s == "vae") return Method::vae;
  if (s == "svdd") return Method::svdd;
  throw Error(Errc::invalid_argument, "unknown method '" + s + "'");
}

/// Stream detector owning its per-stream state; models and calibration are shared read-only.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual StepRecord step(std::span<const double> z) = 0;
  virtual void reset() = 0;
  virtual Method method() const noexcept = 0;
  virtual std::size_t N() const noexcept = 0;
};

class VaeDetector final : public Detector {
 public:
  VaeDetector(const Scorer& scorer, std::shared_ptr<const CalibrationSet> cal, std::size_t N, double delta,
              double tau, std::uint64_t seed)
      : cal_(std::move(cal)), N_(N), delta_(delta), tau_(tau), seed_(seed) {
    require(N >= 1, Errc::invalid_argument, "N must be at least 1");
    require(scorer.kind() == ScorerKind::vae && scorer.vae_model() != nullptr, Errc::invalid_argument,
            "VAE detector needs a VAE scorer");
    require(cal_ && cal_->fingerprint() == scorer.fingerprint(), Errc::fingerprint_mismatch,
            "calibration set was produced by a different scorer");
    scorer_ = scorer;
    reset();
  }

  StepRecord step(std::span<const double> z) override {
    const auto d = vae_detect_step(z, *scorer_->vae_model(), *cal_, N_, state_, derive_seed(seed_, t_));
    StepRecord r;
    r.step = t_++;
    double mean = 0.0;
    for (double s : d.scores) mean += s;
    r.score = mean / static_cast<double>(d.scores.size());
    r.p = d.p_values;
    r.log_m = d.M_log;
    r.S = d.S;
    r.alarm = d.alarm;
    return r;
  }

  void reset() override {
    state_ = DetectorState::cusum(delta_, tau_);
    t_ = 0;
  }
  Method method() const noexcept override { return Method::vae; }
  std::size_t N() const noexcept override { return N_; }
  const DetectorState& state() const noexcept { return state_; }

 private:
  std::optional<Scorer> scorer_;
  std::shared_ptr<const CalibrationSet> cal_;
  std::size_t N_;
  double delta_;
  double tau_;
  std::uint64_t seed_;
  DetectorState state_;
  std::size_t t_ = 0;
};

class SvddDetector final : public Detector {
 public:
  SvddDetector(const Scorer& scorer, std::shared_ptr<const CalibrationSet> cal, std::size_t N, double tau,
               std::uint64_t seed)
      : cal_(std::move(cal)), N_(N), tau_(tau), seed_(seed), martingale_(N >= 1 ? N : 1) {
    require(N >= 1, Errc::invalid_argument, "window size N must be at least 1");
    require(scorer.kind() == ScorerKind::svdd && scorer.svdd_model() != nullptr, Errc::invalid_argument,
            "SVDD detector needs an SVDD scorer");
    require(cal_ && cal_->fingerprint() == scorer.fingerprint(), Errc::fingerprint_mismatch,
            "calibration set was produced by a different scorer");
    scorer_ = scorer;
    reset();
  }

  StepRecord step(std::span<const double> z) override {
    const auto d = svdd_detect_step(z, *scorer_->svdd_model(), *cal_, martingale_, state_);
    StepRecord r;
    r.step = t_++;
    r.score = d.score;
    r.p = {d.p};
    r.log_m = d.M_log;
    r.S = d.window_sum;
    r.alarm = d.alarm;
    return r;
  }

  void reset() override {
    martingale_ = MartingaleState::warmed_up(N_, seed_);
    state_ = DetectorState::stateless(tau_);
    t_ = 0;
  }
  Method method() const noexcept override { return Method::svdd; }
  std::size_t N() const noexcept override { return N_; }
  const MartingaleState& martingale() const noexcept { return martingale_; }

 private:
  std::optional<Scorer> scorer_;
  std::shared_ptr<const CalibrationSet> cal_;
  std::size_t N_;
  double tau_;
  std::uint64_t seed_;
  MartingaleState martingale_;
  DetectorState state_;
  std::size_t t_ = 0;
};

}  // namespace icad
