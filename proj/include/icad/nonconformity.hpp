#pragma once

// Nonconformity measures: larger score = stranger example. Four measures are
// provided (k-NN, Gaussian KDE, VAE reconstruction error, SVDD distance) plus a
// type-erased Scorer used by calibration and the detectors.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "icad/error.hpp"
#include "icad/models.hpp"
#include "icad/neural.hpp"
#include "icad/types.hpp"

namespace icad {

inline constexpr std::size_t kDefaultKnnK = 10;

/// Mean Euclidean distance from z to its k nearest neighbors; ties resolve by index.
inline double knn_score(std::span<const Example> train, std::span<const double> z, std::size_t k) {
  require(!train.empty(), Errc::invalid_argument, "k-NN needs a nonempty training set");
  require(k >= 1 && k <= train.size(), Errc::invalid_argument,
          "k must be in [1, " + std::to_string(train.size()) + "], got " + std::to_string(k));
  std::vector<std::pair<double, std::size_t>> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) d[i] = {squared_distance(train[i], z), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::sqrt(d[i].first);
  return s / static_cast<double>(k);
}

/// Per-dimension Silverman bandwidth sigma_j * (4 / ((d + 2) n))^(1 / (d + 4)).
/// Dimensions with zero spread fall back to sigma = 1.
inline std::vector<double> silverman_bandwidth(std::span<const Example> train) {
  require(!train.empty(), Errc::invalid_argument, "bandwidth needs a nonempty training set");
  const std::size_t n = train.size();
  const std::size_t dim = train.front().size();
  const double factor = std::pow(4.0 / ((static_cast<double>(dim) + 2.0) * static_cast<double>(n)),
                                 1.0 / (static_cast<double>(dim) + 4.0));
  std::vector<double> h(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (const auto& z : train) mean += z[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& z : train) var += (z[j] - mean) * (z[j] - mean);
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    const double sigma = var > 0.0 ? std::sqrt(var) : 1.0;
    h[j] = sigma * factor;
  }
  return h;
}

/// -log of the product-Gaussian density estimate, offset so that a query
/// coinciding with every training point scores exactly 0.
inline double kde_score(std::span<const Example> train, std::span<const double> z, std::span<const double> bandwidth) {
  require(!train.empty(), Errc::invalid_argument, "KDE needs a nonempty training set");
  require(bandwidth.size() == z.size(), Errc::dimension_mismatch, "one bandwidth per dimension");
  for (double h : bandwidth) require(h > 0.0 && std::isfinite(h), Errc::invalid_argument, "bandwidth must be > 0");
  std::vector<double> logk(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    require(train[i].size() == z.size(), Errc::dimension_mismatch, "training example dimension");
    double q = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double u = (z[j] - train[i][j]) / bandwidth[j];
      q += u * u;
    }
    logk[i] = -0.5 * q;
  }
  const double mx = *std::max_element(logk.begin(), logk.end());
  double acc = 0.0;
  for (double v : logk) acc += std::exp(v - mx);
  const double score = std::log(static_cast<double>(train.size())) - (mx + std::log(acc));
  return std::max(score, 0.0);
}

inline double kde_score(std::span<const Example> train, std::span<const double> z, double bandwidth) {
  require(bandwidth > 0.0, Errc::invalid_argument, "bandwidth must be > 0");
  const std::vector<double> h(z.size(), bandwidth);
  return kde_score(train, z, h);
}

/// Squared reconstruction error ||z - z'||^2.
inline double vae_score(std::span<const double> z, std::span<const double> reconstruction) {
  return squared_distance(z, reconstruction);
}

/// ||phi(z) - c||^2.
inline double svdd_score(const SvddModel& model, std::span<const double> z) {
  return squared_distance(nn::predict(model.mapper(), z), model.center());
}

enum class ScorerKind : std::uint8_t { knn = 1, kde = 2, vae = 3, svdd = 4 };

inline const char* scorer_kind_name(ScorerKind k) {
  switch (k) {
    case ScorerKind::knn: return "knn";
    case ScorerKind::kde: return "kde";
    case ScorerKind::vae: return "vae";
    case ScorerKind::svdd: return "svdd";
  }
  return "?";
}

inline ScorerKind parse_scorer_kind(const std::string& s) {
  if (s == "knn") return ScorerKind::knn;
  if (s == "kde") return ScorerKind::kde;
  if (s == "vae") return ScorerKind::vae;
  if (s == "svdd") return ScorerKind::svdd;
  throw Error(Errc::invalid_argument, "unknown scorer '" + s + "'");
}

/// 64-bit FNV-1a, used to bind calibration scores to the scorer that produced them.
class Fingerprint {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
      bytes(&b, 1);
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  // Parameters are persisted as float32, so they are hashed at that precision.
  void f32(double v) { u64(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void mlp(const nn::Mlp& net) {
    u64(net.layers().size());
    for (const auto& l : net.layers()) {
      u64(l.in_dim());
      u64(l.out_dim());
      u64(static_cast<std::uint64_t>(l.activation));
      u64(l.bias ? 1 : 0);
      for (double w : l.weights.values()) f32(w);
      if (l.bias)
        for (double b : *l.bias) f32(b);
    }
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// Immutable nonconformity scorer; cheap to copy, safe to share across threads.
class Scorer {
 public:
  static Scorer knn(Dataset proper_train, std::size_t k = kDefaultKnnK) {
    require(!proper_train.empty(), Errc::invalid_argument, "k-NN needs a nonempty training set");
    require(k >= 1 && k <= proper_train.size(), Errc::invalid_argument, "k out of range");
    return Scorer(Knn{std::make_shared<const Dataset>(std::move(proper_train)), k});
  }

  /// Empty bandwidth selects Silverman's rule on the proper training set.
  static Scorer kde(Dataset proper_train, std::vector<double> bandwidth = {}) {
    require(!proper_train.empty(), Errc::invalid_argument, "KDE needs a nonempty training set");
    if (bandwidth.empty()) bandwidth = silverman_bandwidth(proper_train);
    require(bandwidth.size() == proper_train.front().size(), Errc::dimension_mismatch, "bandwidth length");
    for (double h : bandwidth) require(h > 0.0, Errc::invalid_argument, "bandwidth must be > 0");
    return Scorer(Kde{std::make_shared<const Dataset>(std::move(proper_train)), std::move(bandwidth)});
  }

  static Scorer vae(std::shared_ptr<const VaeModel> model) {
    require(model != nullptr, Errc::invalid_argument, "null VAE model");
    return Scorer(Vae{std::move(model)});
  }

  static Scorer svdd(std::shared_ptr<const SvddModel> model) {
    require(model != nullptr, Errc::invalid_argument, "null SVDD model");
    require(model->has_center(), Errc::uninitialized, "SVDD center has not been initialized");
    return Scorer(Svdd{std::move(model)});
  }

  ScorerKind kind() const noexcept {
    return std::visit([](const auto& s) { return s.kind; }, impl_);
  }

  std::size_t input_dim() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Knn> || std::is_same_v<T, Kde>)
            return s.train->front().size();
          else
            return s.model->input_dim();
        },
        impl_);
  }

  /// Single score. For the VAE this uses the noise-free mean reconstruction.
  double score(std::span<const double> z) const {
    require(z.size() == input_dim(), Errc::dimension_mismatch,
            "example has " + std::to_string(z.size()) + " values, scorer expects " + std::to_string(input_dim()));
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Knn>)
            return knn_score(*s.train, z, s.k);
          else if constexpr (std::is_same_v<T, Kde>)
            return kde_score(*s.train, z, s.bandwidth);
          else if constexpr (std::is_same_v<T, Vae>)
            return vae_score(z, vae_mean_reconstruction(*s.model, z));
          else
            return svdd_score(*s.model, z);
        },
        impl_);
  }

  /// VAE only: scores of `count` sampled reconstructions of z.
  std::vector<double> score_many(std::span<const double> z, std::size_t count, std::uint64_t seed) const {
    const auto* v = std::get_if<Vae>(&impl_);
    require(v != nullptr, Errc::invalid_argument, "score_many is only defined for the VAE scorer");
    require(z.size() == input_dim(), Errc::dimension_mismatch, "example dimension");
    const auto recon = vae_sample_reconstructions(*v->model, z, count, seed);
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = vae_score(z, recon[k]);
    return out;
  }

  std::uint64_t fingerprint() const {
    Fingerprint fp;
    fp.u64(static_cast<std::uint64_t>(kind()));
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Knn> || std::is_same_v<T, Kde>) {
            if constexpr (std::is_same_v<T, Knn>)
              fp.u64(s.k);
            else
              for (double h : s.bandwidth) fp.f64(h);
            fp.u64(s.train->size());
            for (const auto& z : *s.train)
              for (double v : z) fp.f32(v);
          } else if constexpr (std::is_same_v<T, Vae>) {
            fp.u64(s.model->latent_dim());
            fp.mlp(s.model->encoder());
            fp.mlp(s.model->decoder());
          } else {
            fp.mlp(s.model->mapper());
            for (double c : s.model->center()) fp.f64(c);
          }
        },
        impl_);
    return fp.value();
  }

  const VaeModel* vae_model() const noexcept {
    const auto* v = std::get_if<Vae>(&impl_);
    return v ? v->model.get() : nullptr;
  }
  const SvddModel* svdd_model() const noexcept {
    const auto* v = std::get_if<Svdd>(&impl_);
    return v ? v->model.get() : nullptr;
  }

 private:
  struct Knn {
    static constexpr ScorerKind kind = ScorerKind::knn;
    std::shared_ptr<const Dataset> train;
    std::size_t k;
  };
  struct Kde {
    static constexpr ScorerKind kind = ScorerKind::kde;
    std::shared_ptr<const Dataset> train;
    std::vector<double> bandwidth;
  };
  struct Vae {
    static constexpr ScorerKind kind = ScorerKind::vae;
    std::shared_ptr<const VaeModel> model;
  };
  struct Svdd {
    static constexpr ScorerKind kind = ScorerKind::svdd;
    std::shared_ptr<const SvddModel> model;
  };
  using Impl = std::variant<Knn, Kde, Vae, Svdd>;

  explicit Scorer(Impl impl) : impl_(std::move(impl)) {}

  Impl impl_;
};

}  // namespace icad
