#pragma once

// Dense feed-forward networks with hand-written backpropagation, a finite
// difference gradient checker and an Adam optimizer with decoupled weight
// decay. Everything is double precision; networks are small (a few hundred
// inputs at most) so plain loops over std::vector are fast enough.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icad/error.hpp"

namespace icad::nn {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation : std::uint8_t { identity = 0, relu = 1, elu = 2, sigmoid = 3 };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::elu: return "elu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::elu: return x >= 0.0 ? x : std::expm1(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

// Derivative expressed through both the pre-activation and its output.
inline double activation_slope(Activation a, double pre, double post) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::elu: return pre >= 0.0 ? 1.0 : post + 1.0;
    case Activation::sigmoid: return post * (1.0 - post);
  }
  return 1.0;
}

struct DenseLayer {
  Matrix weights;  // out x in
  std::optional<Vector> bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }
  std::size_t param_count() const noexcept { return weights.size() + (bias ? bias->size() : 0); }
};

class Mlp {
 public:
  Mlp() = default;

  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), Errc::invalid_model, "network needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      require(l.in_dim() > 0 && l.out_dim() > 0, Errc::invalid_model,
              "layer " + std::to_string(i) + " has an empty weight matrix");
      require(!l.bias || l.bias->size() == l.out_dim(), Errc::dimension_mismatch,
              "layer " + std::to_string(i) + " bias length differs from output size");
      if (i > 0) {
        require(layers_[i - 1].out_dim() == l.in_dim(), Errc::dimension_mismatch,
                "layer " + std::to_string(i) + " input does not chain with previous output");
      }
    }
  }

  /// Glorot-uniform weights, zero biases. `dims` has one more entry than `activations`.
  static Mlp random(std::span<const std::size_t> dims, std::span<const Activation> activations,
                    bool with_bias, std::mt19937_64& rng) {
    require(dims.size() == activations.size() + 1 && !activations.empty(), Errc::invalid_argument,
            "need dims.size() == activations.size() + 1");
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < activations.size(); ++i) {
      const std::size_t in = dims[i];
      const std::size_t out = dims[i + 1];
      DenseLayer layer{Matrix(out, in), std::nullopt, activations[i]};
      const double a = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> init(-a, a);
      for (double& w : layer.weights.values()) w = init(rng);
      if (with_bias) layer.bias = Vector(out, 0.0);
      layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
  }

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Mutable access bumps the revision, invalidating outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers() noexcept {
    ++revision_;
    return layers_;
  }

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out_dim(); }
  std::uint64_t revision() const noexcept { return revision_; }

  std::size_t param_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.param_count();
    return n;
  }

  bool has_bias() const noexcept {
    return std::any_of(layers_.begin(), layers_.end(), [](const DenseLayer& l) { return l.bias.has_value(); });
  }

  /// Sum of squared Frobenius norms of the weight matrices (biases excluded).
  double weight_squared_norm() const {
    double s = 0.0;
    for (const auto& l : layers_) s += l.weights.squared_norm();
    return s;
  }

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t revision_ = 0;
};

/// Per-layer inputs and pre-activations recorded by `forward`.
struct ForwardCache {
  const Mlp* net = nullptr;
  std::uint64_t revision = 0;
  std::vector<Vector> inputs;
  std::vector<Vector> pre;
  std::vector<Vector> post;
};

struct ForwardResult {
  Vector output;
  ForwardCache cache;
};

namespace detail {

inline void affine(const DenseLayer& layer, std::span<const double> x, Vector& pre) {
  const std::size_t out = layer.out_dim();
  const std::size_t in = layer.in_dim();
  pre.assign(out, 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    const double* w = layer.weights.values().data() + r * in;
    double acc = layer.bias ? (*layer.bias)[r] : 0.0;
    for (std::size_t c = 0; c < in; ++c) acc += w[c] * x[c];
    pre[r] = acc;
  }
}

}  // namespace detail

inline ForwardResult forward(const Mlp& net, std::span<const double> x) {
  require(!net.layers().empty(), Errc::invalid_model, "forward on an empty network");
  require(x.size() == net.input_dim(), Errc::dimension_mismatch,
          "input has " + std::to_string(x.size()) + " values, network expects " +
              std::to_string(net.input_dim()));
  ForwardResult res;
  auto& cache = res.cache;
  cache.net = &net;
  cache.revision = net.revision();
  const auto& layers = net.layers();
  cache.inputs.reserve(layers.size());
  cache.pre.resize(layers.size());
  cache.post.resize(layers.size());
  Vector current(x.begin(), x.end());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    cache.inputs.push_back(current);
    detail::affine(layers[i], current, cache.pre[i]);
    Vector& out = cache.post[i];
    out.resize(cache.pre[i].size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = activate(layers[i].activation, cache.pre[i][j]);
    current = out;
  }
  res.output = std::move(current);
  return res;
}

/// Forward pass without recording a cache.
inline Vector predict(const Mlp& net, std::span<const double> x) {
  require(!net.layers().empty(), Errc::invalid_model, "forward on an empty network");
  require(x.size() == net.input_dim(), Errc::dimension_mismatch,
          "input has " + std::to_string(x.size()) + " values, network expects " +
              std::to_string(net.input_dim()));
  Vector current(x.begin(), x.end());
  Vector pre;
  for (const auto& layer : net.layers()) {
    detail::affine(layer, current, pre);
    for (double& v : pre) v = activate(layer.activation, v);
    std::swap(current, pre);
  }
  return current;
}

/// Parameter-shaped container for gradients and optimizer moments.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::optional<Vector>> bias;

  static Gradients zeros_like(const Mlp& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
      g.weights.emplace_back(l.out_dim(), l.in_dim(), 0.0);
      g.bias.push_back(l.bias ? std::optional<Vector>(Vector(l.out_dim(), 0.0)) : std::nullopt);
    }
    return g;
  }

  void add(const Gradients& other, double scale = 1.0) {
    require(other.weights.size() == weights.size(), Errc::dimension_mismatch, "gradient layer count");
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto dst = weights[i].values();
      auto src = other.weights[i].values();
      require(dst.size() == src.size(), Errc::dimension_mismatch, "gradient weight shape");
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
      if (bias[i] && other.bias[i]) {
        for (std::size_t k = 0; k < bias[i]->size(); ++k) (*bias[i])[k] += scale * (*other.bias[i])[k];
      }
    }
  }

  void scale(double s) {
    for (auto& w : weights)
      for (double& v : w.values()) v *= s;
    for (auto& b : bias)
      if (b)
        for (double& v : *b) v *= s;
  }
};

struct BackwardResult {
  Gradients params;
  Vector input_grad;
};

/// Accumulates dL/dparams into `acc` and returns dL/dx. `loss_grad` is dL/dy.
inline Vector backward_into(const Mlp& net, const ForwardCache& cache, std::span<const double> loss_grad,
                            Gradients& acc) {
  require(cache.net == &net, Errc::stale_cache, "forward cache belongs to a different network");
  require(cache.revision == net.revision(), Errc::stale_cache, "network was modified after the forward pass");
  const auto& layers = net.layers();
  require(cache.pre.size() == layers.size() && cache.inputs.size() == layers.size(), Errc::stale_cache,
          "forward cache layer count mismatch");
  require(loss_grad.size() == net.output_dim(), Errc::dimension_mismatch, "loss gradient length");
  require(acc.weights.size() == layers.size(), Errc::dimension_mismatch, "gradient accumulator layer count");

  Vector delta(loss_grad.begin(), loss_grad.end());
  Vector prev;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& layer = layers[li];
    const auto& pre = cache.pre[li];
    const auto& post = cache.post[li];
    const auto& x = cache.inputs[li];
    for (std::size_t j = 0; j < delta.size(); ++j) delta[j] *= activation_slope(layer.activation, pre[j], post[j]);

    const std::size_t in = layer.in_dim();
    auto gw = acc.weights[li].values();
    for (std::size_t r = 0; r < delta.size(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      double* row = gw.data() + r * in;
      for (std::size_t c = 0; c < in; ++c) row[c] += d * x[c];
    }
    if (layer.bias && acc.bias[li]) {
      for (std::size_t r = 0; r < delta.size(); ++r) (*acc.bias[li])[r] += delta[r];
    }

    prev.assign(in, 0.0);
    for (std::size_t r = 0; r < delta.size(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      auto w = layer.weights.row(r);
      for (std::size_t c = 0; c < in; ++c) prev[c] += d * w[c];
    }
    std::swap(delta, prev);
  }
  return delta;
}

inline BackwardResult backward(const Mlp& net, const ForwardCache& cache, std::span<const double> loss_grad) {
  BackwardResult res{Gradients::zeros_like(net), {}};
  res.input_grad = backward_into(net, cache, loss_grad, res.params);
  return res;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
  std::string worst;  // location of the largest discrepancy
};

/// Compares `analytic` against central differences of `loss`, perturbing every
/// parameter of every network in `nets`. Relative error is
/// |a - n| / max(|a|, |n|, abs_floor).
inline GradCheckReport grad_check(std::span<Mlp* const> nets, const std::function<double()>& loss,
                                  std::span<const Gradients> analytic, double tolerance, double h = 1e-5,
                                  double abs_floor = 1e-6) {
  require(nets.size() == analytic.size(), Errc::invalid_argument, "one gradient set per network");
  GradCheckReport rep;
  auto probe = [&](double& param, double a, const std::string& where) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
    const double rel = std::abs(a - numeric) / denom;
    ++rep.checked;
    if (!(rel <= rep.max_rel_error)) {
      rep.max_rel_error = rel;
      rep.worst = where;
    }
  };
  for (std::size_t n = 0; n < nets.size(); ++n) {
    auto& layers = nets[n]->mutable_layers();
    const auto& g = analytic[n];
    require(g.weights.size() == layers.size(), Errc::dimension_mismatch, "analytic gradient layer count");
    for (std::size_t li = 0; li < layers.size(); ++li) {
      auto w = layers[li].weights.values();
      auto gw = g.weights[li].values();
      for (std::size_t k = 0; k < w.size(); ++k)
        probe(w[k], gw[k], "net " + std::to_string(n) + " layer " + std::to_string(li) + " weight " + std::to_string(k));
      if (layers[li].bias && g.bias[li]) {
        auto& b = *layers[li].bias;
        for (std::size_t k = 0; k < b.size(); ++k)
          probe(b[k], (*g.bias[li])[k],
                "net " + std::to_string(n) + " layer " + std::to_string(li) + " bias " + std::to_string(k));
      }
    }
  }
  rep.passed = rep.max_rel_error < tolerance;
  return rep;
}

/// Single-network convenience: `loss_and_grad` returns the loss and its analytic gradient.
inline GradCheckReport grad_check(Mlp& net, const std::function<std::pair<double, Gradients>(const Mlp&)>& loss_and_grad,
                                  double tolerance, double h = 1e-5) {
  const Gradients analytic = loss_and_grad(net).second;
  Mlp* nets[] = {&net};
  return grad_check(nets, [&] { return loss_and_grad(net).first; }, std::span<const Gradients>(&analytic, 1),
                    tolerance, h);
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled, applied to weights only
};

/// Adam with decoupled weight decay. Moments mirror the tracked network's shapes.
class Adam {
 public:
  Adam(const Mlp& net, AdamConfig cfg)
      : cfg_(cfg), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {
    require(cfg.learning_rate > 0.0, Errc::invalid_argument, "learning rate must be positive");
    require(cfg.weight_decay >= 0.0, Errc::invalid_argument, "weight decay must be nonnegative");
  }

  const AdamConfig& config() const noexcept { return cfg_; }
  void set_learning_rate(double lr) {
    require(lr > 0.0, Errc::invalid_argument, "learning rate must be positive");
    cfg_.learning_rate = lr;
  }
  std::uint64_t steps() const noexcept { return t_; }
  const Gradients& first_moment() const noexcept { return m_; }
  const Gradients& second_moment() const noexcept { return v_; }

  void step(Mlp& net, const Gradients& grads) {
    require(grads.weights.size() == net.layers().size(), Errc::dimension_mismatch, "gradient layer count");
    for (std::size_t li = 0; li < grads.weights.size(); ++li) {
      require(grads.weights[li].size() == net.layers()[li].weights.size(), Errc::dimension_mismatch,
              "gradient shape for layer " + std::to_string(li));
      for (double g : grads.weights[li].values())
        require(std::isfinite(g), Errc::non_finite, "gradient of layer " + std::to_string(li) + " weights");
      if (grads.bias[li])
        for (double g : *grads.bias[li])
          require(std::isfinite(g), Errc::non_finite, "gradient of layer " + std::to_string(li) + " bias");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto& layers = net.mutable_layers();
    auto update = [&](std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                      double decay) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
        const double mhat = m[k] / c1;
        const double vhat = v[k] / c2;
        p[k] -= cfg_.learning_rate * (mhat / (std::sqrt(vhat) + cfg_.epsilon) + decay * p[k]);
      }
    };
    for (std::size_t li = 0; li < layers.size(); ++li) {
      update(layers[li].weights.values(), grads.weights[li].values(), m_.weights[li].values(),
             v_.weights[li].values(), cfg_.weight_decay);
      if (layers[li].bias && grads.bias[li]) {
        update(*layers[li].bias, *grads.bias[li], *m_.bias[li], *v_.bias[li], 0.0);
      }
    }
  }

 private:
  AdamConfig cfg_;
  Gradients m_;
  Gradients v_;
  std::uint64_t t_ = 0;
};

}  // namespace icad::nn
