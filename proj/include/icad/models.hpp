#pragma once

// Learned nonconformity backbones: a variational autoencoder (Gaussian
// decoder with unit variance, so the reconstruction term is a squared error)
// and a one-class deep SVDD mapper with a frozen center.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "icad/error.hpp"
#include "icad/neural.hpp"
#include "icad/types.hpp"

namespace icad {

struct TrainConfig {
  std::size_t epochs = 300;             // first phase
  std::size_t fine_tune_epochs = 100;   // second phase, may be 0
  double learning_rate = 1e-4;
  double fine_tune_learning_rate = 1e-5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    require(epochs > 0, Errc::invalid_argument, "epochs must be positive");
    require(batch_size > 0, Errc::invalid_argument, "batch size must be positive");
    require(learning_rate > 0.0 && fine_tune_learning_rate > 0.0, Errc::invalid_argument,
            "learning rates must be positive");
  }
  std::size_t total_epochs() const noexcept { return epochs + fine_tune_epochs; }
  double rate_for_epoch(std::size_t epoch) const noexcept {
    return epoch < epochs ? learning_rate : fine_tune_learning_rate;
  }
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

inline std::vector<nn::Activation> hidden_then(std::size_t hidden, nn::Activation hidden_act, nn::Activation last) {
  std::vector<nn::Activation> acts(hidden, hidden_act);
  acts.push_back(last);
  return acts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Variational autoencoder

class VaeModel {
 public:
  VaeModel(nn::Mlp encoder, nn::Mlp decoder, std::size_t latent_dim)
      : encoder_(std::move(encoder)), decoder_(std::move(decoder)), latent_dim_(latent_dim) {
    require(latent_dim_ > 0, Errc::invalid_model, "latent dimension must be positive");
    require(encoder_.output_dim() == 2 * latent_dim_, Errc::dimension_mismatch,
            "encoder must output mean and log-variance (2 x latent)");
    require(decoder_.input_dim() == latent_dim_, Errc::dimension_mismatch, "decoder input must equal latent dim");
    require(decoder_.output_dim() == encoder_.input_dim(), Errc::dimension_mismatch,
            "decoder output must equal input dim");
  }

  /// ELU hidden layers of the given widths; the decoder mirrors the encoder.
  static VaeModel create(std::size_t input_dim, std::span<const std::size_t> widths, std::size_t latent_dim,
                         std::mt19937_64& rng) {
    std::vector<std::size_t> enc_dims{input_dim};
    enc_dims.insert(enc_dims.end(), widths.begin(), widths.end());
    enc_dims.push_back(2 * latent_dim);
    std::vector<std::size_t> dec_dims{latent_dim};
    dec_dims.insert(dec_dims.end(), widths.rbegin(), widths.rend());
    dec_dims.push_back(input_dim);
    const auto acts = detail::hidden_then(widths.size(), nn::Activation::elu, nn::Activation::identity);
    auto enc = nn::Mlp::random(enc_dims, acts, true, rng);
    auto dec = nn::Mlp::random(dec_dims, acts, true, rng);
    return VaeModel(std::move(enc), std::move(dec), latent_dim);
  }

  const nn::Mlp& encoder() const noexcept { return encoder_; }
  const nn::Mlp& decoder() const noexcept { return decoder_; }
  nn::Mlp& mutable_encoder() noexcept { return encoder_; }
  nn::Mlp& mutable_decoder() noexcept { return decoder_; }
  std::size_t latent_dim() const noexcept { return latent_dim_; }
  std::size_t input_dim() const noexcept { return encoder_.input_dim(); }

 private:
  nn::Mlp encoder_;
  nn::Mlp decoder_;
  std::size_t latent_dim_;
};

struct VaeEncoding {
  nn::Vector mean;
  nn::Vector logvar;
};

struct VaeLoss {
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

inline VaeEncoding split_encoding(std::span<const double> enc_out, std::size_t d) {
  VaeEncoding e{nn::Vector(enc_out.begin(), enc_out.begin() + d), nn::Vector(enc_out.begin() + d, enc_out.end())};
  for (double lv : e.logvar) require(std::isfinite(lv), Errc::non_finite, "encoder log-variance");
  return e;
}

inline VaeEncoding vae_encode(const VaeModel& model, std::span<const double> z) {
  return split_encoding(nn::predict(model.encoder(), z), model.latent_dim());
}

/// KL(N(mean, exp(logvar)) || N(0, I)) in closed form.
inline double gaussian_kl(std::span<const double> mean, std::span<const double> logvar) {
  double kl = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j)
    kl += 0.5 * (mean[j] * mean[j] + std::exp(logvar[j]) - 1.0 - logvar[j]);
  return kl;
}

inline nn::Vector reparameterize(const VaeEncoding& enc, std::span<const double> noise) {
  require(noise.size() == enc.mean.size(), Errc::dimension_mismatch, "noise length must equal latent dim");
  nn::Vector x(enc.mean.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = enc.mean[j] + std::exp(0.5 * enc.logvar[j]) * noise[j];
  return x;
}

inline VaeLoss vae_loss(const VaeModel& model, std::span<const double> z, std::span<const double> noise) {
  const auto enc = vae_encode(model, z);
  const auto recon = nn::predict(model.decoder(), reparameterize(enc, noise));
  VaeLoss out;
  out.recon = squared_distance(z, recon);
  out.kl = gaussian_kl(enc.mean, enc.logvar);
  out.loss = out.recon + out.kl;
  return out;
}

/// Loss for one example with gradients accumulated (scaled by `weight`) into
/// the encoder/decoder accumulators.
inline VaeLoss vae_loss_accumulate(const VaeModel& model, std::span<const double> z, std::span<const double> noise,
                                   double weight, nn::Gradients& enc_grad, nn::Gradients& dec_grad) {
  const std::size_t d = model.latent_dim();
  auto enc_pass = nn::forward(model.encoder(), z);
  const auto enc = split_encoding(enc_pass.output, d);
  const auto x = reparameterize(enc, noise);
  auto dec_pass = nn::forward(model.decoder(), x);

  VaeLoss out;
  out.recon = squared_distance(z, dec_pass.output);
  out.kl = gaussian_kl(enc.mean, enc.logvar);
  out.loss = out.recon + out.kl;

  nn::Vector dy(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) dy[i] = weight * 2.0 * (dec_pass.output[i] - z[i]);
  const auto dx = nn::backward_into(model.decoder(), dec_pass.cache, dy, dec_grad);

  nn::Vector dh(2 * d);
  for (std::size_t j = 0; j < d; ++j) {
    const double sigma = std::exp(0.5 * enc.logvar[j]);
    dh[j] = dx[j] + weight * enc.mean[j];
    dh[d + j] = dx[j] * 0.5 * sigma * noise[j] + weight * 0.5 * (std::exp(enc.logvar[j]) - 1.0);
  }
  nn::backward_into(model.encoder(), enc_pass.cache, dh, enc_grad);
  return out;
}

struct VaeLossGrad {
  VaeLoss value;
  nn::Gradients encoder;
  nn::Gradients decoder;
};

inline VaeLossGrad vae_loss_and_grad(const VaeModel& model, std::span<const double> z,
                                     std::span<const double> noise) {
  VaeLossGrad g{{}, nn::Gradients::zeros_like(model.encoder()), nn::Gradients::zeros_like(model.decoder())};
  g.value = vae_loss_accumulate(model, z, noise, 1.0, g.encoder, g.decoder);
  return g;
}

inline Example vae_reconstruct(const VaeModel& model, std::span<const double> z, std::span<const double> noise) {
  return nn::predict(model.decoder(), reparameterize(vae_encode(model, z), noise));
}

/// decoder(mean): the noise-free reconstruction.
inline Example vae_mean_reconstruction(const VaeModel& model, std::span<const double> z) {
  return nn::predict(model.decoder(), vae_encode(model, z).mean);
}

/// N decoder outputs from independent posterior draws; deterministic in `seed`.
inline std::vector<Example> vae_sample_reconstructions(const VaeModel& model, std::span<const double> z,
                                                       std::size_t count, std::uint64_t seed) {
  require(count >= 1, Errc::invalid_argument, "need at least one reconstruction");
  const auto enc = vae_encode(model, z);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Example> out;
  out.reserve(count);
  nn::Vector noise(model.latent_dim());
  for (std::size_t k = 0; k < count; ++k) {
    for (double& e : noise) e = normal(rng);
    out.push_back(nn::predict(model.decoder(), reparameterize(enc, noise)));
  }
  return out;
}

struct VaeTrainResult {
  VaeModel model;
  std::vector<double> loss_curve;  // mean loss per epoch
};

inline VaeTrainResult train_vae(VaeModel model, std::span<const Example> data, const TrainConfig& cfg) {
  cfg.validate();
  require(!data.empty(), Errc::invalid_argument, "training set is empty");
  for (const auto& z : data)
    require(z.size() == model.input_dim(), Errc::dimension_mismatch, "training example dimension");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Adam enc_opt(model.encoder(), {.learning_rate = cfg.learning_rate});
  nn::Adam dec_opt(model.decoder(), {.learning_rate = cfg.learning_rate});
  std::vector<double> curve;
  nn::Vector noise(model.latent_dim());

  for (std::size_t epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    enc_opt.set_learning_rate(cfg.rate_for_epoch(epoch));
    dec_opt.set_learning_rate(cfg.rate_for_epoch(epoch));
    const auto order = detail::shuffled_indices(data.size(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(end - start);
      auto ge = nn::Gradients::zeros_like(model.encoder());
      auto gd = nn::Gradients::zeros_like(model.decoder());
      for (std::size_t i = start; i < end; ++i) {
        for (double& e : noise) e = normal(rng);
        total += vae_loss_accumulate(model, data[order[i]], noise, w, ge, gd).loss;
      }
      try {
        enc_opt.step(model.mutable_encoder(), ge);
        dec_opt.step(model.mutable_decoder(), gd);
      } catch (const Error& e) {
        throw Error(Errc::divergence, "VAE training diverged at epoch " + std::to_string(epoch + 1) + " (" +
                                          e.what() + ")");
      }
    }
    const double mean = total / static_cast<double>(data.size());
    require(std::isfinite(mean), Errc::divergence, "VAE loss is not finite at epoch " + std::to_string(epoch + 1));
    curve.push_back(mean);
  }
  return {std::move(model), std::move(curve)};
}

// ---------------------------------------------------------------------------
// One-class deep SVDD

class SvddModel {
 public:
  /// Rejects biased layers and bounded (sigmoid) activations.
  SvddModel(nn::Mlp mapper, double weight_decay, std::optional<nn::Vector> center = std::nullopt)
      : mapper_(std::move(mapper)), weight_decay_(weight_decay) {
    require(!mapper_.layers().empty(), Errc::invalid_model, "SVDD mapper has no layers");
    require(weight_decay_ >= 0.0, Errc::invalid_argument, "weight decay must be nonnegative");
    for (std::size_t i = 0; i < mapper_.layers().size(); ++i) {
      const auto& l = mapper_.layers()[i];
      require(!l.bias, Errc::invalid_model, "SVDD layer " + std::to_string(i) + " has a bias term");
      require(l.activation != nn::Activation::sigmoid, Errc::invalid_model,
              "SVDD layer " + std::to_string(i) + " uses a bounded activation");
    }
    if (center) set_center(std::move(*center));
  }

  /// Bias-free mapper: ELU on hidden layers, no activation on the output layer.
  static SvddModel create(std::size_t input_dim, std::span<const std::size_t> widths, std::size_t output_dim,
                          double weight_decay, std::mt19937_64& rng) {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), widths.begin(), widths.end());
    dims.push_back(output_dim);
    const auto acts = detail::hidden_then(widths.size(), nn::Activation::elu, nn::Activation::identity);
    return SvddModel(nn::Mlp::random(dims, acts, false, rng), weight_decay);
  }

  const nn::Mlp& mapper() const noexcept { return mapper_; }
  nn::Mlp& mutable_mapper() noexcept { return mapper_; }
  double weight_decay() const noexcept { return weight_decay_; }
  std::size_t input_dim() const noexcept { return mapper_.input_dim(); }

  bool has_center() const noexcept { return center_.has_value(); }
  const nn::Vector& center() const {
    require(center_.has_value(), Errc::uninitialized, "SVDD center has not been initialized");
    return *center_;
  }

  /// The center can be set once; afterwards it is frozen.
  void set_center(nn::Vector c) {
    require(!center_, Errc::invalid_argument, "SVDD center is frozen once set");
    require(c.size() == mapper_.output_dim(), Errc::dimension_mismatch, "center dimension");
    require_finite(c, "SVDD center");
    center_ = std::move(c);
  }

 private:
  nn::Mlp mapper_;
  double weight_decay_;
  std::optional<nn::Vector> center_;
};

/// Below this norm the mean representation is shifted to avoid the collapsed solution.
inline constexpr double kCenterDegeneracyNorm = 1e-6;
inline constexpr double kCenterOffset = 0.1;

/// Mean of the mapper's outputs over `data`, before the degeneracy guard.
inline nn::Vector mean_representation(const nn::Mlp& mapper, std::span<const Example> data) {
  require(!data.empty(), Errc::invalid_argument, "center initialization needs data");
  nn::Vector c(mapper.output_dim(), 0.0);
  for (const auto& z : data) {
    const auto y = nn::predict(mapper, z);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += y[j];
  }
  for (double& v : c) v /= static_cast<double>(data.size());
  return c;
}

inline nn::Vector svdd_init_center(SvddModel& model, std::span<const Example> data) {
  auto c = mean_representation(model.mapper(), data);
  double norm2 = 0.0;
  for (double v : c) norm2 += v * v;
  if (std::sqrt(norm2) < kCenterDegeneracyNorm) c[0] += kCenterOffset;
  model.set_center(c);
  return c;
}

inline double svdd_loss(const SvddModel& model, std::span<const Example> batch) {
  require(!batch.empty(), Errc::invalid_argument, "empty batch");
  const auto& c = model.center();
  double s = 0.0;
  for (const auto& z : batch) s += squared_distance(nn::predict(model.mapper(), z), c);
  return s / static_cast<double>(batch.size()) + 0.5 * model.weight_decay() * model.mapper().weight_squared_norm();
}

struct SvddLossGrad {
  double loss = 0.0;
  double mean_distance = 0.0;
  nn::Gradients grad;
};

/// Loss plus gradient w.r.t. the mapper weights; the center is a constant.
/// With `include_regularizer` false the weight-decay term is left out of the
/// gradient (the optimizer applies it as decoupled decay instead).
inline SvddLossGrad svdd_loss_and_grad(const SvddModel& model, std::span<const Example> batch,
                                       bool include_regularizer = true) {
  require(!batch.empty(), Errc::invalid_argument, "empty batch");
  const auto& c = model.center();
  const auto& net = model.mapper();
  SvddLossGrad out{0.0, 0.0, nn::Gradients::zeros_like(net)};
  const double w = 1.0 / static_cast<double>(batch.size());
  nn::Vector dy(c.size());
  for (const auto& z : batch) {
    auto pass = nn::forward(net, z);
    out.mean_distance += w * squared_distance(pass.output, c);
    for (std::size_t j = 0; j < c.size(); ++j) dy[j] = 2.0 * w * (pass.output[j] - c[j]);
    nn::backward_into(net, pass.cache, dy, out.grad);
  }
  const double lambda = model.weight_decay();
  out.loss = out.mean_distance + 0.5 * lambda * net.weight_squared_norm();
  if (include_regularizer && lambda > 0.0) {
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
      auto g = out.grad.weights[li].values();
      auto p = net.layers()[li].weights.values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += lambda * p[k];
    }
  }
  return out;
}

struct SvddTrainResult {
  SvddModel model;
  std::vector<double> loss_curve;      // mean objective per epoch
  std::vector<double> distance_curve;  // mean squared distance to center per epoch
};

inline SvddTrainResult train_svdd(SvddModel model, std::span<const Example> data, const TrainConfig& cfg) {
  cfg.validate();
  require(!data.empty(), Errc::invalid_argument, "training set is empty");
  require(model.has_center(), Errc::uninitialized, "SVDD center must be initialized before training");
  for (const auto& z : data)
    require(z.size() == model.input_dim(), Errc::dimension_mismatch, "training example dimension");

  std::mt19937_64 rng(cfg.seed);
  nn::Adam opt(model.mapper(), {.learning_rate = cfg.learning_rate, .weight_decay = model.weight_decay()});
  SvddTrainResult res{model, {}, {}};
  auto& m = res.model;
  Dataset batch;
  for (std::size_t epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    opt.set_learning_rate(cfg.rate_for_epoch(epoch));
    const auto order = detail::shuffled_indices(data.size(), rng);
    double dist = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      auto lg = svdd_loss_and_grad(m, batch, false);
      dist += lg.mean_distance * static_cast<double>(end - start);
      try {
        opt.step(m.mutable_mapper(), lg.grad);
      } catch (const Error& e) {
        throw Error(Errc::divergence, "SVDD training diverged at epoch " + std::to_string(epoch + 1) + " (" +
                                          e.what() + ")");
      }
    }
    dist /= static_cast<double>(data.size());
    const double loss = dist + 0.5 * m.weight_decay() * m.mapper().weight_squared_norm();
    require(std::isfinite(loss), Errc::divergence, "SVDD loss is not finite at epoch " + std::to_string(epoch + 1));
    res.distance_curve.push_back(dist);
    res.loss_curve.push_back(loss);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Autoencoder pretraining for the SVDD mapper

struct Autoencoder {
  nn::Mlp encoder;
  nn::Mlp decoder;
};

/// Encoder is a copy of the SVDD mapper; the decoder mirrors it (ELU hidden, linear output, with bias).
inline Autoencoder autoencoder_for(const SvddModel& svdd, std::mt19937_64& rng) {
  const auto& layers = svdd.mapper().layers();
  std::vector<std::size_t> dims{svdd.mapper().output_dim()};
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) dims.push_back(it->in_dim());
  const auto acts = detail::hidden_then(layers.size() - 1, nn::Activation::elu, nn::Activation::identity);
  return {svdd.mapper(), nn::Mlp::random(dims, acts, true, rng)};
}

struct AutoencoderTrainResult {
  Autoencoder model;
  std::vector<double> loss_curve;
};

inline AutoencoderTrainResult train_autoencoder(Autoencoder ae, std::span<const Example> data, const TrainConfig& cfg) {
  cfg.validate();
  require(!data.empty(), Errc::invalid_argument, "training set is empty");
  require(ae.encoder.output_dim() == ae.decoder.input_dim() && ae.decoder.output_dim() == ae.encoder.input_dim(),
          Errc::dimension_mismatch, "autoencoder encoder/decoder do not compose");
  std::mt19937_64 rng(cfg.seed);
  nn::Adam enc_opt(ae.encoder, {.learning_rate = cfg.learning_rate});
  nn::Adam dec_opt(ae.decoder, {.learning_rate = cfg.learning_rate});
  std::vector<double> curve;
  for (std::size_t epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    enc_opt.set_learning_rate(cfg.rate_for_epoch(epoch));
    dec_opt.set_learning_rate(cfg.rate_for_epoch(epoch));
    const auto order = detail::shuffled_indices(data.size(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(end - start);
      auto ge = nn::Gradients::zeros_like(ae.encoder);
      auto gd = nn::Gradients::zeros_like(ae.decoder);
      for (std::size_t i = start; i < end; ++i) {
        const auto& z = data[order[i]];
        auto enc_pass = nn::forward(ae.encoder, z);
        auto dec_pass = nn::forward(ae.decoder, enc_pass.output);
        total += squared_distance(z, dec_pass.output);
        nn::Vector dy(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) dy[k] = 2.0 * w * (dec_pass.output[k] - z[k]);
        const auto dh = nn::backward_into(ae.decoder, dec_pass.cache, dy, gd);
        nn::backward_into(ae.encoder, enc_pass.cache, dh, ge);
      }
      try {
        enc_opt.step(ae.encoder, ge);
        dec_opt.step(ae.decoder, gd);
      } catch (const Error& e) {
        throw Error(Errc::divergence, "autoencoder training diverged at epoch " + std::to_string(epoch + 1) +
                                          " (" + e.what() + ")");
      }
    }
    const double mean = total / static_cast<double>(data.size());
    require(std::isfinite(mean), Errc::divergence,
            "autoencoder loss is not finite at epoch " + std::to_string(epoch + 1));
    curve.push_back(mean);
  }
  return {std::move(ae), std::move(curve)};
}

/// Replaces the SVDD mapper weights with `encoder`'s; architectures must match exactly.
inline void copy_encoder_weights(SvddModel& svdd, const nn::Mlp& encoder) {
  const auto& dst = svdd.mapper().layers();
  const auto& src = encoder.layers();
  require(dst.size() == src.size(), Errc::dimension_mismatch, "encoder and SVDD mapper layer counts differ");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    require(dst[i].in_dim() == src[i].in_dim() && dst[i].out_dim() == src[i].out_dim(), Errc::dimension_mismatch,
            "layer " + std::to_string(i) + " shape differs between encoder and SVDD mapper");
    require(dst[i].activation == src[i].activation, Errc::invalid_model,
            "layer " + std::to_string(i) + " activation differs between encoder and SVDD mapper");
    require(!src[i].bias, Errc::invalid_model, "encoder layer " + std::to_string(i) + " has a bias term");
  }
  auto& layers = svdd.mutable_mapper().mutable_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].weights = src[i].weights;
}

struct PretrainResult {
  SvddModel model;
  std::vector<double> autoencoder_loss_curve;  // empty when pretraining is skipped
};

/// Optionally pretrains an autoencoder whose encoder mirrors the mapper, copies
/// its weights into the mapper, then fixes the center on `data`.
inline PretrainResult pretrain_autoencoder_then_copy(SvddModel svdd, std::span<const Example> data,
                                                     const TrainConfig& cfg, bool pretrain = true) {
  require(!svdd.has_center(), Errc::invalid_argument, "pretraining must run before the center is fixed");
  std::vector<double> curve;
  if (pretrain) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 0xae));
    auto trained = train_autoencoder(autoencoder_for(svdd, rng), data, cfg);
    copy_encoder_weights(svdd, trained.model.encoder);
    curve = std::move(trained.loss_curve);
  }
  svdd_init_center(svdd, data);
  return {std::move(svdd), std::move(curve)};
}

}  // namespace icad
