// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_DLROM_HPP
#define NLROM_DLROM_HPP

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/loss.hpp"
#include "nlrom/network.hpp"
#include "nlrom/optim.hpp"
#include "nlrom/pod.hpp"
#include "nlrom/snapshots.hpp"
#include "nlrom/train.hpp"

namespace nlrom {

enum class ReductionMode { Autoencoder, TranscoderDecoder };

inline ReductionMode reduction_mode_from_string(const std::string &s) {
  if (s == "autoencoder") return ReductionMode::Autoencoder;
  if (s == "transcoder") return ReductionMode::TranscoderDecoder;
  throw ConfigError("unknown reduction mode: " + s);
}

inline std::string to_string(ReductionMode m) {
  return m == ReductionMode::Autoencoder ? "autoencoder" : "transcoder";
}

// Stage-1 configuration. The transcoder-decoder pins the latent dimension to
// the parameter count; the autoencoder takes it from the caller. The decoder
// is convolutional when the state lives on a square nodal grid
// (grid_side > 0), a plain MLP otherwise.
struct ReductionConfig {
  ReductionMode mode = ReductionMode::TranscoderDecoder;
  int latent_dim = 0;
  int channel_multiplier = 4;
  int grid_side = 0;
  std::vector<int> encoder_hidden{};  // single dense layer when empty
  std::vector<int> decoder_hidden{};  // MLP decoder only
  double leaky_alpha = 0.01;
  LossKind loss = LossKind::Squared;
  OptimizerConfig optimizer = OptimizerConfig::adamw();
  int epochs = 300;
  int batch_size = 50;
  std::uint64_t seed = 0;

  void validate(int param_dim) const {
    if (latent_dim < 1) throw ConfigError("ReductionConfig: latent dimension must be >= 1");
    if (mode == ReductionMode::TranscoderDecoder && latent_dim != param_dim)
      throw ConfigError("ReductionConfig: transcoder-decoder requires latent_dim == param count");
    if (channel_multiplier < 1) throw ConfigError("ReductionConfig: channel multiplier >= 1");
  }

  nlohmann::json to_json() const {
    return {{"mode", nlrom::to_string(mode)},
            {"latent_dim", latent_dim},
            {"channel_multiplier", channel_multiplier},
            {"grid_side", grid_side},
            {"encoder_hidden", encoder_hidden},
            {"decoder_hidden", decoder_hidden},
            {"leaky_alpha", leaky_alpha},
            {"loss", nlrom::to_string(loss)},
            {"optimizer", optimizer.to_json()},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed}};
  }

  static ReductionConfig from_json(const nlohmann::json &j) {
    ReductionConfig c;
    c.mode = reduction_mode_from_string(j.value("mode", "transcoder"));
    c.latent_dim = j.at("latent_dim").get<int>();
    c.channel_multiplier = j.value("channel_multiplier", 4);
    c.grid_side = j.value("grid_side", 0);
    c.encoder_hidden = j.value("encoder_hidden", std::vector<int>{});
    c.decoder_hidden = j.value("decoder_hidden", std::vector<int>{});
    c.leaky_alpha = j.value("leaky_alpha", 0.01);
    c.loss = loss_from_string(j.value("loss", "squared"));
    if (j.contains("optimizer")) c.optimizer = OptimizerConfig::from_json(j.at("optimizer"));
    c.epochs = j.value("epochs", 300);
    c.batch_size = j.value("batch_size", 50);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
  }
};

/// Fully connected net with leaky-ReLU hidden activations and a bare output
/// layer.
inline Network build_mlp(int in, const std::vector<int> &hidden, int out, double alpha = 0.01) {
  Network net;
  int prev = in;
  for (int h : hidden) {
    net.emplace<Dense>(prev, h);
    net.emplace<Activation>(Activation::Kind::LeakyReLU, alpha);
    prev = h;
  }
  net.emplace<Dense>(prev, out);
  return net;
}

/// Encoder (state -> latent) or transcoder ((params, state) -> latent); a
/// single dense layer unless hidden widths are requested.
inline Network build_encoder(const ReductionConfig &cfg, int param_dim, int state_dim) {
  const int in =
      cfg.mode == ReductionMode::TranscoderDecoder ? param_dim + state_dim : state_dim;
  return build_mlp(in, cfg.encoder_hidden, cfg.latent_dim, cfg.leaky_alpha);
}

/// Convolutional decoder for an s x s nodal grid: dense seed into an
/// (m, 8, 8) map, transposed convolutions (kernel 4, stride 2, padding 1)
/// doubling the spatial size and halving the channel count, then an edge
/// crop/pad onto the grid.
inline Network build_conv_decoder(int latent_dim, int multiplier, int side, double alpha = 0.01) {
  if (side < 10) throw ConfigError("build_conv_decoder: grid side too small");
  int stages = 0;
  int spatial = 8;
  while (2 * spatial <= side) {
    spatial *= 2;
    ++stages;
  }
  if (stages < 1) throw ConfigError("build_conv_decoder: grid side too small");
  Network net;
  net.emplace<Dense>(latent_dim, multiplier * 64);
  net.emplace<Activation>(Activation::Kind::LeakyReLU, alpha);
  net.emplace<Reshape>(std::vector<int>{multiplier, 8, 8});
  int channels = multiplier;
  for (int s = 0; s < stages; ++s) {
    const int next = s + 1 == stages ? 1 : std::max(channels / 2, 1);
    net.emplace<TransposedConv2d>(channels, next, 4, 2, 1);
    if (s + 1 != stages) net.emplace<Activation>(Activation::Kind::LeakyReLU, alpha);
    channels = next;
  }
  net.emplace<CropPad2d>(side, side);
  net.emplace<Reshape>(std::vector<int>{side * side});
  return net;
}

inline Network build_decoder(const ReductionConfig &cfg, int state_dim) {
  if (cfg.grid_side > 0) {
    if (cfg.grid_side * cfg.grid_side != state_dim)
      throw ConfigError("build_decoder: grid_side^2 must equal the state dimension");
    return build_conv_decoder(cfg.latent_dim, cfg.channel_multiplier, cfg.grid_side,
                              cfg.leaky_alpha);
  }
  return build_mlp(cfg.latent_dim, cfg.decoder_hidden, state_dim, cfg.leaky_alpha);
}

/// Forces E(mu, u) = mu on a freshly built single-layer transcoder: the
/// parameter block of the weight matrix is the identity, everything else zero.
inline void init_transcoder_identity(Network &transcoder, int param_dim) {
  if (transcoder.layer_count() != 1)
    throw ConfigError("init_transcoder_identity: expected a single dense layer");
  auto *dense = dynamic_cast<Dense *>(&transcoder.layer(0));
  if (dense == nullptr || dense->fan_out() != param_dim)
    throw ConfigError("init_transcoder_identity: latent dimension must equal param count");
  dense->weights().setZero();
  dense->bias().setZero();
  for (int i = 0; i < param_dim; ++i) dense->weights()(i, i) = 1.0;
}

// Trained stage-1 artifacts: the encoding network (encoder or transcoder),
// the decoder, and the training history.
struct Reduction {
  ReductionMode mode = ReductionMode::TranscoderDecoder;
  int latent_dim = 0;
  int param_dim = 0;
  int state_dim = 0;
  Network encoder;
  Network decoder;
  std::vector<double> history;

  Tensor encoder_input(const Eigen::MatrixXd &params, const Eigen::MatrixXd &states,
                       const std::vector<int> &batch) const {
    if (mode == ReductionMode::Autoencoder) return Tensor::from_columns(states, batch);
    Tensor t({static_cast<int>(batch.size()), param_dim + state_dim});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (int i = 0; i < param_dim; ++i) t.at2(static_cast<int>(b), i) = params(i, batch[b]);
      for (int i = 0; i < state_dim; ++i)
        t.at2(static_cast<int>(b), param_dim + i) = states(i, batch[b]);
    }
    return t;
  }
};

/// Stage 1 of the pipeline: fits the reconstruction u ~ decoder(encode(.))
/// over the training snapshots with a joint optimizer over both networks.
inline Reduction train_reduction(const ReductionConfig &cfg, const SnapshotSet &train_set) {
  train_set.validate();
  cfg.validate(train_set.param_dim());

  Reduction red;
  red.mode = cfg.mode;
  red.latent_dim = cfg.latent_dim;
  red.param_dim = train_set.param_dim();
  red.state_dim = train_set.state_dim();
  red.encoder = build_encoder(cfg, red.param_dim, red.state_dim);
  red.decoder = build_decoder(cfg, red.state_dim);

  he_init(red.decoder, cfg.seed, 0);
  if (cfg.mode == ReductionMode::TranscoderDecoder && cfg.encoder_hidden.empty()) {
    init_transcoder_identity(red.encoder, red.param_dim);
  } else {
    he_init(red.encoder, cfg.seed, 1000);
  }

  Optimizer opt(cfg.optimizer);
  const int count = train_set.count();
  red.history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (const auto &batch :
         detail::epoch_batches(count, cfg.batch_size, cfg.seed, epoch)) {
      const Tensor x = red.encoder_input(train_set.params, train_set.states, batch);
      const Tensor y = Tensor::from_columns(train_set.states, batch);
      const auto enc_acts = red.encoder.forward_cached(x);
      const auto dec_acts = red.decoder.forward_cached(enc_acts.back());
      const LossValue loss = compute_loss(cfg.loss, y, dec_acts.back());
      if (!std::isfinite(loss.value))
        throw NumericalError("train_reduction: non-finite loss at epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      red.encoder.zero_grad();
      red.decoder.zero_grad();
      const Tensor dz = red.decoder.backward(dec_acts, loss.grad);
      red.encoder.backward(enc_acts, dz);
      opt.step({&red.encoder, &red.decoder});
      epoch_loss += loss.value * static_cast<double>(batch.size());
      ++batch_index;
    }
    red.history.push_back(epoch_loss / count);
  }
  return red;
}

/// Latent codes of every snapshot, one column per sample.
inline Eigen::MatrixXd encode_dataset(const Reduction &red, const SnapshotSet &set) {
  if (set.param_dim() != red.param_dim || set.state_dim() != red.state_dim)
    throw ConfigError("encode_dataset: snapshot set does not match the reduction");
  std::vector<int> all(static_cast<std::size_t>(set.count()));
  std::iota(all.begin(), all.end(), 0);
  const Tensor z = red.encoder.forward(red.encoder_input(set.params, set.states, all));
  Eigen::MatrixXd latents(red.latent_dim, set.count());
  for (int j = 0; j < set.count(); ++j)
    for (int i = 0; i < red.latent_dim; ++i) latents(i, j) = z.at2(j, i);
  return latents;
}

struct MapConfig {
  std::vector<int> hidden{64, 64};
  double leaky_alpha = 0.01;
  TrainConfig train;

  nlohmann::json to_json() const {
    return {{"hidden", hidden},
            {"leaky_alpha", leaky_alpha},
            {"loss", nlrom::to_string(train.loss)},
            {"optimizer", train.optimizer.to_json()},
            {"epochs", train.epochs},
            {"batch_size", train.batch_size},
            {"seed", train.seed}};
  }

  static MapConfig from_json(const nlohmann::json &j) {
    MapConfig c;
    c.hidden = j.value("hidden", std::vector<int>{64, 64});
    c.leaky_alpha = j.value("leaky_alpha", 0.01);
    c.train.loss = loss_from_string(j.value("loss", "squared"));
    if (j.contains("optimizer")) c.train.optimizer = OptimizerConfig::from_json(j.at("optimizer"));
    c.train.epochs = j.value("epochs", 300);
    c.train.batch_size = j.value("batch_size", 50);
    c.train.seed = j.value("seed", std::uint64_t{0});
    return c;
  }
};

/// Stage 2: fits the reduced map phi : params -> latent codes. Takes the
/// frozen latent matrix produced by encode_dataset, so no gradient can reach
/// the reduction networks.
inline Network train_reduced_map(const Eigen::MatrixXd &latents, const Eigen::MatrixXd &params,
                                 const MapConfig &cfg, std::vector<double> *history = nullptr) {
  if (latents.cols() != params.cols())
    throw ConfigError("train_reduced_map: latent/param column mismatch");
  Network phi = build_mlp(static_cast<int>(params.rows()), cfg.hidden,
                          static_cast<int>(latents.rows()), cfg.leaky_alpha);
  he_init(phi, cfg.train.seed, 0);
  auto h = train(phi, params, latents, cfg.train);
  if (history != nullptr) *history = std::move(h);
  return phi;
}

// The composed surrogate Phi = decoder o phi, plus the frozen encoder for
// diagnostics.
struct DlRom {
  Network decoder;
  Network reduced_map;
  ReductionMode mode = ReductionMode::TranscoderDecoder;
  int latent_dim = 0;
  int param_dim = 0;
  int state_dim = 0;
};

inline DlRom compose(const Reduction &red, const Network &phi) {
  DlRom rom;
  rom.decoder = red.decoder;
  rom.reduced_map = phi;
  rom.mode = red.mode;
  rom.latent_dim = red.latent_dim;
  rom.param_dim = red.param_dim;
  rom.state_dim = red.state_dim;
  return rom;
}

/// Batched surrogate evaluation: column j of the result is
/// decoder(phi(params.col(j))). No full-order solves anywhere on this path.
inline Eigen::MatrixXd predict(const DlRom &rom, const Eigen::MatrixXd &params) {
  if (params.rows() != rom.param_dim) throw ConfigError("predict: wrong parameter dimension");
  std::vector<int> all(static_cast<std::size_t>(params.cols()));
  std::iota(all.begin(), all.end(), 0);
  const Tensor z = rom.reduced_map.forward(Tensor::from_columns(params, all));
  const Tensor u = rom.decoder.forward(z);
  Eigen::MatrixXd out(rom.state_dim, params.cols());
  for (int j = 0; j < params.cols(); ++j)
    for (int i = 0; i < rom.state_dim; ++i) out(i, j) = u.at2(j, i);
  return out;
}

// Per-sample error decomposition. All state-space distances are measured in
// the requested norm; the latent distance is Euclidean.
struct SampleError {
  double state_norm = 0.0;      // |u|
  double total = 0.0;           // |u - decoder(phi(mu))|
  double relative = 0.0;        // total / |u|
  double recon = 0.0;           // |u - decoder(enc(u))|
  double recon_relative = 0.0;  // recon / |u|
  double decoder_diff = 0.0;    // |decoder(enc(u)) - decoder(phi(mu))|
  double latent_dist = 0.0;     // |enc(u) - phi(mu)|_2
  double slack = 0.0;           // recon + decoder_diff - total
};

struct ErrorReport {
  std::vector<SampleError> samples;
  double mre = 0.0;
  double recon_mre = 0.0;
  double mean_latent_dist = 0.0;
  double max_latent_dist = 0.0;
  double min_slack = 0.0;
  std::string norm_name = "euclidean";
};

/// Evaluates the composed model and the reduction on a snapshot set,
/// reporting the mean relative error and the per-sample triangle
/// decomposition total <= recon + decoder_diff.
inline ErrorReport evaluate(const DlRom &rom, const Reduction &red, const SnapshotSet &set,
                            const VectorNorm &norm = euclidean_norm(),
                            const std::string &norm_name = "euclidean") {
  if (set.param_dim() != rom.param_dim || set.state_dim() != rom.state_dim)
    throw ConfigError("evaluate: snapshot set does not match the model");
  const Eigen::MatrixXd predictions = predict(rom, set.params);
  const Eigen::MatrixXd latents_enc = encode_dataset(red, set);

  std::vector<int> all(static_cast<std::size_t>(set.count()));
  std::iota(all.begin(), all.end(), 0);
  const Tensor z_phi = rom.reduced_map.forward(Tensor::from_columns(set.params, all));
  Eigen::MatrixXd latents_phi(rom.latent_dim, set.count());
  for (int j = 0; j < set.count(); ++j)
    for (int i = 0; i < rom.latent_dim; ++i) latents_phi(i, j) = z_phi.at2(j, i);

  const Tensor recon_t = rom.decoder.forward(Tensor::from_columns(latents_enc, all));

  ErrorReport report;
  report.norm_name = norm_name;
  report.samples.resize(static_cast<std::size_t>(set.count()));
  double min_slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j < set.count(); ++j) {
    SampleError &s = report.samples[static_cast<std::size_t>(j)];
    const Eigen::VectorXd u = set.states.col(j);
    Eigen::VectorXd recon(rom.state_dim);
    for (int i = 0; i < rom.state_dim; ++i) recon[i] = recon_t.at2(j, i);
    const Eigen::VectorXd pred = predictions.col(j);
    s.state_norm = norm(u);
    if (!(s.state_norm > 0.0)) throw ConfigError("evaluate: zero-norm snapshot");
    s.total = norm(u - pred);
    s.relative = s.total / s.state_norm;
    s.recon = norm(u - recon);
    s.recon_relative = s.recon / s.state_norm;
    s.decoder_diff = norm(recon - pred);
    s.latent_dist = (latents_enc.col(j) - latents_phi.col(j)).norm();
    s.slack = s.recon + s.decoder_diff - s.total;
    min_slack = std::min(min_slack, s.slack);
    report.mre += s.relative;
    report.recon_mre += s.recon_relative;
    report.mean_latent_dist += s.latent_dist;
    report.max_latent_dist = std::max(report.max_latent_dist, s.latent_dist);
  }
  report.mre /= set.count();
  report.recon_mre /= set.count();
  report.mean_latent_dist /= set.count();
  report.min_slack = min_slack;
  return report;
}

/// Reconstruction-only relative errors (stage-1 quality).
inline std::vector<double> reconstruction_errors(const Reduction &red, const SnapshotSet &set,
                                                 const VectorNorm &norm = euclidean_norm()) {
  const Eigen::MatrixXd latents = encode_dataset(red, set);
  std::vector<int> all(static_cast<std::size_t>(set.count()));
  std::iota(all.begin(), all.end(), 0);
  const Tensor recon = red.decoder.forward(Tensor::from_columns(latents, all));
  std::vector<double> errors(static_cast<std::size_t>(set.count()));
  for (int j = 0; j < set.count(); ++j) {
    const Eigen::VectorXd u = set.states.col(j);
    Eigen::VectorXd r(red.state_dim);
    for (int i = 0; i < red.state_dim; ++i) r[i] = recon.at2(j, i);
    const double denom = norm(u);
    if (!(denom > 0.0)) throw ConfigError("reconstruction_errors: zero-norm snapshot");
    errors[static_cast<std::size_t>(j)] = norm(u - r) / denom;
  }
  return errors;
}

inline double mean_of(const std::vector<double> &v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Table of latent coordinates over a parameter grid: row j is
/// (params.col(j), phi(params.col(j))).
inline Eigen::MatrixXd export_latents(const Network &phi, const Eigen::MatrixXd &params) {
  std::vector<int> all(static_cast<std::size_t>(params.cols()));
  std::iota(all.begin(), all.end(), 0);
  const Tensor z = phi.forward(Tensor::from_columns(params, all));
  Eigen::MatrixXd table(params.cols(), params.rows() + z.features());
  for (int j = 0; j < params.cols(); ++j) {
    for (int i = 0; i < params.rows(); ++i) table(j, i) = params(i, j);
    for (long long i = 0; i < z.features(); ++i)
      table(j, params.rows() + i) = z.at2(j, i);
  }
  return table;
}

}  // namespace nlrom

#endif  // NLROM_DLROM_HPP
