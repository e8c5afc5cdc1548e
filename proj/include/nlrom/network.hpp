// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_NETWORK_HPP
#define NLROM_NETWORK_HPP

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/hash.hpp"
#include "nlrom/layers.hpp"
#include "nlrom/rng.hpp"
#include "nlrom/tensor.hpp"

namespace nlrom {

class Network {
 public:
  Network() = default;
  Network(Network &&) = default;
  Network &operator=(Network &&) = default;

  Network(const Network &other) { *this = other; }
  Network &operator=(const Network &other) {
    if (this != &other) {
      layers_.clear();
      layers_.reserve(other.layers_.size());
      for (const auto &l : other.layers_) layers_.push_back(l->clone());
    }
    return *this;
  }

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  template <typename L, typename... Args>
  L &emplace(Args &&...args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L &ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  std::size_t layer_count() const { return layers_.size(); }
  Layer &layer(std::size_t i) { return *layers_[i]; }
  const Layer &layer(std::size_t i) const { return *layers_[i]; }

  Tensor forward(const Tensor &x) const {
    Tensor cur = x;
    for (const auto &l : layers_) cur = l->forward(cur);
    return cur;
  }

  /// Forward pass keeping every intermediate activation; acts[i] is the input
  /// of layer i, acts[layer_count()] the output.
  std::vector<Tensor> forward_cached(const Tensor &x) const {
    std::vector<Tensor> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(x);
    for (const auto &l : layers_) acts.push_back(l->forward(acts.back()));
    return acts;
  }

  /// Reverse pass over cached activations; accumulates parameter gradients and
  /// returns the gradient w.r.t. the network input.
  Tensor backward(const std::vector<Tensor> &acts, const Tensor &upstream) {
    if (acts.size() != layers_.size() + 1)
      throw ConfigError("Network::backward called without a matching forward cache");
    Tensor grad = upstream;
    for (std::size_t i = layers_.size(); i-- > 0;) grad = layers_[i]->backward(acts[i], grad);
    return grad;
  }

  long long param_count() const {
    long long n = 0;
    for (const auto &l : layers_) n += l->param_count();
    return n;
  }

  void zero_grad() {
    for (auto &l : layers_) l->zero_grad();
  }

  void visit_params(const ParamVisitor &fn) {
    for (auto &l : layers_) l->visit_params(fn);
  }

  /// SHA-256 over the raw weight bytes, in layer order. Used to assert that a
  /// training stage left a network untouched.
  std::string weights_digest() const {
    std::string bytes;
    for (const auto &l : layers_) {
      std::ostringstream os(std::ios::binary);
      l->write_weights(os);
      bytes += os.str();
    }
    return hex(sha256(bytes));
  }

  void save(const std::string &path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("Network::save: cannot open " + path);
    os.write("NNW1", 4);
    const std::uint32_t version = 1;
    os.write(reinterpret_cast<const char *>(&version), 4);
    const std::uint32_t count = static_cast<std::uint32_t>(layers_.size());
    os.write(reinterpret_cast<const char *>(&count), 4);
    for (const auto &l : layers_) {
      const std::string desc = l->descriptor().dump();
      const std::uint32_t len = static_cast<std::uint32_t>(desc.size());
      os.write(reinterpret_cast<const char *>(&len), 4);
      os.write(desc.data(), len);
      l->write_weights(os);
    }
    if (!os) throw IoError("Network::save: write failed");
  }

  static Network load(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("Network::load: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NNW1", 4) != 0) throw IoError("Network::load: bad magic");
    std::uint32_t version = 0, count = 0;
    is.read(reinterpret_cast<char *>(&version), 4);
    is.read(reinterpret_cast<char *>(&count), 4);
    if (!is || version != 1) throw IoError("Network::load: unsupported version");
    Network net;
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t len = 0;
      is.read(reinterpret_cast<char *>(&len), 4);
      if (!is) throw IoError("model file truncated");
      std::string desc(len, '\0');
      is.read(desc.data(), len);
      if (!is) throw IoError("model file truncated");
      auto layer = layer_from_descriptor(nlohmann::json::parse(desc));
      layer->read_weights(is);
      net.add(std::move(layer));
    }
    return net;
  }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Gaussian He initialization: weights ~ N(0, 2 / fan_in), biases zero.
/// Deterministic in (seed, stream_base); layer i draws from stream
/// stream_base + i with per-weight counters.
inline void he_init(Network &net, std::uint64_t seed, std::uint64_t stream_base = 0) {
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    Layer &l = net.layer(i);
    double std_dev = 0.0;
    if (auto *dense = dynamic_cast<Dense *>(&l)) {
      std_dev = std::sqrt(2.0 / dense->fan_in());
    } else if (auto *conv = dynamic_cast<TransposedConv2d *>(&l)) {
      std_dev = std::sqrt(2.0 / conv->fan_in());
    } else {
      continue;
    }
    const std::uint64_t stream = stream_base + i;
    std::uint64_t index = 0;
    bool first_span = true;  // weights come first, biases second
    l.visit_params([&](double *p, double *, std::size_t n) {
      if (first_span) {
        for (std::size_t w = 0; w < n; ++w) p[w] = std_dev * normal_at(seed, stream, index++);
        first_span = false;
      } else {
        for (std::size_t w = 0; w < n; ++w) p[w] = 0.0;
      }
    });
  }
}

}  // namespace nlrom

#endif  // NLROM_NETWORK_HPP
