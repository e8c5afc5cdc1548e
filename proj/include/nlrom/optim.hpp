// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_OPTIM_HPP
#define NLROM_OPTIM_HPP

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/network.hpp"

namespace nlrom {

struct OptimizerConfig {
  enum class Kind { AdamW, Adamax };
  Kind kind = Kind::AdamW;
  double lr = 1e-4;
  double weight_decay = 1e-2;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig adamw(double lr = 1e-4, double weight_decay = 1e-2, double beta1 = 0.99,
                               double beta2 = 0.999, double eps = 1e-8) {
    return {Kind::AdamW, lr, weight_decay, beta1, beta2, eps};
  }

  // Adamax defaults per Kingma & Ba; decay is off unless requested.
  static OptimizerConfig adamax(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                                double eps = 1e-8) {
    return {Kind::Adamax, lr, 0.0, beta1, beta2, eps};
  }

  nlohmann::json to_json() const {
    return {{"kind", kind == Kind::AdamW ? "adamw" : "adamax"},
            {"lr", lr},
            {"weight_decay", weight_decay},
            {"beta1", beta1},
            {"beta2", beta2},
            {"eps", eps}};
  }

  static OptimizerConfig from_json(const nlohmann::json &j) {
    const std::string kind = j.value("kind", "adamw");
    OptimizerConfig cfg = kind == "adamax" ? adamax() : adamw();
    if (kind != "adamw" && kind != "adamax") throw ConfigError("unknown optimizer: " + kind);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.eps = j.value("eps", cfg.eps);
    return cfg;
  }
};

// First/second moment state over the concatenated parameters of one or more
// networks (visited in a fixed order). AdamW applies decoupled weight decay
// to the parameters before the moment update; Adamax tracks the
// infinity-norm second moment.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : cfg_(config) {}

  const OptimizerConfig &config() const { return cfg_; }
  long long step_count() const { return t_; }

  void step(std::vector<Network *> nets) {
    std::size_t total = 0;
    for (auto *net : nets)
      net->visit_params([&](double *, double *, std::size_t n) { total += n; });
    if (m_.empty()) {
      m_.assign(total, 0.0);
      v_.assign(total, 0.0);
    } else if (m_.size() != total) {
      throw ConfigError("Optimizer: parameter count changed between steps");
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::size_t off = 0;
    for (auto *net : nets) {
      net->visit_params([&](double *p, double *g, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
          double &m = m_[off + i];
          double &v = v_[off + i];
          const double grad = g[i];
          if (cfg_.kind == OptimizerConfig::Kind::AdamW) {
            p[i] -= cfg_.lr * cfg_.weight_decay * p[i];
            m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
            v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad * grad;
            p[i] -= cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
          } else {
            if (cfg_.weight_decay > 0.0) p[i] -= cfg_.lr * cfg_.weight_decay * p[i];
            m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
            v = std::max(cfg_.beta2 * v, std::abs(grad));
            p[i] -= (cfg_.lr / bc1) * m / (v + cfg_.eps);
          }
        }
        off += n;
      });
    }
  }

  void step(Network &net) { step(std::vector<Network *>{&net}); }

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

}  // namespace nlrom

#endif  // NLROM_OPTIM_HPP
