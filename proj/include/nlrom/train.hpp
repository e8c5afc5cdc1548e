// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_TRAIN_HPP
#define NLROM_TRAIN_HPP

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlrom/errors.hpp"
#include "nlrom/loss.hpp"
#include "nlrom/network.hpp"
#include "nlrom/optim.hpp"
#include "nlrom/rng.hpp"
#include "nlrom/tensor.hpp"

namespace nlrom {

struct TrainConfig {
  LossKind loss = LossKind::Squared;
  OptimizerConfig optimizer = OptimizerConfig::adamw();
  int epochs = 100;
  int batch_size = 50;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<int>> epoch_batches(int count, int batch_size, std::uint64_t seed,
                                                   int epoch) {
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, static_cast<std::uint64_t>(epoch));
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < count; start += batch_size) {
    const int end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace detail

/// Minibatch gradient descent on (input column -> target column) pairs with a
/// seeded shuffle per epoch. Returns the per-epoch mean training loss.
/// Aborts with the epoch/batch index if the loss turns non-finite.
inline std::vector<double> train(Network &net, const Eigen::MatrixXd &inputs,
                                 const Eigen::MatrixXd &targets, const TrainConfig &cfg) {
  if (inputs.cols() != targets.cols() || inputs.cols() < 1)
    throw ConfigError("train: dataset shape mismatch or empty dataset");
  if (cfg.batch_size < 1 || cfg.epochs < 0) throw ConfigError("train: bad schedule");
  const int count = static_cast<int>(inputs.cols());
  Optimizer opt(cfg.optimizer);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (const auto &batch : detail::epoch_batches(count, cfg.batch_size, cfg.seed, epoch)) {
      const Tensor x = Tensor::from_columns(inputs, batch);
      const Tensor y = Tensor::from_columns(targets, batch);
      const auto acts = net.forward_cached(x);
      const LossValue loss = compute_loss(cfg.loss, y, acts.back());
      if (!std::isfinite(loss.value))
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
      net.zero_grad();
      net.backward(acts, loss.grad);
      opt.step(net);
      epoch_loss += loss.value * static_cast<double>(batch.size());
      ++batch_index;
    }
    history.push_back(epoch_loss / count);
  }
  return history;
}

}  // namespace nlrom

#endif  // NLROM_TRAIN_HPP
