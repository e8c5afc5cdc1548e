// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nlrom/snapshots.hpp"
#include "nlrom/train.hpp"

using namespace nlrom;
using Catch::Approx;

namespace {

// y = A x + b with fixed A, b: exactly realizable by a single dense layer.
void linear_dataset(Eigen::MatrixXd &inputs, Eigen::MatrixXd &targets, int count,
                    std::uint64_t seed) {
  Eigen::MatrixXd a(3, 4);
  a << 1.0, -0.5, 0.25, 2.0, 0.0, 1.5, -1.0, 0.5, 0.75, 0.0, 1.0, -0.25;
  const Eigen::Vector3d b(0.1, -0.2, 0.3);
  inputs = sample_gaussian(4, count, seed);
  targets.resize(3, count);
  for (int j = 0; j < count; ++j) targets.col(j) = a * inputs.col(j) + b;
}

}  // namespace

TEST_CASE("training fits an exactly realizable linear problem") {
  Eigen::MatrixXd inputs, targets;
  linear_dataset(inputs, targets, 128, 17);

  Network net;
  net.emplace<Dense>(4, 3);
  he_init(net, 18);

  TrainConfig cfg;
  cfg.loss = LossKind::Squared;
  cfg.optimizer = OptimizerConfig::adamw(1e-2, 0.0);
  cfg.epochs = 500;
  cfg.batch_size = 32;
  cfg.seed = 19;
  const auto history = train(net, inputs, targets, cfg);
  REQUIRE(history.size() == 500);
  CHECK(history.back() < 1e-6);
}

TEST_CASE("zero epochs leave the network untouched") {
  Network net;
  net.emplace<Dense>(4, 3);
  he_init(net, 20);
  const std::string digest = net.weights_digest();

  Eigen::MatrixXd inputs, targets;
  linear_dataset(inputs, targets, 16, 21);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto history = train(net, inputs, targets, cfg);
  CHECK(history.empty());
  CHECK(net.weights_digest() == digest);
}

TEST_CASE("same seed gives an identical loss history and final weights") {
  Eigen::MatrixXd inputs, targets;
  linear_dataset(inputs, targets, 64, 22);

  TrainConfig cfg;
  cfg.optimizer = OptimizerConfig::adamw(1e-3, 1e-2);
  cfg.epochs = 40;
  cfg.batch_size = 10;
  cfg.seed = 23;

  Network net1;
  net1.emplace<Dense>(4, 3);
  he_init(net1, 24);
  Network net2 = net1;
  const auto h1 = train(net1, inputs, targets, cfg);
  const auto h2 = train(net2, inputs, targets, cfg);
  CHECK(h1 == h2);
  CHECK(net1.weights_digest() == net2.weights_digest());

  Network net3;
  net3.emplace<Dense>(4, 3);
  he_init(net3, 24);
  cfg.seed = 99;
  const auto h3 = train(net3, inputs, targets, cfg);
  CHECK(h1 != h3);
}

TEST_CASE("diverging training aborts with the failing epoch and batch") {
  Eigen::MatrixXd inputs, targets;
  linear_dataset(inputs, targets, 32, 25);
  targets *= 1e200;  // overflow squared errors into inf

  Network net;
  net.emplace<Dense>(4, 3);
  he_init(net, 26);
  TrainConfig cfg;
  cfg.epochs = 3;
  try {
    train(net, inputs, targets, cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch") != std::string::npos);
    CHECK(msg.find("batch") != std::string::npos);
  }
}

TEST_CASE("partial final batches are included in the pass") {
  const auto batches = detail::epoch_batches(23, 10, 1, 0);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 10);
  CHECK(batches[1].size() == 10);
  CHECK(batches[2].size() == 3);
  std::vector<int> seen;
  for (const auto &b : batches) seen.insert(seen.end(), b.begin(), b.end());
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 23; ++i) CHECK(seen[static_cast<std::size_t>(i)] == i);
}
