// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nlrom/mesh.hpp"
#include "nlrom/pod.hpp"
#include "nlrom/problems.hpp"
#include "nlrom/snapshots.hpp"

using namespace nlrom;
using Catch::Approx;

TEST_CASE("pod basis is orthonormal with nonincreasing spectrum") {
  const Eigen::MatrixXd u = sample_gaussian(40, 25, 1);
  const PodBasis basis = pod_fit(u, 10);
  const Eigen::MatrixXd gram = basis.modes.transpose() * basis.modes;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int i = 1; i < basis.singular_values.size(); ++i) {
    CHECK(basis.singular_values[i] >= 0.0);
    CHECK(basis.singular_values[i] <= basis.singular_values[i - 1]);
  }
  CHECK_THROWS_AS(pod_fit(u, 0), ConfigError);
  CHECK_THROWS_AS(pod_fit(u, 26), ConfigError);
}

TEST_CASE("full basis of orthogonal columns reproduces the training set") {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(12, 4);
  u(0, 0) = 2.0;
  u(3, 1) = -1.5;
  u(7, 2) = 0.5;
  u(11, 3) = 3.0;
  const PodBasis basis = pod_fit(u, 4);
  const auto errs = projection_errors(basis, u);
  CHECK(errs.sup <= 1e-12);
}

TEST_CASE("rank-1 snapshots are captured by a single mode") {
  const Eigen::VectorXd dir = sample_gaussian(30, 1, 4).col(0);
  Eigen::MatrixXd u(30, 8);
  for (int j = 0; j < 8; ++j) u.col(j) = (j + 1.0) * dir;
  const PodBasis basis = pod_fit(u, 1);
  CHECK(projection_errors(basis, u).sup <= 1e-12);
}

TEST_CASE("frobenius projection error matches the tail of the spectrum") {
  const Eigen::MatrixXd u = sample_gaussian(50, 20, 9);
  for (int n : {1, 5, 12}) {
    const PodBasis basis = pod_fit(u, n);
    const Eigen::MatrixXd residual = u - basis.modes * (basis.modes.transpose() * u);
    double tail = 0.0;
    for (int i = n; i < basis.singular_values.size(); ++i)
      tail += basis.singular_values[i] * basis.singular_values[i];
    CHECK(residual.squaredNorm() == Approx(tail).epsilon(1e-8));
  }
}

TEST_CASE("residuals are orthogonal to the retained modes") {
  const Eigen::MatrixXd u = sample_gaussian(35, 15, 6);
  const PodBasis basis = pod_fit(u, 7);
  const Eigen::MatrixXd residual = u - basis.modes * (basis.modes.transpose() * u);
  CHECK((basis.modes.transpose() * residual).cwiseAbs().maxCoeff() <=
        1e-10 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("projection errors: scale invariance, monotonicity, zero column") {
  const Eigen::MatrixXd train = sample_gaussian(40, 24, 2);
  Eigen::MatrixXd eval = sample_gaussian(40, 6, 3);

  const PodBasis basis = pod_fit(train, 5);
  const auto e1 = projection_errors(basis, eval);
  const auto e2 = projection_errors(basis, Eigen::MatrixXd(2.5 * eval));
  CHECK((e1.per_column - e2.per_column).cwiseAbs().maxCoeff() <= 1e-12);

  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 3, 5, 8, 12}) {
    const double mean = projection_errors(pod_fit(train, n), eval).mean;
    CHECK(mean <= prev + 1e-12);
    prev = mean;
  }

  eval.col(0).setZero();
  CHECK_THROWS_AS(projection_errors(basis, eval), ConfigError);
}

TEST_CASE("error-dof curve: exact dof column, monotone train error") {
  const Eigen::MatrixXd train = sample_gaussian(64, 30, 5);
  const Eigen::MatrixXd test = sample_gaussian(64, 10, 8);
  const std::vector<int> n_list{1, 2, 4, 8};
  const auto rows = error_dof_curve(train, test, n_list);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n == n_list[i]);
    CHECK(rows[i].dof == static_cast<long long>(n_list[i]) * 64);
    CHECK(rows[i].test_mre >= 0.0);
    if (i > 0) CHECK(rows[i].train_mre <= rows[i - 1].train_mre + 1e-12);
  }
  CHECK_THROWS_AS(error_dof_curve(train, test, {4, 2}), ConfigError);
}

TEST_CASE("hat width lower bound values") {
  CHECK(hat_width_lower_bound(1) == Approx(1.0 / (2.0 * std::sqrt(6.0))).epsilon(1e-15));
  CHECK(hat_width_lower_bound(1) == Approx(0.2041).margin(2e-4));
  CHECK(hat_width_lower_bound(4) == Approx(hat_width_lower_bound(1) / 8.0).epsilon(1e-14));
  CHECK_THROWS_AS(hat_width_lower_bound(0), ConfigError);
}

TEST_CASE("pod on the hat manifold respects the analytic width bound") {
  const Grid1D grid = build_interval_mesh(-2.0, 2.0, 512);
  const double h = grid.spacing();
  // On a uniform grid the hats vanish at the interval ends, so the
  // (trapezoidal) L2 norm is sqrt(h) times the Euclidean one; POD in
  // Euclidean coordinates is then L2-optimal as well.
  for (int n : {2, 4, 8}) {
    std::vector<Eigen::VectorXd> columns;
    for (int i = 1; i <= 2 * n; ++i)
      columns.push_back(
          hat_snapshot(-1.0 + static_cast<double>(i) / n - 0.5 / n, 0.5 / n, grid));
    // a few extra generic hats keep the sample from being artificially tiny
    Rng rng(100 + static_cast<std::uint64_t>(n), 0);
    for (int extra = 0; extra < 8; ++extra) {
      const double mu2 = rng.uniform(0.05, 0.9);
      const double mu1 = rng.uniform(-(1.0 - mu2), 1.0 - mu2);
      columns.push_back(hat_snapshot(mu1, mu2, grid));
    }
    Eigen::MatrixXd sample(grid.node_count(), static_cast<int>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
      sample.col(static_cast<int>(j)) = columns[j];

    const PodBasis basis = pod_fit(sample, n);
    double sup = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      const Eigen::VectorXd residual =
          sample.col(i) - basis.modes * (basis.modes.transpose() * sample.col(i));
      sup = std::max(sup, std::sqrt(h) * residual.norm());
    }
    CHECK(sup >= 0.9 * hat_width_lower_bound(n));
  }
}
