// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nlrom/problems.hpp"
#include "nlrom/rng.hpp"

using namespace nlrom;
using Catch::Approx;

namespace {

AdvDiffParams random_params(Rng &rng) {
  AdvDiffParams p;
  for (int i = 0; i < 4; ++i) p.mu[static_cast<std::size_t>(i)] = rng.uniform01();
  p.mu[4] = rng.uniform(0.0, 2.0 * M_PI);
  p.mu[5] = rng.uniform(0.1, 0.9);
  p.mu[6] = rng.uniform(0.1, 0.9);
  return p;
}

}  // namespace

TEST_CASE("conductivity field: baseline, disk increments, lower bound") {
  const Mesh mesh = build_unit_square_mesh(32);
  AdvDiffConfig cfg;
  cfg.nx = 32;

  AdvDiffParams zero;
  zero.mu = {0, 0, 0, 0, 0, 0.5, 0.5};
  const CoefficientField base = advdiff_conductivity(zero, cfg, mesh);
  CHECK(base.values.minCoeff() == 0.1);
  CHECK(base.values.maxCoeff() == 0.1);

  AdvDiffParams one;
  one.mu = {1, 0, 0, 0, 0, 0.5, 0.5};
  const CoefficientField field = advdiff_conductivity(one, cfg, mesh);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const bool inside = cfg.disks[0].contains(mesh.centroid(t));
    CHECK(field.values[t] == Approx(inside ? 1.1 : 0.1));
  }

  Rng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const CoefficientField f = advdiff_conductivity(random_params(rng), cfg, mesh);
    CHECK(f.values.minCoeff() >= 0.1);
  }
}

TEST_CASE("advdiff config invariants") {
  AdvDiffConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.disks[0].radius = 0.4;  // overlaps a neighbor
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = AdvDiffConfig{};
  cfg.disks[1].center = {0.99, 0.25};  // sticks out of the square
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  AdvDiffParams bad;
  bad.mu = {0.5, 0.5, 0.5, 0.5, 0.0, 0.05, 0.5};  // source outside [0.1, 0.9]
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("advdiff solve respects the maximum principle (mild advection)") {
  const Mesh mesh = build_unit_square_mesh(32);
  AdvDiffConfig cfg;
  cfg.nx = 32;
  cfg.transport_intensity = 0.5;
  AdvDiffParams p;
  p.mu = {0.3, 0.8, 0.1, 0.6, 1.2, 0.35, 0.7};
  const Eigen::VectorXd u = advdiff_solve(p, cfg, mesh);
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (mesh.boundary_mask[static_cast<std::size_t>(i)])
      CHECK(u[i] == 1.0);
    else
      CHECK(u[i] > 1.0 - 1e-10);
  }
}

TEST_CASE("advdiff solve is symmetric under x<->y swap for symmetric data") {
  const int nx = 24;
  const Mesh mesh = build_unit_square_mesh(nx);
  AdvDiffConfig cfg;
  cfg.nx = nx;
  cfg.transport_intensity = 0.0;
  AdvDiffParams p;
  p.mu = {0.4, 0.4, 0.4, 0.4, 0.0, 0.5, 0.5};
  const Eigen::VectorXd u = advdiff_solve(p, cfg, mesh);
  double max_asym = 0.0;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= nx; ++j)
      max_asym = std::max(max_asym,
                          std::abs(u[mesh.node_index(i, j)] - u[mesh.node_index(j, i)]));
  // The single-diagonal split is x<->y symmetric, so the swap is exact up to
  // solver tolerance.
  CHECK(max_asym <= 1e-8 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("strong transport pushes the plume downstream") {
  const Mesh mesh = build_unit_square_mesh(64);
  AdvDiffConfig cfg;
  cfg.nx = 64;
  AdvDiffParams p;
  p.mu = {0.2, 0.2, 0.2, 0.2, 0.0, 0.4, 0.5};  // mu5 = 0: transport along +x

  auto excess_centroid_x = [&](const Eigen::VectorXd &u) {
    double mass = 0.0, cx = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i) {
      const double w = u[i] - 1.0;  // excess over the boundary value
      mass += w;
      cx += w * mesh.nodes[static_cast<std::size_t>(i)].x();
    }
    return cx / mass;
  };

  cfg.transport_intensity = 0.0;
  const Eigen::VectorXd u0 = advdiff_solve(p, cfg, mesh);
  cfg.transport_intensity = 40.0;
  const Eigen::VectorXd u40 = advdiff_solve(p, cfg, mesh);

  int arg0 = 0, arg40 = 0;
  u0.maxCoeff(&arg0);
  u40.maxCoeff(&arg40);
  const double x0 = mesh.nodes[static_cast<std::size_t>(arg0)].x();
  const double x40 = mesh.nodes[static_cast<std::size_t>(arg40)].x();
  CHECK(std::abs(x0 - 0.4) <= 0.05);  // diffusive peak sits at the source
  CHECK(x40 > 0.4);                   // advected peak lies strictly right of the source
  // The singular peak stays pinned to the source cell even at C = 40 (the
  // maximum drops instead); the transported plume shows up as a strict
  // downstream shift of the excess-mass centroid.
  CHECK(x40 >= x0);
  CHECK(excess_centroid_x(u40) > excess_centroid_x(u0) + 0.1);
}

TEST_CASE("advdiff solution depends continuously on the parameters") {
  const Mesh mesh = build_unit_square_mesh(16);
  AdvDiffConfig cfg;
  cfg.nx = 16;
  AdvDiffParams p;
  p.mu = {0.5, 0.3, 0.7, 0.2, 0.9, 0.45, 0.55};
  const Eigen::VectorXd base = advdiff_solve(p, cfg, mesh);
  const double delta = 1e-6;
  for (std::size_t i = 0; i < 7; ++i) {
    AdvDiffParams q = p;
    q.mu[i] += delta;
    const Eigen::VectorXd pert = advdiff_solve(q, cfg, mesh);
    const double sensitivity = (pert - base).norm() / delta;
    // finite-difference sensitivity stays O(1) relative to the state scale
    CHECK(sensitivity <= 1e3 * base.norm());
  }
}

TEST_CASE("circle problem: boundary, periodicity, reflection") {
  const int nx = 32;
  const Mesh mesh = build_unit_square_mesh(nx);

  const Eigen::VectorXd u0 = circle_problem_solve({0.0}, mesh);
  for (int i = 0; i < mesh.node_count(); ++i)
    if (mesh.boundary_mask[static_cast<std::size_t>(i)]) CHECK(u0[i] == 0.0);
  CHECK(u0.maxCoeff() > 0.0);

  const Eigen::VectorXd u2pi = circle_problem_solve({2.0 * M_PI}, mesh);
  CHECK((u0 - u2pi).norm() <= 1e-9 * u0.norm());

  // mu = pi flips the transport direction; the solution is the x-reflection
  // up to the discretization asymmetry of the diagonal split.
  const Eigen::VectorXd upi = circle_problem_solve({M_PI}, mesh);
  Eigen::VectorXd reflected(mesh.node_count());
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= nx; ++j)
      reflected[mesh.node_index(i, j)] = u0[mesh.node_index(i, nx - j)];
  CHECK((upi - reflected).norm() <= 0.02 * u0.norm());

  CHECK_THROWS_AS(circle_problem_solve({-0.5}, mesh), ConfigError);
}

TEST_CASE("hat snapshots: degenerate width, norms, orthogonality") {
  const Grid1D grid = build_interval_mesh(-2.0, 2.0, 512);

  CHECK(hat_snapshot(0.3, 0.0, grid).norm() == 0.0);
  CHECK_THROWS_AS(hat_snapshot(0.9, 0.5, grid), ConfigError);
  CHECK_THROWS_AS(hat_snapshot(0.0, 1.5, grid), ConfigError);

  const Eigen::VectorXd v = hat_snapshot(-0.25, 0.6, grid);
  CHECK(l2_norm(grid, v) == Approx(std::sqrt(2.0 / 3.0 * std::pow(0.6, 3))).margin(1e-3));

  // the 2n hats with disjoint supports are mutually L2-orthogonal
  const int n = 4;
  std::vector<Eigen::VectorXd> hats;
  for (int i = 1; i <= 2 * n; ++i)
    hats.push_back(hat_snapshot(-1.0 + static_cast<double>(i) / n - 0.5 / n, 0.5 / n, grid));
  for (std::size_t a = 0; a < hats.size(); ++a)
    for (std::size_t b = 0; b < hats.size(); ++b) {
      const double ip = l2_inner(grid, hats[a], hats[b]);
      if (a == b)
        CHECK(ip > 0.0);
      else
        CHECK(std::abs(ip) <= 1e-6);
    }
}

TEST_CASE("curve snapshots match the closed-form coefficients") {
  const Grid1D grid = build_interval_mesh(0.0, M_PI, 256);
  Eigen::VectorXd sin_vec(grid.node_count()), cos_vec(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    sin_vec[i] = std::sin(grid.nodes[static_cast<std::size_t>(i)]);
    cos_vec[i] = std::cos(grid.nodes[static_cast<std::size_t>(i)]);
  }

  // mu = 0: cubic coefficient 0, |1 - 0| term gives +sin x
  CHECK((curve_snapshot(0.0, grid) - sin_vec).cwiseAbs().maxCoeff() <= 1e-14);
  // mu = 1/2: cubic 10(1/4 - 3/4 + 1/2) = 0, abs term -1 gives -sin x
  CHECK((curve_snapshot(0.5, grid) + sin_vec).cwiseAbs().maxCoeff() <= 1e-14);
  // mu = 1: cubic 10(2 - 3 + 1) = 0, abs term +1 gives +sin x
  CHECK((curve_snapshot(1.0, grid) - sin_vec).cwiseAbs().maxCoeff() <= 1e-14);

  // the manifold self-intersects exactly at the endpoint pair {0, 1}
  CHECK(curve_snapshot(0.0, grid) == curve_snapshot(1.0, grid));

  // mu = 1/8: a = 10 (2/512 - 3/64 + 1/8) = 0.8203125, b = 2 |3/4| - 1 = 1/2
  const Eigen::VectorXd eighth = curve_snapshot(0.125, grid);
  CHECK((eighth - (0.8203125 * cos_vec + 0.5 * sin_vec)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(curve_snapshot(-0.1, grid), ConfigError);
  CHECK_THROWS_AS(curve_snapshot(1.1, grid), ConfigError);
}

TEST_CASE("curve manifold is injective away from the endpoint pair") {
  const Grid1D grid = build_interval_mesh(0.0, M_PI, 64);
  std::vector<Eigen::VectorXd> snaps;
  for (int i = 0; i <= 100; ++i) snaps.push_back(curve_snapshot(i / 100.0, grid));
  for (std::size_t a = 0; a < snaps.size(); ++a)
    for (std::size_t b = a + 1; b < snaps.size(); ++b) {
      const double dist = (snaps[a] - snaps[b]).norm();
      if (a == 0 && b == 100)
        CHECK(dist == 0.0);
      else
        CHECK(dist > 1e-8);
    }
}

TEST_CASE("unit circle points") {
  CHECK((unit_circle_point(0.0) - Eigen::Vector2d(1.0, 0.0)).norm() == 0.0);
  CHECK((unit_circle_point(M_PI / 2) - Eigen::Vector2d(0.0, 1.0)).norm() <= 1e-15);
  Rng rng(3, 0);
  for (int i = 0; i < 50; ++i)
    CHECK(unit_circle_point(rng.uniform(0.0, 2 * M_PI)).norm() == Approx(1.0).epsilon(1e-14));
}
