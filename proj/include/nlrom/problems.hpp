// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_PROBLEMS_HPP
#define NLROM_PROBLEMS_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/fem.hpp"
#include "nlrom/mesh.hpp"

namespace nlrom {

// Parameters of the advection-diffusion problem:
// conductivity increments mu1..mu4 in [0,1], transport angle mu5 in [0,2pi],
// source location (mu6, mu7) in [0.1, 0.9]^2.
struct AdvDiffParams {
  std::array<double, 7> mu{};

  static AdvDiffParams from_vector(const Eigen::VectorXd &v) {
    if (v.size() != 7) throw ConfigError("AdvDiffParams: expected 7 components");
    AdvDiffParams p;
    for (int i = 0; i < 7; ++i) p.mu[static_cast<std::size_t>(i)] = v[i];
    p.validate();
    return p;
  }

  void validate() const {
    for (int i = 0; i < 4; ++i)
      if (mu[static_cast<std::size_t>(i)] < 0.0 || mu[static_cast<std::size_t>(i)] > 1.0)
        throw ConfigError("AdvDiffParams: mu1..mu4 must lie in [0,1]");
    if (mu[4] < 0.0 || mu[4] > 2.0 * M_PI)
      throw ConfigError("AdvDiffParams: mu5 must lie in [0, 2pi]");
    for (int i = 5; i < 7; ++i)
      if (mu[static_cast<std::size_t>(i)] < 0.1 || mu[static_cast<std::size_t>(i)] > 0.9)
        throw ConfigError("AdvDiffParams: source coordinates must lie in [0.1, 0.9]");
  }

  static std::vector<std::pair<double, double>> bounds() {
    return {{0.0, 1.0},      {0.0, 1.0},      {0.0, 1.0}, {0.0, 1.0},
            {0.0, 2.0 * M_PI}, {0.1, 0.9},    {0.1, 0.9}};
  }
};

struct Disk {
  Eigen::Vector2d center;
  double radius;

  bool contains(const Eigen::Vector2d &p) const {
    return (p - center).squaredNorm() <= radius * radius;
  }
};

// Problem geometry and fixed data. The four disks are the parametrized
// conductivity subdomains; they must be pairwise disjoint and strictly
// inside the unit square.
struct AdvDiffConfig {
  double transport_intensity = 0.5;  // C
  double source_width = 0.0;         // eps; 0 means the default eps = 1/(2 nx)
  int nx = 64;
  std::vector<Disk> disks = default_disks();

  static std::vector<Disk> default_disks() {
    return {{{0.25, 0.25}, 0.15},
            {{0.75, 0.25}, 0.15},
            {{0.25, 0.75}, 0.15},
            {{0.75, 0.75}, 0.15}};
  }

  double effective_eps() const { return source_width > 0.0 ? source_width : 0.5 / nx; }

  void validate() const {
    if (nx < 1) throw ConfigError("AdvDiffConfig: nx must be >= 1");
    if (source_width < 0.0) throw ConfigError("AdvDiffConfig: eps must be positive");
    if (disks.size() != 4) throw ConfigError("AdvDiffConfig: expected four subdomains");
    for (std::size_t i = 0; i < disks.size(); ++i) {
      const auto &d = disks[i];
      if (!(d.radius > 0.0)) throw ConfigError("AdvDiffConfig: disk radius must be positive");
      if (d.center.x() - d.radius <= 0.0 || d.center.x() + d.radius >= 1.0 ||
          d.center.y() - d.radius <= 0.0 || d.center.y() + d.radius >= 1.0)
        throw ConfigError("AdvDiffConfig: disk must lie strictly inside the unit square");
      for (std::size_t j = i + 1; j < disks.size(); ++j) {
        const double dist = (d.center - disks[j].center).norm();
        if (dist <= d.radius + disks[j].radius)
          throw ConfigError("AdvDiffConfig: disks must be pairwise disjoint");
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["transport_intensity"] = transport_intensity;
    j["source_width"] = source_width;
    j["nx"] = nx;
    auto &jd = j["disks"] = nlohmann::json::array();
    for (const auto &d : disks)
      jd.push_back({{"center", {d.center.x(), d.center.y()}}, {"radius", d.radius}});
    return j;
  }

  static AdvDiffConfig from_json(const nlohmann::json &j) {
    AdvDiffConfig c;
    c.transport_intensity = j.at("transport_intensity").get<double>();
    c.source_width = j.value("source_width", 0.0);
    c.nx = j.at("nx").get<int>();
    if (j.contains("disks")) {
      c.disks.clear();
      for (const auto &jd : j.at("disks")) {
        Disk d;
        d.center = {jd.at("center")[0].get<double>(), jd.at("center")[1].get<double>()};
        d.radius = jd.at("radius").get<double>();
        c.disks.push_back(d);
      }
    }
    c.validate();
    return c;
  }
};

/// Cellwise conductivity 0.1 + sum_i mu_i 1{centroid in disk_i}.
inline CoefficientField advdiff_conductivity(const AdvDiffParams &params,
                                             const AdvDiffConfig &config, const Mesh &mesh) {
  params.validate();
  config.validate();
  Eigen::VectorXd values(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector2d c = mesh.centroid(t);
    double v = 0.1;
    for (std::size_t i = 0; i < 4; ++i)
      if (config.disks[i].contains(c)) v += params.mu[i];
    values[t] = v;
  }
  return CoefficientField::cellwise(std::move(values));
}

/// Full-order solve of the advection-diffusion problem with Dirichlet data
/// u = 1 on the boundary.
inline Eigen::VectorXd advdiff_solve(const AdvDiffParams &params, const AdvDiffConfig &config,
                                     const Mesh &mesh) {
  const CoefficientField sigma = advdiff_conductivity(params, config, mesh);
  const double c = config.transport_intensity;
  const Eigen::Vector2d b(c * std::cos(params.mu[4]), c * std::sin(params.mu[4]));
  const Eigen::Vector2d center(params.mu[5], params.mu[6]);
  const Eigen::VectorXd f = gaussian_source(mesh, center, config.effective_eps());
  LinearSystem sys = assemble_advdiff(mesh, sigma, b, f);
  apply_dirichlet(sys, mesh, 1.0);
  return solve(sys);
}

struct CircleProblemParams {
  double mu = 0.0;  // angle in [0, 2pi]

  void validate() const {
    if (mu < 0.0 || mu > 2.0 * M_PI)
      throw ConfigError("CircleProblemParams: mu must lie in [0, 2pi]");
  }
};

/// Solves -Lap(u) + 10 (cos mu, sin mu).grad(u) = 10 exp(-100 |x - x0|),
/// u = 0 on the boundary, x0 = (0.5, 0.5).
inline Eigen::VectorXd circle_problem_solve(const CircleProblemParams &params, const Mesh &mesh) {
  params.validate();
  const Eigen::Vector2d x0(0.5, 0.5);
  const Eigen::Vector2d b(10.0 * std::cos(params.mu), 10.0 * std::sin(params.mu));
  const SourceFn f = [x0](const Eigen::Vector2d &x) {
    return 10.0 * std::exp(-100.0 * (x - x0).norm());
  };
  LinearSystem sys = assemble_advdiff(mesh, CoefficientField::constant(mesh, 1.0), b, f);
  apply_dirichlet(sys, mesh, 0.0);
  return solve(sys);
}

/// Hat function with support [mu1 - mu2, mu1 + mu2] and peak mu2 at x = mu1,
/// evaluated at the grid nodes.
inline Eigen::VectorXd hat_snapshot(double mu1, double mu2, const Grid1D &grid) {
  if (mu2 < 0.0 || mu2 > 1.0) throw ConfigError("hat_snapshot: mu2 must lie in [0,1]");
  if (mu1 - mu2 < -1.0 || mu1 + mu2 > 1.0)
    throw ConfigError("hat_snapshot: support must lie inside [-1,1]");
  Eigen::VectorXd v(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i)
    v[i] = std::max(0.0, mu2 - std::abs(grid.nodes[static_cast<std::size_t>(i)] - mu1));
  return v;
}

/// Analytic curve-manifold snapshot
/// u(x) = 10 (2 mu^3 - 3 mu^2 + mu) cos x + (2 |1 - 2 mu| - 1) sin x.
inline Eigen::VectorXd curve_snapshot(double mu, const Grid1D &grid) {
  if (mu < 0.0 || mu > 1.0) throw ConfigError("curve_snapshot: mu must lie in [0,1]");
  const double a = 10.0 * (2.0 * mu * mu * mu - 3.0 * mu * mu + mu);
  const double b = 2.0 * std::abs(1.0 - 2.0 * mu) - 1.0;
  Eigen::VectorXd v(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    const double x = grid.nodes[static_cast<std::size_t>(i)];
    v[i] = a * std::cos(x) + b * std::sin(x);
  }
  return v;
}

inline Eigen::Vector2d unit_circle_point(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

}  // namespace nlrom

#endif  // NLROM_PROBLEMS_HPP
