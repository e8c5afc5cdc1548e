// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_MESH_HPP
#define NLROM_MESH_HPP

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nlrom/errors.hpp"

namespace nlrom {

// Structured triangulation of an axis-aligned rectangle. Nodes are ordered
// row-major: node(i, j) = (x0 + j*hx, y0 + i*hy), index i*(nx+1)+j. Every cell
// is split along the same lower-left to upper-right diagonal so snapshot
// generation is bit-reproducible.
struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<bool> boundary_mask;
  int nx = 0;
  int ny = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  int node_index(int i, int j) const { return i * (nx + 1) + j; }

  double triangle_area(int t) const {
    const auto &tri = triangles[static_cast<std::size_t>(t)];
    const Eigen::Vector2d e1 = nodes[tri[1]] - nodes[tri[0]];
    const Eigen::Vector2d e2 = nodes[tri[2]] - nodes[tri[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }

  Eigen::Vector2d centroid(int t) const {
    const auto &tri = triangles[static_cast<std::size_t>(t)];
    return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
  }
};

inline Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("mesh: subdivision counts must be >= 1");
  if (!(x0 < x1) || !(y0 < y1)) throw ConfigError("mesh: empty rectangle");
  Mesh m;
  m.nx = nx;
  m.ny = ny;
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;
  m.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int i = 0; i <= ny; ++i)
    for (int j = 0; j <= nx; ++j) m.nodes.emplace_back(x0 + j * hx, y0 + i * hy);
  m.boundary_mask.assign(m.nodes.size(), false);
  for (int i = 0; i <= ny; ++i)
    for (int j = 0; j <= nx; ++j)
      m.boundary_mask[static_cast<std::size_t>(m.node_index(i, j))] =
          (i == 0 || j == 0 || i == ny || j == nx);
  m.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int ll = m.node_index(i, j);
      const int lr = m.node_index(i, j + 1);
      const int ul = m.node_index(i + 1, j);
      const int ur = m.node_index(i + 1, j + 1);
      m.triangles.push_back({ll, lr, ur});
      m.triangles.push_back({ll, ur, ul});
    }
  }
  return m;
}

inline Mesh build_unit_square_mesh(int nx) {
  if (nx < 1) throw ConfigError("build_unit_square_mesh: nx must be >= 1");
  return build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, nx, nx);
}

// Equispaced 1D grid; carries trapezoidal quadrature weights for L2 norms of
// nodal functions.
struct Grid1D {
  std::vector<double> nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }
  double spacing() const { return nodes[1] - nodes[0]; }

  double quad_weight(int i) const {
    const double h = spacing();
    return (i == 0 || i + 1 == node_count()) ? 0.5 * h : h;
  }
};

inline Grid1D build_interval_mesh(double a, double b, int n) {
  if (a >= b) throw ConfigError("build_interval_mesh: need a < b");
  if (n < 1) throw ConfigError("build_interval_mesh: n must be >= 1");
  Grid1D g;
  g.nodes.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) g.nodes[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return g;
}

inline double l2_norm(const Grid1D &grid, const Eigen::VectorXd &v) {
  if (v.size() != grid.node_count()) throw ConfigError("l2_norm: length mismatch with grid");
  double acc = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) acc += grid.quad_weight(i) * v[i] * v[i];
  return std::sqrt(acc);
}

inline double l2_inner(const Grid1D &grid, const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  if (a.size() != grid.node_count() || b.size() != grid.node_count())
    throw ConfigError("l2_inner: length mismatch with grid");
  double acc = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) acc += grid.quad_weight(i) * a[i] * b[i];
  return acc;
}

inline double l2_error(const Grid1D &grid, const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return l2_norm(grid, a - b);
}

}  // namespace nlrom

#endif  // NLROM_MESH_HPP
