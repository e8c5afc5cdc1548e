// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_FEM_HPP
#define NLROM_FEM_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "nlrom/errors.hpp"
#include "nlrom/mesh.hpp"

namespace nlrom {

// Compressed sparse row storage; outerIndexPtr/innerIndexPtr/valuePtr expose
// row offsets, column indices and values.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Scalar coefficient given either per triangle (piecewise constant) or per
// node (P1 function).
struct CoefficientField {
  enum class Kind { Cellwise, Nodal };
  Kind kind = Kind::Cellwise;
  Eigen::VectorXd values;

  static CoefficientField cellwise(Eigen::VectorXd v) {
    return {Kind::Cellwise, std::move(v)};
  }
  static CoefficientField nodal(Eigen::VectorXd v) { return {Kind::Nodal, std::move(v)}; }

  static CoefficientField constant(const Mesh &mesh, double value) {
    return cellwise(Eigen::VectorXd::Constant(mesh.triangle_count(), value));
  }

  void check(const Mesh &mesh) const {
    const int expected = kind == Kind::Cellwise ? mesh.triangle_count() : mesh.node_count();
    if (values.size() != expected) throw ConfigError("CoefficientField: length mismatch");
  }

  // Effective cell value: nodal fields are averaged over the triangle's vertices.
  double on_triangle(const Mesh &mesh, int t) const {
    if (kind == Kind::Cellwise) return values[t];
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    return (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3.0;
  }
};

using SourceFn = std::function<double(const Eigen::Vector2d &)>;
using SourceTerm = std::variant<Eigen::VectorXd, SourceFn>;

struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  bool dirichlet_applied = false;
  // Dirichlet nodes with their prescribed values; enforced exactly after the
  // linear solve so boundary entries carry no round-off.
  std::vector<std::pair<int, double>> pinned;
};

namespace detail {

struct P1Element {
  double area;
  // Basis gradient components: grad(phi_i) = (bx[i], by[i]).
  std::array<double, 3> bx;
  std::array<double, 3> by;
};

inline P1Element p1_element(const Mesh &mesh, int t) {
  const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Eigen::Vector2d &p0 = mesh.nodes[tri[0]];
  const Eigen::Vector2d &p1 = mesh.nodes[tri[1]];
  const Eigen::Vector2d &p2 = mesh.nodes[tri[2]];
  const double two_a = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
  P1Element e;
  e.area = 0.5 * two_a;
  e.bx = {(p1.y() - p2.y()) / two_a, (p2.y() - p0.y()) / two_a, (p0.y() - p1.y()) / two_a};
  e.by = {(p2.x() - p1.x()) / two_a, (p0.x() - p2.x()) / two_a, (p1.x() - p0.x()) / two_a};
  return e;
}

}  // namespace detail

/// Nodal values of the Gaussian delta approximation
/// f(x) = (2 pi eps^2)^-1 exp(-|x - center|^2 / (2 eps^2)).
inline Eigen::VectorXd gaussian_source(const Mesh &mesh, const Eigen::Vector2d &center,
                                       double eps) {
  if (!(eps > 0.0)) throw ConfigError("gaussian_source: eps must be positive");
  const double inv2e2 = 1.0 / (2.0 * eps * eps);
  const double scale = inv2e2 / M_PI;
  Eigen::VectorXd f(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double r2 = (mesh.nodes[static_cast<std::size_t>(i)] - center).squaredNorm();
    f[i] = scale * std::exp(-r2 * inv2e2);
  }
  return f;
}

/// Assembles stiffness + advection + load for
///   int sigma grad(u).grad(w) + int (b.grad u) w = int f w
/// with one-point quadrature for the cellwise conductivity and vertex
/// (lumped) quadrature for the source. No boundary conditions applied.
inline LinearSystem assemble_advdiff(const Mesh &mesh, const CoefficientField &sigma,
                                     const Eigen::Vector2d &b, const SourceTerm &source) {
  sigma.check(mesh);
  if (!b.allFinite()) throw ConfigError("assemble_advdiff: transport field must be finite");
  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (!(sigma.on_triangle(mesh, t) > 0.0))
      throw ConfigError("assemble_advdiff: sigma must be strictly positive");

  Eigen::VectorXd f_nodal;
  if (std::holds_alternative<Eigen::VectorXd>(source)) {
    f_nodal = std::get<Eigen::VectorXd>(source);
    if (f_nodal.size() != mesh.node_count())
      throw ConfigError("assemble_advdiff: source length mismatch");
  } else {
    const auto &fn = std::get<SourceFn>(source);
    f_nodal.resize(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i)
      f_nodal[i] = fn(mesh.nodes[static_cast<std::size_t>(i)]);
  }

  const int n = mesh.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    const auto e = detail::p1_element(mesh, t);
    const double sig = sigma.on_triangle(mesh, t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double stiff = sig * e.area * (e.bx[i] * e.bx[j] + e.by[i] * e.by[j]);
        const double adv = (e.area / 3.0) * (b.x() * e.bx[j] + b.y() * e.by[j]);
        triplets.emplace_back(tri[i], tri[j], stiff + adv);
      }
      rhs[tri[i]] += f_nodal[tri[i]] * e.area / 3.0;
    }
  }

  LinearSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

/// Exact P1 mass matrix.
inline SparseMatrix mass_matrix(const Mesh &mesh) {
  const int n = mesh.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double a12 = mesh.triangle_area(t) / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) triplets.emplace_back(tri[i], tri[j], (i == j ? 2.0 : 1.0) * a12);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

/// Diagonal (lumped) mass weights: w_i = sum_j M_ij.
inline Eigen::VectorXd lumped_mass(const Mesh &mesh) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double a3 = mesh.triangle_area(t) / 3.0;
    for (int i = 0; i < 3; ++i) w[tri[i]] += a3;
  }
  return w;
}

inline double l2_norm(const Mesh &mesh, const SparseMatrix &mass, const Eigen::VectorXd &v) {
  if (v.size() != mesh.node_count()) throw ConfigError("l2_norm: length mismatch with mesh");
  return std::sqrt(std::max(0.0, v.dot(mass * v)));
}

inline double l2_norm(const Mesh &mesh, const Eigen::VectorXd &v) {
  return l2_norm(mesh, mass_matrix(mesh), v);
}

inline double l2_error(const Mesh &mesh, const SparseMatrix &mass, const Eigen::VectorXd &a,
                       const Eigen::VectorXd &b) {
  return l2_norm(mesh, mass, a - b);
}

inline double l2_error(const Mesh &mesh, const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return l2_norm(mesh, a - b);
}

/// Imposes u = g on boundary nodes by row replacement (identity row, rhs = g).
/// With symmetric_correction the boundary columns are eliminated into the rhs
/// as well, which keeps a symmetric operator symmetric.
inline void apply_dirichlet(LinearSystem &sys, const Mesh &mesh, double g,
                            bool symmetric_correction = false) {
  const int n = mesh.node_count();
  if (sys.matrix.rows() != n) throw ConfigError("apply_dirichlet: system/mesh mismatch");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(sys.matrix.nonZeros()));
  for (int r = 0; r < n; ++r) {
    const bool row_bdry = mesh.boundary_mask[static_cast<std::size_t>(r)];
    if (row_bdry) {
      triplets.emplace_back(r, r, 1.0);
      sys.rhs[r] = g;
      sys.pinned.emplace_back(r, g);
      continue;
    }
    for (SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (symmetric_correction && mesh.boundary_mask[static_cast<std::size_t>(c)]) {
        sys.rhs[r] -= it.value() * g;
      } else {
        triplets.emplace_back(r, c, it.value());
      }
    }
  }
  sys.matrix.setZero();
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  sys.dirichlet_applied = true;
}

/// Sparse direct solve with a fixed residual contract:
/// |A x - b| <= 1e-10 |b| or a NumericalError is thrown.
inline Eigen::VectorXd solve(const LinearSystem &sys) {
  if (sys.matrix.rows() != sys.matrix.cols()) throw ConfigError("solve: matrix must be square");
  Eigen::SparseMatrix<double> a_col(sys.matrix);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a_col);
  if (lu.info() != Eigen::Success) throw NumericalError("solve: factorization failed");
  Eigen::VectorXd x = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("solve: back substitution failed");
  for (const auto &[node, value] : sys.pinned) x[node] = value;
  const double rhs_norm = sys.rhs.norm();
  const double residual = (sys.matrix * x - sys.rhs).norm();
  if (residual > 1e-10 * std::max(rhs_norm, 1e-300))
    throw NumericalError("solve: residual contract violated");
  return x;
}

}  // namespace nlrom

#endif  // NLROM_FEM_HPP
