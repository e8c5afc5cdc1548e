// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_POD_HPP
#define NLROM_POD_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nlrom/errors.hpp"

namespace nlrom {

// Orthonormal reduction matrix from the truncated SVD of a snapshot matrix,
// together with the full singular spectrum.
struct PodBasis {
  Eigen::MatrixXd modes;           // N_h x n, orthonormal columns
  Eigen::VectorXd singular_values; // all N values, nonincreasing

  int reduced_dim() const { return static_cast<int>(modes.cols()); }
};

/// Thin SVD of the snapshot matrix via the eigen-decomposition of its N x N
/// Gram matrix (Euclidean inner product), keeping the first n left singular
/// vectors. A Householder re-orthonormalization absorbs the loss of
/// orthogonality the Gram route incurs on small singular values.
inline PodBasis pod_fit(const Eigen::MatrixXd &snapshots, int n) {
  const int count = static_cast<int>(snapshots.cols());
  const int dim = static_cast<int>(snapshots.rows());
  if (n < 1 || n > std::min(dim, count)) throw ConfigError("pod_fit: n out of range");

  Eigen::MatrixXd gram = snapshots.transpose() * snapshots;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("pod_fit: eigensolver failed");

  PodBasis basis;
  basis.singular_values.resize(count);
  for (int i = 0; i < count; ++i)
    basis.singular_values[i] = std::sqrt(std::max(0.0, es.eigenvalues()[count - 1 - i]));

  Eigen::MatrixXd v(dim, n);
  for (int i = 0; i < n; ++i) {
    const double sigma = basis.singular_values[i];
    if (!(sigma > 0.0))
      throw NumericalError("pod_fit: requested modes exceed the numerical rank");
    v.col(i) = snapshots * es.eigenvectors().col(count - 1 - i) / sigma;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, n);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n);
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  basis.modes = std::move(q);
  return basis;
}

// Norm used for reporting projection errors. The projection itself is always
// Euclidean-orthogonal (the POD optimality notion); the report norm may be an
// L2 (mass-weighted) one.
using VectorNorm = std::function<double(const Eigen::VectorXd &)>;

inline VectorNorm euclidean_norm() {
  return [](const Eigen::VectorXd &v) { return v.norm(); };
}

struct ProjectionErrors {
  Eigen::VectorXd per_column;  // relative errors
  double mean = 0.0;
  double sup = 0.0;
};

/// Relative projection errors |u - V V^T u| / |u| per column.
inline ProjectionErrors projection_errors(const PodBasis &basis, const Eigen::MatrixXd &columns,
                                          const VectorNorm &norm = euclidean_norm()) {
  if (columns.rows() != basis.modes.rows())
    throw ConfigError("projection_errors: dimension mismatch");
  ProjectionErrors result;
  const int n = static_cast<int>(columns.cols());
  result.per_column.resize(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd u = columns.col(j);
    const double denom = norm(u);
    if (!(denom > 0.0)) throw ConfigError("projection_errors: zero-norm column");
    const Eigen::VectorXd residual = u - basis.modes * (basis.modes.transpose() * u);
    result.per_column[j] = norm(residual) / denom;
  }
  result.mean = result.per_column.mean();
  result.sup = result.per_column.maxCoeff();
  return result;
}

struct ErrorDofRow {
  int n = 0;
  long long dof = 0;
  double train_mre = 0.0;
  double test_mre = 0.0;
};

/// Projection-error-vs-degrees-of-freedom table; dof = n * N_h, the entry
/// count of the projection matrix.
inline std::vector<ErrorDofRow> error_dof_curve(const Eigen::MatrixXd &train,
                                                const Eigen::MatrixXd &test,
                                                const std::vector<int> &n_list,
                                                const VectorNorm &norm = euclidean_norm()) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw ConfigError("error_dof_curve: n_list must increase");
  std::vector<ErrorDofRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    const PodBasis basis = pod_fit(train, n);
    ErrorDofRow row;
    row.n = n;
    row.dof = static_cast<long long>(n) * train.rows();
    row.train_mre = projection_errors(basis, train, norm).mean;
    row.test_mre = projection_errors(basis, test, norm).mean;
    rows.push_back(row);
  }
  return rows;
}

/// Analytic Kolmogorov width lower bound of the hat-function manifold:
/// d_n >= (1 / (2 sqrt(6))) n^(-3/2).
inline double hat_width_lower_bound(int n) {
  if (n < 1) throw ConfigError("hat_width_lower_bound: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.5) / (2.0 * std::sqrt(6.0));
}

}  // namespace nlrom

#endif  // NLROM_POD_HPP
