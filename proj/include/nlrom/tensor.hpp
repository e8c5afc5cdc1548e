// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_TENSOR_HPP
#define NLROM_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "nlrom/errors.hpp"

namespace nlrom {

// Dense row-major float64 tensor with up to 4 axes. The first axis is the
// batch by convention.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    if (shape.empty() || shape.size() > 4) throw ConfigError("Tensor: rank must be 1..4");
    data.assign(static_cast<std::size_t>(element_count(shape)), 0.0);
  }

  static long long element_count(const std::vector<int> &s) {
    long long n = 1;
    for (int d : s) {
      if (d < 1) throw ConfigError("Tensor: axis lengths must be positive");
      n *= d;
    }
    return n;
  }

  long long size() const { return static_cast<long long>(data.size()); }
  int batch() const { return shape[0]; }
  long long features() const { return size() / batch(); }

  double &at2(int b, long long f) { return data[static_cast<std::size_t>(b * features() + f)]; }
  double at2(int b, long long f) const {
    return data[static_cast<std::size_t>(b * features() + f)];
  }

  // 4D accessors assume shape (batch, channels, height, width).
  double &at4(int b, int c, int h, int w) {
    return data[static_cast<std::size_t>(((static_cast<long long>(b) * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  double at4(int b, int c, int h, int w) const {
    return data[static_cast<std::size_t>(((static_cast<long long>(b) * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }

  Tensor reshaped(std::vector<int> target) const {
    if (element_count(target) != size()) throw ConfigError("Tensor: reshape size mismatch");
    Tensor t;
    t.shape = std::move(target);
    t.data = data;
    return t;
  }

  /// Batch view as an Eigen row-major matrix (batch x features).
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  as_matrix() const {
    return {data.data(), batch(), features()};
  }
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_matrix() {
    return {data.data(), batch(), features()};
  }

  /// Builds a (batch, rows) tensor from selected columns of a matrix.
  static Tensor from_columns(const Eigen::MatrixXd &m, const std::vector<int> &cols) {
    Tensor t({static_cast<int>(cols.size()), static_cast<int>(m.rows())});
    for (std::size_t b = 0; b < cols.size(); ++b)
      for (int f = 0; f < m.rows(); ++f) t.at2(static_cast<int>(b), f) = m(f, cols[b]);
    return t;
  }

  static Tensor from_column(const Eigen::VectorXd &v) {
    Tensor t({1, static_cast<int>(v.size())});
    for (int f = 0; f < v.size(); ++f) t.at2(0, f) = v[f];
    return t;
  }
};

}  // namespace nlrom

#endif  // NLROM_TENSOR_HPP
