// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_LOSS_HPP
#define NLROM_LOSS_HPP

#include <cmath>
#include <string>

#include "nlrom/errors.hpp"
#include "nlrom/tensor.hpp"

namespace nlrom {

enum class LossKind { Squared, Relative };

inline LossKind loss_from_string(const std::string &s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "relative") return LossKind::Relative;
  throw ConfigError("unknown loss kind: " + s);
}

inline std::string to_string(LossKind k) {
  return k == LossKind::Squared ? "squared" : "relative";
}

struct LossValue {
  double value = 0.0;
  Tensor grad;  // w.r.t. the prediction
};

/// Squared error: per sample ||y - yhat||^2 summed over features, averaged
/// over the batch.
inline LossValue squared_loss(const Tensor &target, const Tensor &prediction) {
  if (target.shape != prediction.shape) throw ConfigError("squared_loss: shape mismatch");
  LossValue out;
  out.grad = Tensor(prediction.shape);
  const double inv_b = 1.0 / target.batch();
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    const double e = prediction.data[i] - target.data[i];
    out.value += e * e;
    out.grad.data[i] = 2.0 * e * inv_b;
  }
  out.value *= inv_b;
  return out;
}

/// Relative error: per sample ||y - yhat|| / ||y||, averaged over the batch.
/// The gradient at yhat == y is defined as zero (removable singularity).
inline LossValue relative_loss(const Tensor &target, const Tensor &prediction) {
  if (target.shape != prediction.shape) throw ConfigError("relative_loss: shape mismatch");
  LossValue out;
  out.grad = Tensor(prediction.shape);
  const int b_count = target.batch();
  const long long f_count = target.features();
  const double inv_b = 1.0 / b_count;
  for (int b = 0; b < b_count; ++b) {
    double err2 = 0.0, norm2 = 0.0;
    for (long long f = 0; f < f_count; ++f) {
      const double e = prediction.at2(b, f) - target.at2(b, f);
      err2 += e * e;
      norm2 += target.at2(b, f) * target.at2(b, f);
    }
    if (!(norm2 > 0.0)) throw ConfigError("relative_loss: zero-norm target");
    const double err = std::sqrt(err2);
    const double norm = std::sqrt(norm2);
    out.value += err / norm * inv_b;
    if (err > 0.0) {
      const double scale = inv_b / (err * norm);
      for (long long f = 0; f < f_count; ++f)
        out.grad.at2(b, f) = scale * (prediction.at2(b, f) - target.at2(b, f));
    }
  }
  return out;
}

inline LossValue compute_loss(LossKind kind, const Tensor &target, const Tensor &prediction) {
  return kind == LossKind::Squared ? squared_loss(target, prediction)
                                   : relative_loss(target, prediction);
}

}  // namespace nlrom

#endif  // NLROM_LOSS_HPP
