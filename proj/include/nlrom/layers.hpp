// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_LAYERS_HPP
#define NLROM_LAYERS_HPP

#include <cmath>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nlrom/errors.hpp"
#include "nlrom/tensor.hpp"

namespace nlrom {

using ParamVisitor = std::function<void(double *params, double *grads, std::size_t count)>;

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string type() const = 0;
  virtual Tensor forward(const Tensor &x) const = 0;
  /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
  virtual Tensor backward(const Tensor &x, const Tensor &dy) = 0;
  virtual void visit_params(const ParamVisitor &) {}
  virtual long long param_count() const { return 0; }
  virtual void zero_grad() {}
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual nlohmann::json descriptor() const = 0;
  virtual void write_weights(std::ostream &) const {}
  virtual void read_weights(std::istream &) {}
};

namespace detail {

inline void write_doubles(std::ostream &os, const double *p, std::size_t n) {
  os.write(reinterpret_cast<const char *>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void read_doubles(std::istream &is, double *p, std::size_t n) {
  is.read(reinterpret_cast<char *>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw IoError("model file truncated");
}

}  // namespace detail

class Dense : public Layer {
 public:
  using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Dense(int in, int out) : in_(in), out_(out) {
    if (in < 1 || out < 1) throw ConfigError("Dense: dimensions must be positive");
    weights_ = WeightMatrix::Zero(out, in);
    bias_ = Eigen::VectorXd::Zero(out);
    grad_weights_ = WeightMatrix::Zero(out, in);
    grad_bias_ = Eigen::VectorXd::Zero(out);
  }

  std::string type() const override { return "dense"; }
  int fan_in() const { return in_; }
  int fan_out() const { return out_; }
  WeightMatrix &weights() { return weights_; }
  const WeightMatrix &weights() const { return weights_; }
  Eigen::VectorXd &bias() { return bias_; }

  // Per-sample scalar accumulation keeps batched evaluation bitwise equal to
  // stacking single-sample forwards (Eigen's GEMM and GEMV kernels do not
  // share a summation order).
  Tensor forward(const Tensor &x) const override {
    if (x.features() != in_) throw ConfigError("Dense: input feature mismatch");
    Tensor y({x.batch(), out_});
    for (int b = 0; b < x.batch(); ++b) {
      const double *row = x.data.data() + static_cast<std::size_t>(b) * in_;
      for (int o = 0; o < out_; ++o) {
        double acc = bias_[o];
        const double *w = weights_.data() + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) acc += w[i] * row[i];
        y.at2(b, o) = acc;
      }
    }
    return y;
  }

  Tensor backward(const Tensor &x, const Tensor &dy) override {
    if (dy.features() != out_ || dy.batch() != x.batch())
      throw ConfigError("Dense: gradient shape mismatch");
    Tensor dx(x.shape);
    for (int b = 0; b < x.batch(); ++b) {
      const double *row = x.data.data() + static_cast<std::size_t>(b) * in_;
      double *drow = dx.data.data() + static_cast<std::size_t>(b) * in_;
      for (int o = 0; o < out_; ++o) {
        const double g = dy.at2(b, o);
        grad_bias_[o] += g;
        double *gw = grad_weights_.data() + static_cast<std::size_t>(o) * in_;
        const double *w = weights_.data() + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) {
          gw[i] += g * row[i];
          drow[i] += g * w[i];
        }
      }
    }
    return dx;
  }

  void visit_params(const ParamVisitor &fn) override {
    fn(weights_.data(), grad_weights_.data(), static_cast<std::size_t>(weights_.size()));
    fn(bias_.data(), grad_bias_.data(), static_cast<std::size_t>(bias_.size()));
  }

  long long param_count() const override {
    return static_cast<long long>(in_ + 1) * out_;
  }

  void zero_grad() override {
    grad_weights_.setZero();
    grad_bias_.setZero();
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  nlohmann::json descriptor() const override {
    return {{"type", "dense"}, {"in", in_}, {"out", out_}};
  }

  void write_weights(std::ostream &os) const override {
    detail::write_doubles(os, weights_.data(), static_cast<std::size_t>(weights_.size()));
    detail::write_doubles(os, bias_.data(), static_cast<std::size_t>(bias_.size()));
  }

  void read_weights(std::istream &is) override {
    detail::read_doubles(is, weights_.data(), static_cast<std::size_t>(weights_.size()));
    detail::read_doubles(is, bias_.data(), static_cast<std::size_t>(bias_.size()));
  }

 private:
  int in_;
  int out_;
  WeightMatrix weights_;  // out x in, row-major
  Eigen::VectorXd bias_;
  WeightMatrix grad_weights_;
  Eigen::VectorXd grad_bias_;
};

class Activation : public Layer {
 public:
  enum class Kind { ReLU, LeakyReLU };

  explicit Activation(Kind kind, double alpha = 0.01) : kind_(kind), alpha_(alpha) {
    if (kind == Kind::LeakyReLU && !(alpha > 0.0))
      throw ConfigError("Activation: leaky slope must be positive");
  }

  std::string type() const override { return "activation"; }

  Tensor forward(const Tensor &x) const override {
    const double a = slope();
    Tensor y = x;
    for (auto &v : y.data)
      if (v < 0.0) v *= a;
    return y;
  }

  Tensor backward(const Tensor &x, const Tensor &dy) override {
    if (dy.size() != x.size()) throw ConfigError("Activation: gradient shape mismatch");
    const double a = slope();
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      if (!(x.data[i] > 0.0)) dx.data[i] *= a;
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Activation>(*this); }

  nlohmann::json descriptor() const override {
    return {{"type", "activation"},
            {"kind", kind_ == Kind::ReLU ? "relu" : "leaky_relu"},
            {"alpha", alpha_}};
  }

 private:
  double slope() const { return kind_ == Kind::ReLU ? 0.0 : alpha_; }

  Kind kind_;
  double alpha_;
};

class Reshape : public Layer {
 public:
  /// Target feature shape, batch axis excluded.
  explicit Reshape(std::vector<int> target) : target_(std::move(target)) {
    if (target_.empty() || target_.size() > 3) throw ConfigError("Reshape: bad target rank");
  }

  std::string type() const override { return "reshape"; }

  Tensor forward(const Tensor &x) const override {
    std::vector<int> shape{x.batch()};
    shape.insert(shape.end(), target_.begin(), target_.end());
    return x.reshaped(shape);
  }

  Tensor backward(const Tensor &x, const Tensor &dy) override { return dy.reshaped(x.shape); }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Reshape>(*this); }

  nlohmann::json descriptor() const override { return {{"type", "reshape"}, {"target", target_}}; }

 private:
  std::vector<int> target_;
};

class TransposedConv2d : public Layer {
 public:
  TransposedConv2d(int c_in, int c_out, int kernel, int stride, int padding)
      : c_in_(c_in), c_out_(c_out), kh_(kernel), kw_(kernel), stride_(stride), pad_(padding) {
    if (c_in < 1 || c_out < 1 || kernel < 1 || stride < 1 || padding < 0)
      throw ConfigError("TransposedConv2d: bad geometry");
    kernel_.assign(static_cast<std::size_t>(c_out_) * c_in_ * kh_ * kw_, 0.0);
    bias_.assign(static_cast<std::size_t>(c_out_), 0.0);
    grad_kernel_.assign(kernel_.size(), 0.0);
    grad_bias_.assign(bias_.size(), 0.0);
  }

  std::string type() const override { return "transposed_conv2d"; }
  int fan_in() const { return c_in_ * kh_ * kw_; }

  static int output_size(int in, int kernel, int stride, int padding) {
    return (in - 1) * stride - 2 * padding + kernel;
  }

  Tensor forward(const Tensor &x) const override {
    check_input(x);
    const int b_count = x.batch();
    const int h = x.shape[2], w = x.shape[3];
    const int oh = output_size(h, kh_, stride_, pad_);
    const int ow = output_size(w, kw_, stride_, pad_);
    if (oh < 1 || ow < 1) throw ConfigError("TransposedConv2d: empty output");
    Tensor y({b_count, c_out_, oh, ow});
    for (int b = 0; b < b_count; ++b)
      for (int co = 0; co < c_out_; ++co)
        for (int i = 0; i < oh; ++i)
          for (int j = 0; j < ow; ++j) y.at4(b, co, i, j) = bias_[static_cast<std::size_t>(co)];
    for (int b = 0; b < b_count; ++b)
      for (int ci = 0; ci < c_in_; ++ci)
        for (int ih = 0; ih < h; ++ih)
          for (int iw = 0; iw < w; ++iw) {
            const double v = x.at4(b, ci, ih, iw);
            for (int co = 0; co < c_out_; ++co)
              for (int p = 0; p < kh_; ++p) {
                const int out_i = ih * stride_ - pad_ + p;
                if (out_i < 0 || out_i >= oh) continue;
                for (int q = 0; q < kw_; ++q) {
                  const int out_j = iw * stride_ - pad_ + q;
                  if (out_j < 0 || out_j >= ow) continue;
                  y.at4(b, co, out_i, out_j) += v * kernel_at(co, ci, p, q);
                }
              }
          }
    return y;
  }

  Tensor backward(const Tensor &x, const Tensor &dy) override {
    check_input(x);
    const int b_count = x.batch();
    const int h = x.shape[2], w = x.shape[3];
    const int oh = output_size(h, kh_, stride_, pad_);
    const int ow = output_size(w, kw_, stride_, pad_);
    if (dy.shape != std::vector<int>{b_count, c_out_, oh, ow})
      throw ConfigError("TransposedConv2d: gradient shape mismatch");
    Tensor dx(x.shape);
    for (int b = 0; b < b_count; ++b) {
      for (int co = 0; co < c_out_; ++co)
        for (int i = 0; i < oh; ++i)
          for (int j = 0; j < ow; ++j)
            grad_bias_[static_cast<std::size_t>(co)] += dy.at4(b, co, i, j);
      for (int ci = 0; ci < c_in_; ++ci)
        for (int ih = 0; ih < h; ++ih)
          for (int iw = 0; iw < w; ++iw) {
            const double v = x.at4(b, ci, ih, iw);
            double acc = 0.0;
            for (int co = 0; co < c_out_; ++co)
              for (int p = 0; p < kh_; ++p) {
                const int out_i = ih * stride_ - pad_ + p;
                if (out_i < 0 || out_i >= oh) continue;
                for (int q = 0; q < kw_; ++q) {
                  const int out_j = iw * stride_ - pad_ + q;
                  if (out_j < 0 || out_j >= ow) continue;
                  const double g = dy.at4(b, co, out_i, out_j);
                  acc += g * kernel_at(co, ci, p, q);
                  grad_kernel_at(co, ci, p, q) += g * v;
                }
              }
            dx.at4(b, ci, ih, iw) = acc;
          }
    }
    return dx;
  }

  void visit_params(const ParamVisitor &fn) override {
    fn(kernel_.data(), grad_kernel_.data(), kernel_.size());
    fn(bias_.data(), grad_bias_.data(), bias_.size());
  }

  long long param_count() const override {
    return static_cast<long long>(c_out_) * c_in_ * kh_ * kw_ + c_out_;
  }

  void zero_grad() override {
    std::fill(grad_kernel_.begin(), grad_kernel_.end(), 0.0);
    std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
  }

  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<TransposedConv2d>(*this);
  }

  nlohmann::json descriptor() const override {
    return {{"type", "transposed_conv2d"}, {"c_in", c_in_},     {"c_out", c_out_},
            {"kernel", kh_},               {"stride", stride_}, {"padding", pad_}};
  }

  void write_weights(std::ostream &os) const override {
    detail::write_doubles(os, kernel_.data(), kernel_.size());
    detail::write_doubles(os, bias_.data(), bias_.size());
  }

  void read_weights(std::istream &is) override {
    detail::read_doubles(is, kernel_.data(), kernel_.size());
    detail::read_doubles(is, bias_.data(), bias_.size());
  }

  double &kernel_at(int co, int ci, int p, int q) {
    return kernel_[static_cast<std::size_t>(((co * c_in_ + ci) * kh_ + p) * kw_ + q)];
  }
  double kernel_at(int co, int ci, int p, int q) const {
    return kernel_[static_cast<std::size_t>(((co * c_in_ + ci) * kh_ + p) * kw_ + q)];
  }

 private:
  double &grad_kernel_at(int co, int ci, int p, int q) {
    return grad_kernel_[static_cast<std::size_t>(((co * c_in_ + ci) * kh_ + p) * kw_ + q)];
  }

  void check_input(const Tensor &x) const {
    if (x.shape.size() != 4 || x.shape[1] != c_in_)
      throw ConfigError("TransposedConv2d: expected input shape (batch, c_in, h, w)");
  }

  int c_in_, c_out_, kh_, kw_, stride_, pad_;
  std::vector<double> kernel_;  // [c_out][c_in][kh][kw]
  std::vector<double> bias_;
  std::vector<double> grad_kernel_;
  std::vector<double> grad_bias_;
};

// Parameter-free resize of a (batch, c, h, w) map to a target spatial size:
// larger targets replicate the last row/column (edge padding), smaller ones
// crop the top-left block. Maps a 64x64 feature map onto a 65x65 nodal grid.
class CropPad2d : public Layer {
 public:
  CropPad2d(int target_h, int target_w) : th_(target_h), tw_(target_w) {
    if (th_ < 1 || tw_ < 1) throw ConfigError("CropPad2d: bad target size");
  }

  std::string type() const override { return "crop_pad2d"; }

  Tensor forward(const Tensor &x) const override {
    if (x.shape.size() != 4) throw ConfigError("CropPad2d: expected 4D input");
    const int h = x.shape[2], w = x.shape[3];
    Tensor y({x.batch(), x.shape[1], th_, tw_});
    for (int b = 0; b < x.batch(); ++b)
      for (int c = 0; c < x.shape[1]; ++c)
        for (int i = 0; i < th_; ++i)
          for (int j = 0; j < tw_; ++j)
            y.at4(b, c, i, j) = x.at4(b, c, std::min(i, h - 1), std::min(j, w - 1));
    return y;
  }

  Tensor backward(const Tensor &x, const Tensor &dy) override {
    const int h = x.shape[2], w = x.shape[3];
    Tensor dx(x.shape);
    for (int b = 0; b < x.batch(); ++b)
      for (int c = 0; c < x.shape[1]; ++c)
        for (int i = 0; i < th_; ++i)
          for (int j = 0; j < tw_; ++j)
            dx.at4(b, c, std::min(i, h - 1), std::min(j, w - 1)) += dy.at4(b, c, i, j);
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<CropPad2d>(*this); }

  nlohmann::json descriptor() const override {
    return {{"type", "crop_pad2d"}, {"target_h", th_}, {"target_w", tw_}};
  }

 private:
  int th_, tw_;
};

inline std::unique_ptr<Layer> layer_from_descriptor(const nlohmann::json &d) {
  const std::string type = d.at("type").get<std::string>();
  if (type == "dense") return std::make_unique<Dense>(d.at("in").get<int>(), d.at("out").get<int>());
  if (type == "activation") {
    const std::string kind = d.at("kind").get<std::string>();
    return std::make_unique<Activation>(
        kind == "relu" ? Activation::Kind::ReLU : Activation::Kind::LeakyReLU,
        d.value("alpha", 0.01));
  }
  if (type == "reshape") return std::make_unique<Reshape>(d.at("target").get<std::vector<int>>());
  if (type == "transposed_conv2d")
    return std::make_unique<TransposedConv2d>(d.at("c_in").get<int>(), d.at("c_out").get<int>(),
                                              d.at("kernel").get<int>(), d.at("stride").get<int>(),
                                              d.at("padding").get<int>());
  if (type == "crop_pad2d")
    return std::make_unique<CropPad2d>(d.at("target_h").get<int>(), d.at("target_w").get<int>());
  throw IoError("unknown layer type: " + type);
}

}  // namespace nlrom

#endif  // NLROM_LAYERS_HPP
