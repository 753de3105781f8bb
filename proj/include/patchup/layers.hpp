#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "patchup/rng.hpp"
#include "patchup/tensor.hpp"

namespace patchup {

struct ParamTensor {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor momentum;
};

/// One differentiable layer. forward caches whatever backward needs; backward
/// consumes the gradient w.r.t. the output and returns the gradient w.r.t.
/// the input, accumulating parameter gradients in place.
class Layer {
public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& dout) = 0;
  virtual std::vector<ParamTensor*> params() { return {}; }
  /// Non-trainable state that checkpoints must carry (e.g. running stats).
  virtual std::vector<std::pair<std::string, Tensor*>> buffers() { return {}; }
};

/// 2-D convolution, square kernel, stride 1, same padding. im2col + GEMM.
class Conv2d : public Layer {
public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         const std::string& name, Rng& rng);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;
  std::vector<ParamTensor*> params() override { return {&weight_, &bias_}; }

private:
  std::size_t in_c_, out_c_, k_;
  ParamTensor weight_;  // (out_c, in_c*k*k)
  ParamTensor bias_;    // (out_c)
  std::vector<double> cols_;  // cached im2col of the last input
  std::vector<std::size_t> in_shape_;
};

/// Per-channel batch normalization with running statistics.
class BatchNorm2d : public Layer {
public:
  BatchNorm2d(std::size_t channels, const std::string& name, double momentum = 0.1,
              double eps = 1e-5);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;
  std::vector<ParamTensor*> params() override { return {&gamma_, &beta_}; }
  std::vector<std::pair<std::string, Tensor*>> buffers() override {
    return {{name_ + ".running_mean", &running_mean_},
            {name_ + ".running_var", &running_var_}};
  }

private:
  std::string name_;
  std::size_t channels_;
  double momentum_, eps_;
  ParamTensor gamma_, beta_;
  Tensor running_mean_, running_var_;
  Tensor xhat_;                 // cached normalized input
  std::vector<double> inv_std_;  // per channel
  std::vector<std::size_t> in_shape_;
};

class ReLU : public Layer {
public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;

private:
  std::vector<std::uint8_t> positive_;
};

/// 2x2 max pooling, stride 2.
class MaxPool2d : public Layer {
public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;

private:
  std::vector<std::size_t> argmax_;
  std::vector<std::size_t> in_shape_;
};

/// Collapse (B,C,H,W) to (B, C*H*W).
class Flatten : public Layer {
public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;

private:
  std::vector<std::size_t> in_shape_;
};

class Linear : public Layer {
public:
  Linear(std::size_t in_features, std::size_t out_features, const std::string& name,
         Rng& rng);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dout) override;
  std::vector<ParamTensor*> params() override { return {&weight_, &bias_}; }

private:
  std::size_t in_f_, out_f_;
  ParamTensor weight_;  // (out_f, in_f)
  ParamTensor bias_;    // (out_f)
  Tensor input_;
};

}  // namespace patchup
