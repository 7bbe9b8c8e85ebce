#pragma once

#include <memory>
#include <string>
#include <vector>

#include "crossgan/params.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

enum class Mode {
  kTrain,        ///< batch statistics; running statistics updated
  kTrainFrozen,  ///< batch statistics; running statistics left untouched
  kInference,    ///< running statistics
};

/// Activations a layer keeps from forward for its backward pass.
template <typename T>
struct LayerCache {
  std::vector<Tensor<T>> saved;
  Shape input_shape;
};

/// Differentiable layer. forward() may be called several times before the
/// matching backward() calls since all per-call state lives in the cache.
/// backward() accumulates parameter gradients and returns the input gradient.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) = 0;
  virtual std::string kind() const = 0;
};

template <typename T>
using ParamHandle = typename NetworkParams<T>::Handle;

/// y = x W^T + b, x of shape (N, in), W of shape (out, in).
template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(ParamHandle<T> weight, ParamHandle<T> bias);
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "linear"; }

 private:
  ParamHandle<T> weight_;
  ParamHandle<T> bias_;  // may be null
};

/// Square-kernel convolution, W of shape (out, in, k, k).
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(ParamHandle<T> weight, ParamHandle<T> bias, int stride, int padding);
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "conv2d"; }

 private:
  ParamHandle<T> weight_;
  ParamHandle<T> bias_;
  int stride_;
  int padding_;
};

/// Fractional-strided (transposed) convolution, W of shape (in, out, k, k).
template <typename T>
class ConvTranspose2d final : public Layer<T> {
 public:
  ConvTranspose2d(ParamHandle<T> weight, ParamHandle<T> bias, int stride, int padding);
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "conv_transpose2d"; }

 private:
  ParamHandle<T> weight_;
  ParamHandle<T> bias_;
  int stride_;
  int padding_;
};

/// Per-channel batch normalization over axis 1 of an (N, C, ...) input.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(ParamHandle<T> gamma, ParamHandle<T> beta, ParamHandle<T> running_mean,
            ParamHandle<T> running_var, double momentum = 0.1, double eps = 1e-5);
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "batch_norm"; }

 private:
  ParamHandle<T> gamma_, beta_, running_mean_, running_var_;
  double momentum_;
  double eps_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "relu"; }
};

template <typename T>
class LeakyReLU final : public Layer<T> {
 public:
  explicit LeakyReLU(double slope = 0.2) : slope_(slope) {}
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "leaky_relu"; }

 private:
  double slope_;
};

template <typename T>
class Tanh final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "tanh"; }
};

/// Keeps the batch axis and replaces the rest with `tail`.
template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(Shape tail) : tail_(std::move(tail)) {}
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "reshape"; }

 private:
  Shape tail_;
};

/// Identity on the forward pass, gradient negation on the backward pass.
template <typename T>
class GradientReversal final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) override;
  Tensor<T> backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) override;
  std::string kind() const override { return "gradient_reversal"; }
};

template <typename T>
Tensor<T> gradient_reversal(const Tensor<T>& x) {
  return x;
}

template <typename T>
Tensor<T> gradient_reversal_backward(const Tensor<T>& upstream) {
  Tensor<T> out = upstream;
  for (auto& v : out.storage()) v = -v;
  return out;
}

/// Everything recorded by one Sequential::forward call.
template <typename T>
struct Trace {
  std::vector<LayerCache<T>> caches;
  std::vector<Tensor<T>> block_outputs;  // output of the last layer of each block
  Tensor<T> output;
};

/// Layers grouped into named blocks. Block granularity is what weight tying
/// and activation instrumentation refer to.
template <typename T>
class Sequential {
 public:
  void add(std::string block, std::unique_ptr<Layer<T>> layer);

  Trace<T> forward(const Tensor<T>& x, Mode mode);
  Tensor<T> run(const Tensor<T>& x, Mode mode) { return forward(x, mode).output; }
  Tensor<T> backward(const Trace<T>& trace, const Tensor<T>& grad_out);

  const std::vector<std::string>& block_names() const noexcept { return block_names_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<std::size_t> layer_block_;
  std::vector<std::string> block_names_;
};

}  // namespace crossgan
