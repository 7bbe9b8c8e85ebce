#include "crossgan/layers.hpp"

#include <Eigen/Core>
#include <cmath>

namespace crossgan {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct Geometry {
  std::size_t n, c, h, w;  // image batch
  std::size_t k, stride, pad;
  std::size_t oh, ow;  // sliding-window positions

  std::size_t rows() const { return c * k * k; }
  std::size_t cols() const { return n * oh * ow; }
};

Geometry conv_geometry(const Shape& image, std::size_t k, int stride, int pad) {
  Geometry g{image[0], image[1], image[2], image[3], k,
             static_cast<std::size_t>(stride), static_cast<std::size_t>(pad), 0, 0};
  const long oh = (static_cast<long>(g.h) + 2 * pad - static_cast<long>(k)) / stride + 1;
  const long ow = (static_cast<long>(g.w) + 2 * pad - static_cast<long>(k)) / stride + 1;
  if (oh <= 0 || ow <= 0) {
    throw std::invalid_argument("convolution window larger than input " +
                                shape_to_string(image));
  }
  g.oh = static_cast<std::size_t>(oh);
  g.ow = static_cast<std::size_t>(ow);
  return g;
}

// Unfolds sliding windows: row (c, ki, kj), column (n, oy, ox).
template <typename T>
void im2col(const T* x, const Geometry& g, T* cols) {
  const std::size_t positions = g.oh * g.ow;
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        T* row = cols + ((c * g.k + ki) * g.k + kj) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          const T* plane = x + (n * g.c + c) * g.h * g.w;
          T* dst = row + n * positions;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
              const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(g.h) &&
                                  ix < static_cast<long>(g.w);
              dst[oy * g.ow + ox] = inside ? plane[iy * g.w + ix] : T{0};
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: overlapping windows accumulate.
template <typename T>
void col2im(const T* cols, const Geometry& g, T* x) {
  const std::size_t positions = g.oh * g.ow;
  const std::size_t ncols = g.cols();
  std::fill(x, x + g.n * g.c * g.h * g.w, T{0});
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const T* row = cols + ((c * g.k + ki) * g.k + kj) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          T* plane = x + (n * g.c + c) * g.h * g.w;
          const T* src = row + n * positions;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
              if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
              plane[iy * g.w + ix] += src[oy * g.ow + ox];
            }
          }
        }
      }
    }
  }
}

// (N, C, P) tensor <-> (C, N*P) matrix.
template <typename T>
void batch_to_channel_major(const T* src, std::size_t n, std::size_t c, std::size_t p, T* dst) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      std::copy_n(src + (i * c + ch) * p, p, dst + ch * n * p + i * p);
}

template <typename T>
void channel_major_to_batch(const T* src, std::size_t n, std::size_t c, std::size_t p, T* dst) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      std::copy_n(src + ch * n * p + i * p, p, dst + (i * c + ch) * p);
}

void require_rank(const Shape& shape, std::size_t rank, const char* layer) {
  if (shape.size() != rank) {
    throw std::invalid_argument(std::string(layer) + " expects rank " + std::to_string(rank) +
                                " input, got " + shape_to_string(shape));
  }
}

}  // namespace

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(ParamHandle<T> weight, ParamHandle<T> bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  require_rank(x.shape(), 2, "linear");
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight_->value.dim(0);
  if (weight_->value.dim(1) != in) {
    throw std::invalid_argument("linear: input width " + std::to_string(in) +
                                " does not match weight " +
                                shape_to_string(weight_->value.shape()));
  }
  Tensor<T> y({n, out});
  MapMat<T>(y.data(), n, out).noalias() =
      ConstMapMat<T>(x.data(), n, in) * ConstMapMat<T>(weight_->value.data(), out, in).transpose();
  if (bias_) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < out; ++j) y[i * out + j] += bias_->value[j];
  }
  cache.saved = {x};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& x = cache.saved.at(0);
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight_->value.dim(0);
  ConstMapMat<T> dy(grad_out.data(), n, out);
  MapMat<T>(weight_->grad.data(), out, in).noalias() +=
      dy.transpose() * ConstMapMat<T>(x.data(), n, in);
  if (bias_) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < out; ++j) bias_->grad[j] += grad_out[i * out + j];
  }
  Tensor<T> dx({n, in});
  MapMat<T>(dx.data(), n, in).noalias() = dy * ConstMapMat<T>(weight_->value.data(), out, in);
  return dx;
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(ParamHandle<T> weight, ParamHandle<T> bias, int stride, int padding)
    : weight_(std::move(weight)), bias_(std::move(bias)), stride_(stride), padding_(padding) {}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  require_rank(x.shape(), 4, "conv2d");
  const Shape& ws = weight_->value.shape();
  if (ws[1] != x.dim(1)) {
    throw std::invalid_argument("conv2d: input channels do not match weight " +
                                shape_to_string(ws));
  }
  const Geometry g = conv_geometry(x.shape(), ws[2], stride_, padding_);
  const std::size_t cout = ws[0];
  Tensor<T> cols({g.rows(), g.cols()});
  im2col(x.data(), g, cols.data());

  Tensor<T> y_cm({cout, g.cols()});
  MapMat<T>(y_cm.data(), cout, g.cols()).noalias() =
      ConstMapMat<T>(weight_->value.data(), cout, g.rows()) *
      ConstMapMat<T>(cols.data(), g.rows(), g.cols());
  Tensor<T> y({g.n, cout, g.oh, g.ow});
  channel_major_to_batch(y_cm.data(), g.n, cout, g.oh * g.ow, y.data());
  if (bias_) {
    const std::size_t p = g.oh * g.ow;
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t c = 0; c < cout; ++c)
        for (std::size_t q = 0; q < p; ++q) y[(i * cout + c) * p + q] += bias_->value[c];
  }
  cache.saved = {std::move(cols)};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& cols = cache.saved.at(0);
  const Shape& ws = weight_->value.shape();
  const Geometry g = conv_geometry(cache.input_shape, ws[2], stride_, padding_);
  const std::size_t cout = ws[0];
  const std::size_t p = g.oh * g.ow;

  Tensor<T> dy_cm({cout, g.cols()});
  batch_to_channel_major(grad_out.data(), g.n, cout, p, dy_cm.data());
  ConstMapMat<T> dy(dy_cm.data(), cout, g.cols());

  MapMat<T>(weight_->grad.data(), cout, g.rows()).noalias() +=
      dy * ConstMapMat<T>(cols.data(), g.rows(), g.cols()).transpose();
  if (bias_) {
    for (std::size_t c = 0; c < cout; ++c) bias_->grad[c] += dy.row(c).sum();
  }
  Tensor<T> dcols({g.rows(), g.cols()});
  MapMat<T>(dcols.data(), g.rows(), g.cols()).noalias() =
      ConstMapMat<T>(weight_->value.data(), cout, g.rows()).transpose() * dy;
  Tensor<T> dx(cache.input_shape);
  col2im(dcols.data(), g, dx.data());
  return dx;
}

// ------------------------------------------------------- ConvTranspose2d

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(ParamHandle<T> weight, ParamHandle<T> bias, int stride,
                                    int padding)
    : weight_(std::move(weight)), bias_(std::move(bias)), stride_(stride), padding_(padding) {}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  require_rank(x.shape(), 4, "conv_transpose2d");
  const Shape& ws = weight_->value.shape();
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (ws[0] != cin) {
    throw std::invalid_argument("conv_transpose2d: input channels do not match weight " +
                                shape_to_string(ws));
  }
  const std::size_t cout = ws[1], k = ws[2];
  const std::size_t oh = (h - 1) * stride_ + k - 2 * padding_;
  const std::size_t ow = (w - 1) * stride_ + k - 2 * padding_;
  const Geometry g = conv_geometry({n, cout, oh, ow}, k, stride_, padding_);

  Tensor<T> x_cm({cin, n * h * w});
  batch_to_channel_major(x.data(), n, cin, h * w, x_cm.data());
  Tensor<T> cols({g.rows(), g.cols()});
  MapMat<T>(cols.data(), g.rows(), g.cols()).noalias() =
      ConstMapMat<T>(weight_->value.data(), cin, g.rows()).transpose() *
      ConstMapMat<T>(x_cm.data(), cin, n * h * w);
  Tensor<T> y({n, cout, oh, ow});
  col2im(cols.data(), g, y.data());
  if (bias_) {
    const std::size_t p = oh * ow;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < cout; ++c)
        for (std::size_t q = 0; q < p; ++q) y[(i * cout + c) * p + q] += bias_->value[c];
  }
  cache.saved = {std::move(x_cm)};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& x_cm = cache.saved.at(0);
  const Shape& ws = weight_->value.shape();
  const Shape& in = cache.input_shape;
  const std::size_t n = in[0], cin = in[1], hw = in[2] * in[3];
  const std::size_t cout = ws[1];
  const Geometry g = conv_geometry(grad_out.shape(), ws[2], stride_, padding_);

  Tensor<T> dcols({g.rows(), g.cols()});
  im2col(grad_out.data(), g, dcols.data());
  ConstMapMat<T> dc(dcols.data(), g.rows(), g.cols());

  MapMat<T>(weight_->grad.data(), cin, g.rows()).noalias() +=
      ConstMapMat<T>(x_cm.data(), cin, n * hw) * dc.transpose();
  if (bias_) {
    const std::size_t p = grad_out.dim(2) * grad_out.dim(3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < cout; ++c)
        for (std::size_t q = 0; q < p; ++q) bias_->grad[c] += grad_out[(i * cout + c) * p + q];
  }
  Tensor<T> dx_cm({cin, n * hw});
  MapMat<T>(dx_cm.data(), cin, n * hw).noalias() =
      ConstMapMat<T>(weight_->value.data(), cin, g.rows()) * dc;
  Tensor<T> dx(in);
  channel_major_to_batch(dx_cm.data(), n, cin, hw, dx.data());
  return dx;
}

// ------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(ParamHandle<T> gamma, ParamHandle<T> beta, ParamHandle<T> running_mean,
                        ParamHandle<T> running_var, double momentum, double eps)
    : gamma_(std::move(gamma)),
      beta_(std::move(beta)),
      running_mean_(std::move(running_mean)),
      running_var_(std::move(running_var)),
      momentum_(momentum),
      eps_(eps) {}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, Mode mode, LayerCache<T>& cache) {
  if (x.rank() < 2) throw std::invalid_argument("batch_norm expects rank >= 2 input");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t spatial = x.size() / (n * c);
  const std::size_t count = n * spatial;
  if (gamma_->value.size() != c) {
    throw std::invalid_argument("batch_norm: channel count mismatch for input " +
                                shape_to_string(x.shape()));
  }
  Tensor<T> y(x.shape());
  Tensor<T> xhat(x.shape());
  Tensor<T> inv_std({c});

  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean, var;
    if (mode == Mode::kInference) {
      mean = running_mean_->value[ch];
      var = running_var_->value[ch];
    } else {
      if (count < 2) throw std::invalid_argument("batch_norm needs >= 2 values per channel");
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x.data() + (i * c + ch) * spatial;
        for (std::size_t q = 0; q < spatial; ++q) sum += p[q];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x.data() + (i * c + ch) * spatial;
        for (std::size_t q = 0; q < spatial; ++q) {
          const double d = p[q] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(count);
      if (mode == Mode::kTrain) {
        const double unbiased = sq / static_cast<double>(count - 1);
        running_mean_->value[ch] =
            static_cast<T>((1.0 - momentum_) * running_mean_->value[ch] + momentum_ * mean);
        running_var_->value[ch] =
            static_cast<T>((1.0 - momentum_) * running_var_->value[ch] + momentum_ * unbiased);
      }
    }
    const double is = 1.0 / std::sqrt(var + eps_);
    inv_std[ch] = static_cast<T>(is);
    const double gm = gamma_->value[ch], bt = beta_->value[ch];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * spatial;
      for (std::size_t q = 0; q < spatial; ++q) {
        const double h = (x[off + q] - mean) * is;
        xhat[off + q] = static_cast<T>(h);
        y[off + q] = static_cast<T>(gm * h + bt);
      }
    }
  }
  cache.saved = {std::move(xhat), std::move(inv_std),
                 Tensor<T>({1}, mode == Mode::kInference ? T{1} : T{0})};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& xhat = cache.saved.at(0);
  const Tensor<T>& inv_std = cache.saved.at(1);
  const bool inference = cache.saved.at(2)[0] != T{0};
  const std::size_t n = xhat.dim(0), c = xhat.dim(1);
  const std::size_t spatial = xhat.size() / (n * c);
  const double count = static_cast<double>(n * spatial);
  Tensor<T> dx(xhat.shape());

  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * spatial;
      for (std::size_t q = 0; q < spatial; ++q) {
        sum_dy += grad_out[off + q];
        sum_dy_xhat += static_cast<double>(grad_out[off + q]) * xhat[off + q];
      }
    }
    gamma_->grad[ch] += static_cast<T>(sum_dy_xhat);
    beta_->grad[ch] += static_cast<T>(sum_dy);
    const double gm = gamma_->value[ch];
    const double is = inv_std[ch];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * spatial;
      for (std::size_t q = 0; q < spatial; ++q) {
        if (inference) {
          dx[off + q] = static_cast<T>(grad_out[off + q] * gm * is);
        } else {
          const double v = count * grad_out[off + q] - sum_dy - xhat[off + q] * sum_dy_xhat;
          dx[off + q] = static_cast<T>(gm * is * v / count);
        }
      }
    }
  }
  return dx;
}

// ----------------------------------------------------------- activations

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  Tensor<T> y = x;
  for (auto& v : y.storage()) v = v > T{0} ? v : T{0};
  cache.saved = {y};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& y = cache.saved.at(0);
  Tensor<T> dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y[i] > T{0})) dx[i] = T{0};
  return dx;
}

template <typename T>
Tensor<T> LeakyReLU<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  Tensor<T> y = x;
  const T slope = static_cast<T>(slope_);
  for (auto& v : y.storage()) v = v > T{0} ? v : v * slope;
  cache.saved = {x};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> LeakyReLU<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& x = cache.saved.at(0);
  const T slope = static_cast<T>(slope_);
  Tensor<T> dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > T{0})) dx[i] *= slope;
  return dx;
}

template <typename T>
Tensor<T> Tanh<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  Tensor<T> y = x;
  for (auto& v : y.storage()) v = std::tanh(v);
  cache.saved = {y};
  cache.input_shape = x.shape();
  return y;
}

template <typename T>
Tensor<T> Tanh<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  const Tensor<T>& y = cache.saved.at(0);
  Tensor<T> dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= T{1} - y[i] * y[i];
  return dx;
}

template <typename T>
Tensor<T> Reshape<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  Shape shape{x.dim(0)};
  shape.insert(shape.end(), tail_.begin(), tail_.end());
  cache.input_shape = x.shape();
  return x.reshaped(std::move(shape));
}

template <typename T>
Tensor<T> Reshape<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>& cache) {
  return grad_out.reshaped(cache.input_shape);
}

template <typename T>
Tensor<T> GradientReversal<T>::forward(const Tensor<T>& x, Mode, LayerCache<T>& cache) {
  cache.input_shape = x.shape();
  return gradient_reversal(x);
}

template <typename T>
Tensor<T> GradientReversal<T>::backward(const Tensor<T>& grad_out, const LayerCache<T>&) {
  return gradient_reversal_backward(grad_out);
}

// ------------------------------------------------------------ Sequential

template <typename T>
void Sequential<T>::add(std::string block, std::unique_ptr<Layer<T>> layer) {
  if (block_names_.empty() || block_names_.back() != block) block_names_.push_back(block);
  layer_block_.push_back(block_names_.size() - 1);
  layers_.push_back(std::move(layer));
}

template <typename T>
Trace<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  Trace<T> trace;
  trace.caches.resize(layers_.size());
  trace.block_outputs.resize(block_names_.size());
  Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, mode, trace.caches[i]);
    const bool last_of_block = i + 1 == layers_.size() || layer_block_[i + 1] != layer_block_[i];
    if (last_of_block) trace.block_outputs[layer_block_[i]] = h;
  }
  trace.output = std::move(h);
  return trace;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Trace<T>& trace, const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, trace.caches[i]);
  return g;
}

#define CROSSGAN_INSTANTIATE_LAYERS(T)  \
  template class Linear<T>;             \
  template class Conv2d<T>;             \
  template class ConvTranspose2d<T>;    \
  template class BatchNorm<T>;          \
  template class ReLU<T>;               \
  template class LeakyReLU<T>;          \
  template class Tanh<T>;               \
  template class Reshape<T>;            \
  template class GradientReversal<T>;   \
  template class Sequential<T>;

CROSSGAN_INSTANTIATE_LAYERS(float)
CROSSGAN_INSTANTIATE_LAYERS(double)

}  // namespace crossgan
