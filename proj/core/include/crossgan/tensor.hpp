#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crossgan {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape);

/// Dense row-major array with a runtime shape.
///
/// Images use (batch, channels, height, width); dense activations use
/// (batch, features).
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor data size " +
                                  std::to_string(data_.size()) +
                                  " does not match shape " +
                                  shape_to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Rows of the leading axis, each `size() / dim(0)` elements long.
  std::size_t row_size() const { return shape_.empty() ? 0 : size() / shape_[0]; }
  std::span<T> row(std::size_t i) {
    return std::span<T>(data_).subspan(i * row_size(), row_size());
  }
  std::span<const T> row(std::size_t i) const {
    return std::span<const T>(data_).subspan(i * row_size(), row_size());
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor reshaped(Shape shape) const& {
    if (shape_size(shape) != size()) {
      throw std::invalid_argument("cannot reshape " + shape_to_string(shape_) +
                                  " to " + shape_to_string(shape));
    }
    return Tensor(std::move(shape), data_);
  }
  Tensor reshaped(Shape shape) && {
    if (shape_size(shape) != size()) {
      throw std::invalid_argument("cannot reshape " + shape_to_string(shape_) +
                                  " to " + shape_to_string(shape));
    }
    shape_ = std::move(shape);
    return std::move(*this);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Concatenates tensors along the leading (batch) axis.
template <typename T>
Tensor<T> concat_batch(std::initializer_list<const Tensor<T>*> parts) {
  if (parts.size() == 0) return {};
  const Tensor<T>& first = **parts.begin();
  Shape shape = first.shape();
  std::size_t rows = 0;
  for (const auto* p : parts) {
    if (p->rank() != shape.size() ||
        !std::equal(shape.begin() + 1, shape.end(), p->shape().begin() + 1)) {
      throw std::invalid_argument("concat_batch: incompatible shapes " +
                                  shape_to_string(shape) + " and " +
                                  shape_to_string(p->shape()));
    }
    rows += p->dim(0);
  }
  shape[0] = rows;
  std::vector<T> data;
  data.reserve(shape_size(shape));
  for (const auto* p : parts) {
    data.insert(data.end(), p->storage().begin(), p->storage().end());
  }
  return Tensor<T>(std::move(shape), std::move(data));
}

/// Rows [begin, end) of the leading axis.
template <typename T>
Tensor<T> slice_batch(const Tensor<T>& t, std::size_t begin, std::size_t end) {
  Shape shape = t.shape();
  shape[0] = end - begin;
  const std::size_t stride = t.row_size();
  std::vector<T> data(t.storage().begin() + begin * stride,
                      t.storage().begin() + end * stride);
  return Tensor<T>(std::move(shape), std::move(data));
}

}  // namespace crossgan
