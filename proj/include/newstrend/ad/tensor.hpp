#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "newstrend/error.hpp"

namespace newstrend::ad {

// Tensor extents, rank 1..4, stored inline.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims) {
    if (dims.size() == 0 || dims.size() > kMaxRank) {
      throw ShapeError("shape rank must be in [1, 4]");
    }
    for (std::size_t d : dims) {
      if (d == 0) throw ShapeError("shape extents must be positive");
      dims_[rank_++] = d;
    }
  }
  explicit Shape(std::span<const std::size_t> dims) {
    if (dims.empty() || dims.size() > kMaxRank) {
      throw ShapeError("shape rank must be in [1, 4]");
    }
    for (std::size_t d : dims) {
      if (d == 0) throw ShapeError("shape extents must be positive");
      dims_[rank_++] = d;
    }
  }

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t elements() const {
    std::size_t n = rank_ == 0 ? 0 : 1;
    for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
    return n;
  }
  std::size_t last() const { return dims_[rank_ - 1]; }
  std::span<const std::size_t> dims() const { return {dims_.data(), rank_}; }

  std::string str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rank_; ++i) {
      if (i) s += ",";
      s += std::to_string(dims_[i]);
    }
    return s + "]";
  }

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ &&
           std::equal(a.dims_.begin(), a.dims_.begin() + a.rank_, b.dims_.begin());
  }

 private:
  std::array<std::size_t, kMaxRank> dims_{};
  std::size_t rank_ = 0;
};

// Dense row-major float64 array.
class TensorValue {
 public:
  TensorValue() = default;

  explicit TensorValue(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.elements(), fill) {}

  TensorValue(Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.elements()) {
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  static TensorValue scalar(double x) { return TensorValue(Shape{1, 1}, std::vector<double>{x}); }

  // A [1, n] row vector.
  static TensorValue row(std::span<const double> values) {
    return TensorValue(Shape{1, values.size()}, std::vector<double>(values.begin(), values.end()));
  }
  static TensorValue row(std::initializer_list<double> values) {
    return row(std::span<const double>(values.begin(), values.size()));
  }

  static TensorValue matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return TensorValue(Shape{rows, cols}, std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rows() const { return shape_.rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.last(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double item() const {
    if (data_.size() != 1) throw ShapeError("item() on non-scalar shape " + shape_.str());
    return data_[0];
  }

  void fill(double x) { std::fill(data_.begin(), data_.end(), x); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  friend bool operator==(const TensorValue& a, const TensorValue& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace newstrend::ad
