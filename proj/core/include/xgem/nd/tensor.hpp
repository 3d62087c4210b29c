#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace xgem::nd {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles. Immutable once constructed; every
/// constructor rejects non-finite entries with NumericError.
///
/// Rank 0 (shape {}) is a scalar holding one element. Most model code uses
/// rank-2 tensors laid out as [rows x cols].
class Tensor {
 public:
  Tensor();  // scalar 0
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor vector(std::vector<double> values);
  /// [rows x cols] from nested rows; all rows must share a length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::vector<double> values);  // [1 x n]

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  /// Rows/cols of a rank-2 tensor. A rank-1 tensor of length n reads as [1 x n].
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  Tensor reshaped(Shape shape) const;
  /// Row r of a rank-2 tensor as a rank-1 tensor.
  Tensor row_at(std::size_t r) const;
  /// Rows [first, first + count) of a rank-2 tensor.
  Tensor rows_slice(std::size_t first, std::size_t count) const;
  /// Rows selected by index, in the given order.
  Tensor gather_rows(std::span<const std::size_t> indices) const;

  /// Moves the buffer out; the tensor is left as an empty scalar-shaped husk.
  std::vector<double> release() &&;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Stacks equal-length rank-1 (or [1 x n]) tensors into [count x n].
Tensor stack_rows(std::span<const Tensor> rows);

double l2_distance(const Tensor& a, const Tensor& b);
std::size_t argmax(std::span<const double> values);

}  // namespace xgem::nd
