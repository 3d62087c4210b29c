#include "xgem/nd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "xgem/error.hpp"

namespace xgem::nd {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_finite(std::span<const double> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw NumericError("non-finite tensor entry at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

Tensor::Tensor() : data_(1, 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                     " values");
  }
  check_finite(data_);
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  const auto n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::row(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() == 1) return 1;
  throw ShapeError("rows() needs rank 1 or 2, got " + to_string(shape_));
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  throw ShapeError("cols() needs rank 1 or 2, got " + to_string(shape_));
}

double Tensor::at(std::size_t r, std::size_t c) const {
  const auto nc = cols();
  if (r >= rows() || c >= nc) throw ShapeError("index out of range");
  return data_[r * nc + c];
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

Tensor Tensor::row_at(std::size_t r) const { return rows_slice(r, 1).reshaped({cols()}); }

Tensor Tensor::rows_slice(std::size_t first, std::size_t count) const {
  const auto nr = rows(), nc = cols();
  if (first + count > nr) throw ShapeError("row slice out of range");
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * nc),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * nc));
  return Tensor({count, nc}, std::move(out));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
  const auto nr = rows(), nc = cols();
  std::vector<double> out;
  out.reserve(indices.size() * nc);
  for (auto i : indices) {
    if (i >= nr) throw ShapeError("gather index out of range");
    out.insert(out.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * nc),
               data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * nc));
  }
  return Tensor({indices.size(), nc}, std::move(out));
}

std::vector<double> Tensor::release() && {
  shape_.clear();
  auto out = std::move(data_);
  data_.assign(1, 0.0);
  return out;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) return Tensor({0, 0}, {});
  const auto n = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw ShapeError("stack_rows: ragged rows");
    data.insert(data.end(), r.values().begin(), r.values().end());
  }
  return Tensor({rows.size(), n}, std::move(data));
}

double l2_distance(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("l2_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace xgem::nd
