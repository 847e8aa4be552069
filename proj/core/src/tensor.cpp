// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/tensor.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "unguide/errors.hpp"

namespace unguide {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.size() > 2) {
    throw ShapeError("tensors are limited to rank 2, got " + shape_string(shape));
  }
  // An empty batch of rows is legal; an empty feature axis is not.
  if (shape.size() == 2 && shape[1] == 0) {
    throw ShapeError("zero-width tensor " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " does not hold " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::scalar(float value) { return Tensor(Shape{}, std::vector<float>{value}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<float> values) {
  return Tensor(Shape{rows, cols}, std::vector<float>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0F;
  return t;
}

std::size_t Tensor::rows() const noexcept {
  return shape_.empty() ? 1 : shape_[0];
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 1;
  return shape_.size() == 1 ? shape_[0] : shape_[1];
}

std::span<float> Tensor::row(std::size_t r) {
  const std::size_t c = rank() == 2 ? cols() : size();
  return {data_.data() + r * c, c};
}

std::span<const float> Tensor::row(std::size_t r) const {
  const std::size_t c = rank() == 2 ? cols() : size();
  return {data_.data() + r * c, c};
}

float Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

bool bit_equal(const Tensor& a, const Tensor& b) noexcept {
  return a.shape() == b.shape() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner dimensions differ " +
                     shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor c(Shape{m, n});
  const float* pa = a.data();
  const float* pb = b.data();
  float* pc = c.data();
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const float* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
    }
    float* crow = pc + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = static_cast<float>(acc[j]);
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor t(Shape{a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: inner dimensions differ " +
                     shape_string(a.shape()) + " x " + shape_string(b.shape()) +
                     "^T");
  }
  return matmul(a, transpose(b));
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  const std::size_t k = a.rows();
  const std::size_t m = a.cols();
  const std::size_t n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul_tn: inner dimensions differ " +
                     shape_string(a.shape()) + "^T x " + shape_string(b.shape()));
  }
  Tensor c(Shape{m, n});
  const float* pa = a.data();
  const float* pb = b.data();
  float* pc = c.data();
  std::vector<double> acc(m * n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const float* brow = pb + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = pa[p * m + i];
      double* arow = acc.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) arow[j] += api * brow[j];
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) pc[i] = static_cast<float>(acc[i]);
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Tensor scale(const Tensor& a, float s) {
  Tensor c = a;
  for (float& v : c.values()) v *= s;
  return c;
}

Tensor axpy(const Tensor& a, float s, const Tensor& b) {
  require_same_shape(a, b, "axpy");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += s * b[i];
  return c;
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (float v : a.values()) s += v;
  return s;
}

double squared_norm(const Tensor& a) {
  double s = 0.0;
  for (float v : a.values()) s += static_cast<double>(v) * v;
  return s;
}

double l2_norm(const Tensor& a) { return std::sqrt(squared_norm(a)); }

double row_squared_norm(const Tensor& a, std::size_t r) {
  double s = 0.0;
  for (float v : a.row(r)) s += static_cast<double>(v) * v;
  return s;
}

Tensor vstack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("vstack: no inputs");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    require_matrix(p, "vstack");
    if (p.cols() != cols) throw ShapeError("vstack: column counts differ");
    rows += p.rows();
  }
  std::vector<float> data;
  data.reserve(rows * cols);
  for (const Tensor& p : parts) {
    data.insert(data.end(), p.values().begin(), p.values().end());
  }
  return Tensor(Shape{rows, cols}, std::move(data));
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_rows");
  if (begin > end || end > a.rows()) {
    throw ShapeError("slice_rows: range out of bounds");
  }
  const std::size_t c = a.cols();
  return Tensor(Shape{end - begin, c},
                std::vector<float>(a.data() + begin * c, a.data() + end * c));
}

std::uint32_t checksum(const Tensor& a) {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (std::size_t d : a.shape()) {
    const auto dim = static_cast<std::uint64_t>(d);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(&dim), sizeof(dim));
  }
  crc = crc32(crc, reinterpret_cast<const Bytef*>(a.data()),
              static_cast<uInt>(a.size() * sizeof(float)));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace unguide
