// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace unguide {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float32 tensor of rank 1 or 2 (rank 0 is used for scalars).
///
/// Tensors are plain values: copying duplicates the storage. Every dimension
/// must be positive, except that an empty batch (0 rows) is allowed.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0F);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor scalar(float value);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<float> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Leading dimension (1 for scalars).
  std::size_t rows() const noexcept;
  /// Trailing dimension for rank 2, the length for rank 1, 1 for scalars.
  std::size_t cols() const noexcept;

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  std::span<float> row(std::size_t r);
  std::span<const float> row(std::size_t r) const;

  float item() const;
  bool all_finite() const noexcept;
  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Bitwise equality of shape and payload (distinguishes -0.0 from 0.0).
bool bit_equal(const Tensor& a, const Tensor& b) noexcept;

/// Throws ShapeError unless the shapes match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Dense kernels. Each output element accumulates in a fixed order that does
// not depend on the number of rows, so batched and row-by-row evaluation agree
// bit-for-bit.
Tensor matmul(const Tensor& a, const Tensor& b);     // a[m,k] * b[k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a[m,k] * b[n,k]^T
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a[k,m]^T * b[k,n]
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
/// a + s * b
Tensor axpy(const Tensor& a, float s, const Tensor& b);

double sum(const Tensor& a);
double squared_norm(const Tensor& a);
double l2_norm(const Tensor& a);
/// Sum of squares of a row, in double.
double row_squared_norm(const Tensor& a, std::size_t r);

/// Stacks rank-2 tensors with equal column counts along the row axis.
Tensor vstack(std::span<const Tensor> parts);
/// Copies rows [begin, end) of a rank-2 tensor.
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);

/// 32-bit content hash of shape and payload, used to detect mutation.
std::uint32_t checksum(const Tensor& a);

}  // namespace unguide
