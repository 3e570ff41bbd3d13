// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace langloop {

/// Dense row-major tensor of 64-bit reals. Rank 0 (shape {}) is a scalar
/// with exactly one element; all dimensions must be positive.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor identity(std::size_t n);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);      // shape [n]
  static Tensor row(std::vector<double> values);          // shape [1 x n]
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return data_.size(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  bool is_scalar() const { return shape_.empty(); }
  double scalar_value() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // Rank-2 element access.
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  void fill(double v);
  void add_in_place(const Tensor& other);
  void scale_in_place(double s);

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

double max_abs_diff(const Tensor& a, const Tensor& b);

/// Throws Error if any entry is NaN or infinite.
void check_finite(const Tensor& t, const char* context);

}  // namespace langloop
