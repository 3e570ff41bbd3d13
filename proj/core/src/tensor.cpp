// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/tensor.hpp"

#include <cmath>
#include <sstream>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) {
      throw ShapeError("tensor dimensions must be positive");
    }
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  data_.assign(checked_numel(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    t.at(i, i) = 1.0;
  }
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_str());
  }
  return shape_[axis];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i > 0) os << " x ";
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

double Tensor::scalar_value() const {
  if (numel() != 1) {
    throw ShapeError("scalar_value on tensor of shape " + shape_str());
  }
  return data_[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return const_cast<Tensor*>(this)->at(r, c);
}

double& Tensor::at(std::size_t r, std::size_t c) {
  if (rank() != 2) {
    throw ShapeError("2-d access on tensor of shape " + shape_str());
  }
  return data_[r * shape_[1] + c];
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::add_in_place(const Tensor& other) {
  if (!same_shape(other)) {
    throw ShapeError("add: shape mismatch " + shape_str() + " vs " +
                     other.shape_str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void Tensor::scale_in_place(double s) {
  for (double& x : data_) x *= s;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  // [m x n] * [n x p] -> [m x p]; a vector right operand [n] acts as [n x 1].
  if (a.rank() != 2 || (b.rank() != 2 && b.rank() != 1)) {
    throw ShapeError("matmul: expected matrix operands, got " + a.shape_str() +
                     " and " + b.shape_str());
  }
  const std::size_t m = a.dim(0);
  const std::size_t n = a.dim(1);
  const bool vec = b.rank() == 1;
  const std::size_t bn = vec ? b.dim(0) : b.dim(0);
  const std::size_t p = vec ? 1 : b.dim(1);
  if (n != bn) {
    throw ShapeError("matmul: inner dimensions disagree: " + a.shape_str() +
                     " vs " + b.shape_str());
  }
  Tensor out(vec ? std::vector<std::size_t>{m} : std::vector<std::size_t>{m, p});
  const double* ad = a.data();
  const double* bd = b.data();
  double* od = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double av = ad[i * n + k];
      if (av == 0.0) continue;
      const double* brow = bd + k * p;
      double* orow = od + i * p;
      for (std::size_t j = 0; j < p; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
  return out;
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) {
    throw ShapeError("transpose: expected matrix, got " + m.shape_str());
  }
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out.at(j, i) = m.at(i, j);
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out.add_in_place(b);
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("sub: shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  out.scale_in_place(s);
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff: shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

void check_finite(const Tensor& t, const char* context) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw Error(std::string("non-finite value produced by ") + context);
    }
  }
}

}  // namespace langloop
