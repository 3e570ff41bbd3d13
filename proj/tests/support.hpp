// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "langloop/param.hpp"
#include "langloop/rng.hpp"
#include "langloop/tensor.hpp"

namespace langloop::test {

/// Central finite differences of `loss()` w.r.t. every entry of `param`.
/// The callback must recompute the loss from the parameter's current value
/// (and be deterministic across calls).
inline Tensor fd_gradient(const std::function<double()>& loss, Param& param,
                          double step = 1e-5) {
  Tensor grad(param.value.shape());
  for (std::size_t i = 0; i < param.value.numel(); ++i) {
    const double saved = param.value[i];
    param.value[i] = saved + step;
    const double up = loss();
    param.value[i] = saved - step;
    const double down = loss();
    param.value[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|): relative for large entries,
/// absolute for small ones.
inline double max_rel_error(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

/// Naive triple-loop product, independent of the library path.
inline Tensor matmul_reference(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.shape()[0], n = a.shape()[1], p = b.shape()[1];
  Tensor out({m, p});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += a.at(i, k) * b.at(k, j);
      }
      out.at(i, j) = acc;
    }
  }
  return out;
}

/// Singular values via one-sided Jacobi; descending. Small matrices only.
inline std::vector<double> singular_values(const Tensor& m) {
  std::size_t rows = m.shape()[0], cols = m.shape()[1];
  // Work on the tall orientation so we orthogonalize at most `cols` columns.
  Tensor a = rows >= cols ? m : transpose(m);
  rows = a.shape()[0];
  cols = a.shape()[1];
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          app += a.at(r, p) * a.at(r, p);
          aqq += a.at(r, q) * a.at(r, q);
          apq += a.at(r, p) * a.at(r, q);
        }
        off = std::max(off, std::abs(apq));
        if (std::abs(apq) < 1e-15) continue;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double vp = a.at(r, p), vq = a.at(r, q);
          a.at(r, p) = c * vp - s * vq;
          a.at(r, q) = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-14) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += a.at(r, c) * a.at(r, c);
    sv[c] = std::sqrt(norm);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& label) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("langloop_test_" + label + "_" + std::to_string(++counter) + "_" +
             std::to_string(
                 static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this))));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace langloop::test
