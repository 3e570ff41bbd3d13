// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace langloop {

/// Counter-based deterministic random stream (splitmix64 finalizer over
/// seed + counter). Identical (seed, position) yields identical u64 output
/// on every platform; floating-point derivations additionally depend on the
/// host libm. Streams for independent purposes are obtained with fork(), so
/// adding a consumer never perturbs the others.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  /// Derive an independent child stream from a purpose label.
  Rng fork(std::string_view label) const;
  Rng fork(std::string_view label, std::string_view sub) const;
  Rng fork(std::string_view label, std::uint64_t sub) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; consumes two u64 draws.
  double normal();
  double normal(double mean, double stddev);

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }
  void set_position(std::uint64_t p) { position_ = p; }

  static std::uint64_t hash_bytes(std::string_view s);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t position_ = 0;
};

}  // namespace langloop
