// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/rng.hpp"

#include <cmath>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t Rng::hash_bytes(std::string_view s) {
  // FNV-1a 64.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

Rng Rng::fork(std::string_view label) const {
  return Rng(mix64(seed_ ^ mix64(hash_bytes(label) + kGamma)));
}

Rng Rng::fork(std::string_view label, std::string_view sub) const {
  return fork(label).fork(sub);
}

Rng Rng::fork(std::string_view label, std::uint64_t sub) const {
  Rng child = fork(label);
  return Rng(mix64(child.seed_ ^ mix64(sub + kGamma)));
}

std::uint64_t Rng::next_u64() {
  ++position_;
  return mix64(seed_ + position_ * kGamma);
}

double Rng::uniform() {
  // 53 random bits -> [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) {
    throw Error("Rng::below(0)");
  }
  // Modulo rejection keeps the draw unbiased and platform-independent.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % n;
}

}  // namespace langloop
