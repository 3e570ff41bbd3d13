// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "langloop/param.hpp"
#include "langloop/tape.hpp"

namespace langloop {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment accumulators are kept per registered
/// parameter; the step counter is shared and strictly increasing.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg = {});

  /// Registers a trainable parameter. Rejects frozen params, duplicate
  /// registration and duplicate names (names key the serialized state).
  void register_param(Param& p);

  /// Applies one update. Every gradient key must be a registered parameter.
  /// Parameters without a gradient entry are left untouched.
  void step(const GradMap& grads);

  std::uint64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }
  std::size_t num_params() const { return slots_.size(); }

  /// Persist/restore accumulators and the step counter. Loading requires the
  /// same parameters (by name and shape) to be registered.
  void save(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir);

 private:
  struct Slot {
    Param* param;
    Tensor m;
    Tensor v;
  };

  AdamConfig cfg_;
  std::vector<Slot> slots_;
  std::unordered_map<const Param*, std::size_t> index_;
  std::uint64_t step_count_ = 0;
};

}  // namespace langloop
