// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "langloop/param.hpp"
#include "langloop/rng.hpp"
#include "langloop/tensor.hpp"

namespace langloop {

/// Low-rank additive update for one base matrix W0 [d x k]:
/// delta = B A with B [d x r], A [r x k], applied as (alpha / r) * B A x.
struct LoraAdapter {
  std::string target;  // name of the adapted base matrix, e.g. "w_q"
  Param a;             // [r x k]
  Param b;             // [d x r]
  std::size_t rank = 0;
  double alpha = 0.0;
  double dropout_rate = 0.0;

  std::size_t out_dim() const { return b.value.dim(0); }
  std::size_t in_dim() const { return a.value.dim(1); }
  double scaling() const { return alpha / static_cast<double>(rank); }
  std::size_t trainable_count() const { return a.numel() + b.numel(); }
};

/// A is gaussian(0, 0.02^2), B is zero, so a fresh adapter is a no-op.
/// Rejects rank < 1 and rank > min(d, k).
LoraAdapter init_adapter(Rng& rng, const std::string& target, std::size_t d,
                         std::size_t k, std::size_t rank, double alpha,
                         double dropout_rate = 0.0);

/// Unscaled delta B A -> [d x k].
Tensor lora_delta(const LoraAdapter& adapter);

/// h = W0 x + (alpha / r) * B (A x'), with x' = dropout(x) in train mode.
Tensor lora_forward(const Tensor& w0, const LoraAdapter& adapter,
                    const Tensor& x, bool train_mode = false,
                    Rng* dropout_rng = nullptr);

/// W' = W0 + (alpha / r) * B A; forward with W' and no adapter matches
/// lora_forward in eval mode.
Tensor merge(const Tensor& w0, const LoraAdapter& adapter);

/// One adapter per adapted base matrix; the unit of training and checkpointing
/// for the adapter-based methods.
struct AdapterSet {
  std::vector<LoraAdapter> adapters;

  LoraAdapter* find(const std::string& target);
  const LoraAdapter* find(const std::string& target) const;
  std::vector<Param*> params();
  std::size_t trainable_count() const;
  AdapterSet clone() const;
};

/// Builds one adapter per target name, all with the same rank/alpha/dropout.
AdapterSet init_adapter_set(Rng& rng, const std::vector<std::string>& targets,
                            std::size_t d, std::size_t k, std::size_t rank,
                            double alpha, double dropout_rate);

enum class AdapterSharing { kShared, kNonShared };

/// Task id -> adapter set. Shared mode holds exactly one set, mapped to every
/// task; non-shared mode holds one disjoint set per task.
class AdapterRegistry {
 public:
  explicit AdapterRegistry(AdapterSharing mode) : mode_(mode) {}

  AdapterSharing mode() const { return mode_; }

  /// Shared mode only: installs the single set.
  void set_shared(std::shared_ptr<AdapterSet> set);
  /// Non-shared mode only: installs a per-task set.
  void add_task_set(const std::string& task_id, std::shared_ptr<AdapterSet> set);

  AdapterSet& for_task(const std::string& task_id);
  const AdapterSet& for_task(const std::string& task_id) const;
  std::size_t num_sets() const;

 private:
  AdapterSharing mode_;
  std::shared_ptr<AdapterSet> shared_;
  std::map<std::string, std::shared_ptr<AdapterSet>> per_task_;
};

/// Adapter checkpoint: tensor files plus a manifest recording target, rank,
/// alpha and task id.
void save_adapter_set(const std::filesystem::path& dir, const AdapterSet& set,
                      const std::string& task_id, std::uint64_t seed);
AdapterSet load_adapter_set(const std::filesystem::path& dir,
                            std::string* task_id = nullptr);

}  // namespace langloop
