// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/lora.hpp"

#include <algorithm>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

LoraAdapter init_adapter(Rng& rng, const std::string& target, std::size_t d,
                         std::size_t k, std::size_t rank, double alpha,
                         double dropout_rate) {
  if (rank < 1) {
    throw ConfigError("lora: rank must be >= 1");
  }
  if (rank > std::min(d, k)) {
    throw ConfigError("lora: rank " + std::to_string(rank) +
                      " exceeds min(d, k) = " +
                      std::to_string(std::min(d, k)) + " for target '" +
                      target + "'");
  }
  if (alpha <= 0.0) {
    throw ConfigError("lora: alpha must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("lora: dropout rate must be in [0, 1)");
  }
  LoraAdapter adapter;
  adapter.target = target;
  adapter.rank = rank;
  adapter.alpha = alpha;
  adapter.dropout_rate = dropout_rate;
  adapter.a = Param{target + ".lora_a", Tensor({rank, k}), false};
  adapter.b = Param{target + ".lora_b", Tensor({d, rank}), false};
  for (double& v : adapter.a.value.values()) {
    v = rng.normal(0.0, 0.02);
  }
  return adapter;
}

namespace {

void check_adapter_shapes(const Tensor& w0, const LoraAdapter& adapter) {
  if (w0.rank() != 2) {
    throw ShapeError("lora: base matrix must be rank 2, got " + w0.shape_str());
  }
  if (adapter.out_dim() != w0.dim(0) || adapter.in_dim() != w0.dim(1)) {
    throw ShapeError("lora: adapter for '" + adapter.target + "' has shape [" +
                     std::to_string(adapter.out_dim()) + " x " +
                     std::to_string(adapter.in_dim()) +
                     "], base is " + w0.shape_str());
  }
}

}  // namespace

Tensor lora_delta(const LoraAdapter& adapter) {
  if (adapter.b.value.dim(1) != adapter.a.value.dim(0)) {
    throw ShapeError("lora_delta: factor shapes disagree: " +
                     adapter.b.value.shape_str() + " vs " +
                     adapter.a.value.shape_str());
  }
  return matmul(adapter.b.value, adapter.a.value);
}

Tensor lora_forward(const Tensor& w0, const LoraAdapter& adapter,
                    const Tensor& x, bool train_mode, Rng* dropout_rng) {
  check_adapter_shapes(w0, adapter);
  if (x.rank() != 1 || x.dim(0) != w0.dim(1)) {
    throw ShapeError("lora_forward: input shape " + x.shape_str() +
                     " does not match base " + w0.shape_str());
  }
  Tensor x_adapter = x;
  if (train_mode && adapter.dropout_rate > 0.0) {
    if (dropout_rng == nullptr) {
      throw Error("lora_forward: train mode with dropout needs an rng");
    }
    const double keep = 1.0 - adapter.dropout_rate;
    for (double& v : x_adapter.values()) {
      v = dropout_rng->uniform() < keep ? v / keep : 0.0;
    }
  }
  Tensor h = matmul(w0, x);
  Tensor low = matmul(adapter.a.value, x_adapter);
  Tensor up = matmul(adapter.b.value, low);
  up.scale_in_place(adapter.scaling());
  h.add_in_place(up);
  return h;
}

Tensor merge(const Tensor& w0, const LoraAdapter& adapter) {
  check_adapter_shapes(w0, adapter);
  Tensor delta = lora_delta(adapter);
  delta.scale_in_place(adapter.scaling());
  return add(w0, delta);
}

LoraAdapter* AdapterSet::find(const std::string& target) {
  for (LoraAdapter& a : adapters) {
    if (a.target == target) return &a;
  }
  return nullptr;
}

const LoraAdapter* AdapterSet::find(const std::string& target) const {
  return const_cast<AdapterSet*>(this)->find(target);
}

std::vector<Param*> AdapterSet::params() {
  std::vector<Param*> out;
  for (LoraAdapter& a : adapters) {
    out.push_back(&a.a);
    out.push_back(&a.b);
  }
  return out;
}

std::size_t AdapterSet::trainable_count() const {
  std::size_t n = 0;
  for (const LoraAdapter& a : adapters) n += a.trainable_count();
  return n;
}

AdapterSet AdapterSet::clone() const { return *this; }

AdapterSet init_adapter_set(Rng& rng, const std::vector<std::string>& targets,
                            std::size_t d, std::size_t k, std::size_t rank,
                            double alpha, double dropout_rate) {
  AdapterSet set;
  for (const std::string& target : targets) {
    set.adapters.push_back(
        init_adapter(rng, target, d, k, rank, alpha, dropout_rate));
  }
  return set;
}

void AdapterRegistry::set_shared(std::shared_ptr<AdapterSet> set) {
  if (mode_ != AdapterSharing::kShared) {
    throw ConfigError("adapter registry: set_shared in non-shared mode");
  }
  shared_ = std::move(set);
}

void AdapterRegistry::add_task_set(const std::string& task_id,
                                   std::shared_ptr<AdapterSet> set) {
  if (mode_ != AdapterSharing::kNonShared) {
    throw ConfigError("adapter registry: add_task_set in shared mode");
  }
  if (per_task_.contains(task_id)) {
    throw ConfigError("adapter registry: duplicate task '" + task_id + "'");
  }
  per_task_.emplace(task_id, std::move(set));
}

AdapterSet& AdapterRegistry::for_task(const std::string& task_id) {
  if (mode_ == AdapterSharing::kShared) {
    if (!shared_) throw Error("adapter registry: shared set not installed");
    return *shared_;
  }
  auto it = per_task_.find(task_id);
  if (it == per_task_.end()) {
    throw Error("adapter registry: no adapter for task '" + task_id + "'");
  }
  return *it->second;
}

const AdapterSet& AdapterRegistry::for_task(const std::string& task_id) const {
  return const_cast<AdapterRegistry*>(this)->for_task(task_id);
}

std::size_t AdapterRegistry::num_sets() const {
  return mode_ == AdapterSharing::kShared ? (shared_ ? 1 : 0)
                                          : per_task_.size();
}

void save_adapter_set(const std::filesystem::path& dir, const AdapterSet& set,
                      const std::string& task_id, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "langloop-adapters-v1";
  manifest["task_id"] = task_id;
  manifest["seed"] = seed;
  nlohmann::json entries = nlohmann::json::array();
  for (const LoraAdapter& a : set.adapters) {
    nlohmann::json e;
    e["target"] = a.target;
    e["rank"] = a.rank;
    e["alpha"] = a.alpha;
    e["dropout_rate"] = a.dropout_rate;
    entries.push_back(e);
    save_tensor(dir / (a.target + ".lora_a.bin"), a.a.value, a.a.name);
    save_tensor(dir / (a.target + ".lora_b.bin"), a.b.value, a.b.name);
  }
  manifest["adapters"] = entries;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

AdapterSet load_adapter_set(const std::filesystem::path& dir,
                            std::string* task_id) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad adapter manifest in " + dir.string() + ": " + e.what());
  }
  if (task_id != nullptr) {
    *task_id = manifest.at("task_id").get<std::string>();
  }
  AdapterSet set;
  for (const auto& e : manifest.at("adapters")) {
    LoraAdapter a;
    a.target = e.at("target").get<std::string>();
    a.rank = e.at("rank").get<std::size_t>();
    a.alpha = e.at("alpha").get<double>();
    a.dropout_rate = e.at("dropout_rate").get<double>();
    a.a = Param{a.target + ".lora_a",
                load_tensor(dir / (a.target + ".lora_a.bin")), false};
    a.b = Param{a.target + ".lora_b",
                load_tensor(dir / (a.target + ".lora_b.bin")), false};
    set.adapters.push_back(std::move(a));
  }
  return set;
}

}  // namespace langloop
