// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/optimizer.hpp"

#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

AdamOptimizer::AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {
  if (cfg_.learning_rate <= 0.0) {
    throw ConfigError("adam: learning rate must be positive");
  }
}

void AdamOptimizer::register_param(Param& p) {
  if (p.frozen) {
    throw ConfigError("adam: cannot register frozen parameter '" + p.name + "'");
  }
  if (index_.contains(&p)) {
    throw ConfigError("adam: parameter '" + p.name + "' registered twice");
  }
  for (const Slot& s : slots_) {
    if (s.param->name == p.name) {
      throw ConfigError("adam: duplicate parameter name '" + p.name + "'");
    }
  }
  index_.emplace(&p, slots_.size());
  slots_.push_back(Slot{&p, Tensor::zeros(p.value.shape()),
                        Tensor::zeros(p.value.shape())});
}

void AdamOptimizer::step(const GradMap& grads) {
  for (const auto& [param, grad] : grads) {
    if (!index_.contains(param)) {
      throw Error("adam: gradient for unregistered tensor '" + param->name +
                  "'");
    }
    if (!grad.same_shape(param->value)) {
      throw ShapeError("adam: gradient shape " + grad.shape_str() +
                       " does not match parameter '" + param->name + "' " +
                       param->value.shape_str());
    }
  }
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  for (Slot& slot : slots_) {
    auto it = grads.find(slot.param);
    if (it == grads.end()) continue;
    const Tensor& g = it->second;
    Tensor& value = slot.param->value;
    for (std::size_t i = 0; i < value.numel(); ++i) {
      slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * g[i];
      slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = slot.m[i] / bc1;
      const double vhat = slot.v[i] / bc2;
      value[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
    check_finite(value, "adam_step");
  }
}

void AdamOptimizer::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "langloop-adam-v1";
  manifest["step_count"] = step_count_;
  manifest["learning_rate"] = cfg_.learning_rate;
  manifest["beta1"] = cfg_.beta1;
  manifest["beta2"] = cfg_.beta2;
  manifest["epsilon"] = cfg_.epsilon;
  std::vector<std::string> names;
  for (const Slot& s : slots_) names.push_back(s.param->name);
  manifest["params"] = names;
  write_file(dir / "optimizer.json", manifest.dump(2) + "\n");
  for (const Slot& s : slots_) {
    save_tensor(dir / (s.param->name + ".m.bin"), s.m, s.param->name + ".m");
    save_tensor(dir / (s.param->name + ".v.bin"), s.v, s.param->name + ".v");
  }
}

void AdamOptimizer::load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "optimizer.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad optimizer manifest in " + dir.string() + ": " + e.what());
  }
  const auto names = manifest.at("params").get<std::vector<std::string>>();
  if (names.size() != slots_.size()) {
    throw ConfigError("adam: optimizer state has " +
                      std::to_string(names.size()) + " params, expected " +
                      std::to_string(slots_.size()));
  }
  std::unordered_set<std::string> saved(names.begin(), names.end());
  for (Slot& s : slots_) {
    if (!saved.contains(s.param->name)) {
      throw ConfigError("adam: no saved state for parameter '" +
                        s.param->name + "'");
    }
    Tensor m = load_tensor(dir / (s.param->name + ".m.bin"));
    Tensor v = load_tensor(dir / (s.param->name + ".v.bin"));
    if (!m.same_shape(s.param->value) || !v.same_shape(s.param->value)) {
      throw ShapeError("adam: saved state shape mismatch for '" +
                       s.param->name + "'");
    }
    s.m = std::move(m);
    s.v = std::move(v);
  }
  step_count_ = manifest.at("step_count").get<std::uint64_t>();
}

}  // namespace langloop
