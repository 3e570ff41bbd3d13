// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace langloop {

/// One completed training step: the language trained, the test F1 on every
/// language of the experiment (aligned with RunLog::order), the validation
/// trajectory and the stopping outcome.
struct StepRecord {
  int step = 0;
  std::string lang;
  std::vector<double> test_f1;
  std::vector<double> valid_f1;
  int epochs_used = 0;
  bool early_stopped = false;
};

/// Persisted trace of one training run (regime x order x seed). JSON-lines:
/// a header record followed by one record per completed step.
struct RunLog {
  std::string regime;
  std::string order_id;
  std::uint64_t seed = 0;
  /// Evaluation column order. For sequential regimes this is the training
  /// order; for order-free regimes it is the experiment's language list.
  std::vector<std::string> order;
  std::vector<StepRecord> steps;

  std::size_t num_languages() const { return order.size(); }
  /// Step index at which `lang` was trained; -1 when absent.
  int step_of(const std::string& lang) const;

  /// Checks row lengths, F1 range, step numbering, and (for sequential
  /// regimes) that languages were consumed strictly in `order`.
  void validate() const;

  std::string to_jsonl() const;
  static RunLog from_jsonl(const std::string& text, const std::string& name);

  void save(const std::filesystem::path& path) const;
  static RunLog load(const std::filesystem::path& path);
};

/// Regimes whose step sequence must follow `order` exactly.
bool regime_is_sequential(const std::string& regime_tag);

}  // namespace langloop
