// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "langloop/experiment.hpp"
#include "langloop/metrics.hpp"

namespace langloop {

/// One line of the method-comparison table.
struct RegimeSummaryRow {
  std::string tag;
  Regime regime = Regime::kVanilla;
  std::size_t rank = 0;
  // Parameter accounting, in scalars.
  std::size_t base_params = 0;     // unfrozen encoder scalars per run
  std::size_t head_params = 0;     // unfrozen classifier scalars per run/task
  std::size_t adapter_params = 0;  // adapter scalars per set
  std::size_t trainable_per_task = 0;
  std::size_t total_trainable = 0;  // x T for the per-task regimes
  // Final scores, averaged over the sweep's runs.
  double mean_f1 = 0.0;
  std::map<std::string, double> per_language_f1;
  VitalityGroupMeans groups;
  std::size_t num_runs = 0;
};

struct SweepSummary {
  std::vector<RegimeSummaryRow> rows;
  std::vector<std::string> missing;  // run dirs that should exist but do not
};

/// Reads every run log of the sweep and recomputes parameter counts from the
/// experiment's model configuration. Final F1 per run: last evaluation row
/// for the sequential regimes, the pooled row for joint training, the own-
/// task diagonal for the per-task regimes.
SweepSummary summarize_sweep(const ExperimentConfig& config,
                             const ExperimentData& data,
                             const std::filesystem::path& sweep_dir);

/// Aligned text table; empty vitality groups render as "-".
std::string summary_text(const SweepSummary& summary);
std::string summary_csv(const SweepSummary& summary);

}  // namespace langloop
