// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "langloop/metrics.hpp"
#include "langloop/model.hpp"
#include "langloop/orders.hpp"
#include "langloop/regimes.hpp"
#include "langloop/runlog.hpp"
#include "langloop/tasks.hpp"

namespace langloop {

struct OrderSpec {
  enum class Kind { kPolicy, kExplicit, kFile };
  Kind kind = Kind::kPolicy;
  OrderPolicy policy;  // kPolicy
  std::vector<std::vector<std::string>> explicit_orders;
  std::filesystem::path file;
};

/// The experiment description read from the JSON config file; the schema is
/// documented in the README.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t num_orders = 5;  // N
  int max_hop = 9;             // H
  int workers = 1;
  std::filesystem::path output_dir = "out";

  std::vector<LanguageSpec> languages;  // synthetic mode
  std::filesystem::path massive_path;   // ingestion mode (exclusive)

  SplitSizes split_sizes;
  GeneratorConfig generator;
  ModelConfig model;  // vocab_size / num_labels of 0 are derived from data
  std::vector<RegimeConfig> regimes;
  OrderSpec orders;

  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& name);
  /// Unreadable or invalid files surface as ConfigError.
  static ExperimentConfig from_file(const std::filesystem::path& path);

  void validate() const;
};

/// Materialized experiment inputs: one dataset per language plus the derived
/// model configuration and per-language metadata.
struct ExperimentData {
  std::vector<TaskDataset> datasets;
  ModelConfig model;
  LabelSchema schema;
  std::map<std::string, Vitality> vitality;
  std::map<std::string, double> resource_weights;

  std::vector<std::string> languages() const;
  const TaskDataset& dataset(const std::string& lang) const;
};

ExperimentData materialize(const ExperimentConfig& config);

/// The N training orders for this experiment.
std::vector<LanguageOrder> experiment_orders(const ExperimentConfig& config,
                                             const ExperimentData& data);

/// out/<regime tag>/ord<k>_seed<seed>.
std::filesystem::path run_dir(const std::filesystem::path& out,
                              const std::string& tag, std::size_t order_index,
                              std::uint64_t seed);

/// Executes one (regime, order) run, persists runlog.jsonl, scores.csv,
/// r_matrix.csv (square logs) and checkpoints/, and returns the log.
RunLog run_single(const ExperimentData& data, const RegimeConfig& regime,
                  const LanguageOrder& order, std::size_t order_index,
                  const std::filesystem::path& out_dir, int workers = 1);

/// All configured regimes x N orders; seeds follow config.seed + order index.
void run_sweep(const ExperimentConfig& config, const ExperimentData& data,
               const std::filesystem::path& out_dir, int workers = 1);

/// Loads the N run logs of one regime from a sweep directory (sorted by run
/// directory name). Missing artifacts raise IoError.
std::vector<RunLog> load_regime_logs(const std::string& tag,
                                     const std::filesystem::path& sweep_dir);

/// Derives transfer reports and hop matrices from persisted logs. Never
/// mutates the logs; rerunning produces identical bytes.
void write_metrics(const ExperimentConfig& config,
                   const std::filesystem::path& sweep_dir);

}  // namespace langloop
