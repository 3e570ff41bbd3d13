// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "langloop/lora.hpp"
#include "langloop/model.hpp"
#include "langloop/orders.hpp"
#include "langloop/runlog.hpp"
#include "langloop/tasks.hpp"

namespace langloop {

enum class Regime { kMulti, kMono, kVanilla, kSharedLora, kNonSharedLora };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);
/// Directory/log tag, e.g. "vanilla", "shared_lora_r4", "multi_r8".
std::string regime_tag(Regime r, std::size_t rank);

/// Base matrices that carry adapters under the LoRA regimes.
const std::vector<std::string>& lora_targets();

struct RegimeConfig {
  Regime regime = Regime::kVanilla;
  /// Zero-valued fields are filled by finalize() from the stock defaults:
  /// adapter-based training uses lr 5e-6 / 100 epochs / patience 15, full
  /// fine-tuning 5e-5 / 50 / 5.
  double learning_rate = 0.0;
  int max_epochs = 0;
  int patience = 0;
  int batch_size = 16;
  std::size_t lora_rank = 0;   // required for the LoRA regimes
  double lora_alpha = 0.0;     // 0 = rank
  double lora_dropout = 0.1;
  bool classifier_trainable = true;  // LoRA regimes: head trains by default
  std::uint64_t seed = 0;
  /// Fresh optimizer moments per task (the per-task fine-tuning framing);
  /// set false to carry moments across a sequential run.
  bool reset_optimizer_between_tasks = true;

  bool uses_lora() const;
  void finalize();
  void validate() const;
};

// ---------------------------------------------------------------------------
// Early stopping on validation F1 (strict improvement; ties consume patience).

struct EarlyStopDecision {
  int stop_epoch = 0;  // 1-based epoch after which training stops; 0 = never
  int best_epoch = 0;  // 1-based epoch holding the best value
};

/// Replays a whole trajectory through the stopper.
EarlyStopDecision evaluate_early_stop(const std::vector<double>& valid_f1,
                                      int patience);

class EarlyStopper {
 public:
  explicit EarlyStopper(int patience);

  /// Feeds one epoch's validation score; returns true when training should
  /// stop after this epoch.
  bool feed(double value);
  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_value_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_value_ = 0.0;
  bool has_best_ = false;
  int streak_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation helpers.

double evaluate_f1(const ModelParams& params, const AdapterSet* adapters,
                   const std::vector<LabeledSequence>& data,
                   const LabelSchema& schema, int batch_size);

/// Test-split F1 on every dataset, in the given dataset order.
std::vector<double> evaluate_all_tests(const ModelParams& params,
                                       const AdapterSet* adapters,
                                       const std::vector<TaskDataset>& datasets,
                                       int batch_size);

// ---------------------------------------------------------------------------
// Training drivers. Every driver initializes the model from
// Rng(cfg.seed).fork("model-init"), so all regimes with one seed share the
// same starting point (the stand-in for a common pretrained base).

struct TrainPhaseResult {
  std::vector<double> valid_trajectory;
  int epochs_used = 0;
  bool early_stopped = false;
};

/// One task's optimization: epoch shuffling, minibatch Adam steps, early
/// stopping on the task's validation F1, restore of the best epoch.
/// Randomness is forked from (seed, phase_key), so identical phases are
/// bit-reproducible regardless of what ran before them.
TrainPhaseResult train_phase(ModelParams& model, AdapterSet* adapters,
                             const std::vector<LabeledSequence>& train_split,
                             const std::vector<LabeledSequence>& valid_split,
                             const LabelSchema& schema, const RegimeConfig& cfg,
                             const std::string& phase_key);

struct SequentialRun {
  ModelParams model;
  std::optional<AdapterSet> adapters;
  RunLog log;
};

/// Incremental training over the order; all parameters stay trainable. One
/// evaluation row (all T languages) per completed task.
SequentialRun train_vanilla(const ModelConfig& model_cfg,
                            const std::vector<TaskDataset>& datasets,
                            const LanguageOrder& order,
                            const RegimeConfig& cfg);

/// One adapter set trained across the order over a frozen encoder.
SequentialRun train_shared_lora(const ModelConfig& model_cfg,
                                const std::vector<TaskDataset>& datasets,
                                const LanguageOrder& order,
                                const RegimeConfig& cfg);

/// Joint training on the pooled union of all training splits; early stop on
/// pooled validation F1. With lora_rank > 0 the encoder is frozen and a
/// single adapter set is trained. The log holds one step.
SequentialRun train_multi(const ModelConfig& model_cfg,
                          const std::vector<TaskDataset>& datasets,
                          const RegimeConfig& cfg);

struct PerTaskRun {
  std::vector<ModelParams> models;      // one per dataset
  std::vector<AdapterSet> adapters;     // LoRA regime only, aligned
  RunLog log;                           // step t = dataset t's own run
};

/// Independent full fine-tuning per language from the shared init.
PerTaskRun train_mono(const ModelConfig& model_cfg,
                      const std::vector<TaskDataset>& datasets,
                      const RegimeConfig& cfg, int workers = 1);

/// Independent adapter (+ head copy) per language over the shared frozen
/// encoder; order-free, safe to run in parallel.
PerTaskRun train_nonshared_lora(const ModelConfig& model_cfg,
                                const std::vector<TaskDataset>& datasets,
                                const RegimeConfig& cfg, int workers = 1);

}  // namespace langloop
