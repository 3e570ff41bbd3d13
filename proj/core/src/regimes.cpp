// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/regimes.hpp"

#include <algorithm>
#include <future>
#include <map>

#include "langloop/errors.hpp"
#include "langloop/metrics.hpp"
#include "langloop/optimizer.hpp"

namespace langloop {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kMulti: return "multi";
    case Regime::kMono: return "mono";
    case Regime::kVanilla: return "vanilla";
    case Regime::kSharedLora: return "shared_lora";
    case Regime::kNonSharedLora: return "nonshared_lora";
  }
  return "vanilla";
}

Regime regime_from_string(const std::string& s) {
  if (s == "multi") return Regime::kMulti;
  if (s == "mono") return Regime::kMono;
  if (s == "vanilla") return Regime::kVanilla;
  if (s == "shared_lora") return Regime::kSharedLora;
  if (s == "nonshared_lora" || s == "non_shared_lora") {
    return Regime::kNonSharedLora;
  }
  throw ConfigError("unknown regime '" + s + "'");
}

std::string regime_tag(Regime r, std::size_t rank) {
  std::string tag = to_string(r);
  if (rank > 0) {
    tag += "_r" + std::to_string(rank);
  }
  return tag;
}

const std::vector<std::string>& lora_targets() {
  static const std::vector<std::string> targets = {"w_q", "w_v"};
  return targets;
}

bool RegimeConfig::uses_lora() const {
  switch (regime) {
    case Regime::kSharedLora:
    case Regime::kNonSharedLora:
      return true;
    case Regime::kMulti:
      return lora_rank > 0;
    default:
      return false;
  }
}

void RegimeConfig::finalize() {
  if ((regime == Regime::kSharedLora || regime == Regime::kNonSharedLora) &&
      lora_rank == 0) {
    throw ConfigError("regime " + to_string(regime) + " requires a lora rank");
  }
  const bool lora = uses_lora();
  if (learning_rate == 0.0) learning_rate = lora ? 5e-6 : 5e-5;
  if (max_epochs == 0) max_epochs = lora ? 100 : 50;
  if (patience == 0) patience = lora ? 15 : 5;
  if (lora && lora_alpha == 0.0) {
    lora_alpha = static_cast<double>(lora_rank);
  }
  validate();
}

void RegimeConfig::validate() const {
  if (learning_rate <= 0.0) {
    throw ConfigError("regime: learning rate must be positive");
  }
  if (max_epochs < 1 || patience < 1) {
    throw ConfigError("regime: epochs and patience must be >= 1");
  }
  if (patience > max_epochs) {
    throw ConfigError("regime: patience " + std::to_string(patience) +
                      " exceeds max_epochs " + std::to_string(max_epochs));
  }
  if (batch_size < 1) {
    throw ConfigError("regime: batch size must be >= 1");
  }
  const bool lora_fields = lora_rank > 0;
  switch (regime) {
    case Regime::kMono:
    case Regime::kVanilla:
      if (lora_fields) {
        throw ConfigError("regime " + to_string(regime) +
                          " does not take lora fields");
      }
      break;
    case Regime::kSharedLora:
    case Regime::kNonSharedLora:
      if (!lora_fields) {
        throw ConfigError("regime " + to_string(regime) + " needs a lora rank");
      }
      break;
    case Regime::kMulti:
      break;  // optional adapter training
  }
  if (lora_fields && (lora_dropout < 0.0 || lora_dropout >= 1.0)) {
    throw ConfigError("regime: lora dropout must be in [0, 1)");
  }
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
  if (patience < 1) {
    throw ConfigError("early stop: patience must be >= 1");
  }
}

bool EarlyStopper::feed(double value) {
  ++epoch_;
  if (!has_best_ || value > best_value_) {  // strict improvement resets
    has_best_ = true;
    best_value_ = value;
    best_epoch_ = epoch_;
    streak_ = 0;
    return false;
  }
  ++streak_;
  return streak_ >= patience_;
}

EarlyStopDecision evaluate_early_stop(const std::vector<double>& valid_f1,
                                      int patience) {
  EarlyStopper stopper(patience);
  EarlyStopDecision decision;
  for (double v : valid_f1) {
    if (stopper.feed(v)) {
      decision.stop_epoch = stopper.epochs_seen();
      break;
    }
  }
  decision.best_epoch = stopper.best_epoch();
  return decision;
}

double evaluate_f1(const ModelParams& params, const AdapterSet* adapters,
                   const std::vector<LabeledSequence>& data,
                   const LabelSchema& schema, int batch_size) {
  SpanCounts total;
  for (std::size_t start = 0; start < data.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(data.size(), start + static_cast<std::size_t>(batch_size));
    const std::vector<LabeledSequence> batch(data.begin() + static_cast<std::ptrdiff_t>(start),
                                             data.begin() + static_cast<std::ptrdiff_t>(end));
    const auto predicted = predict(params, adapters, batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      total += span_counts(predicted[i], batch[i].labels, schema);
    }
  }
  return total.f1();
}

std::vector<double> evaluate_all_tests(const ModelParams& params,
                                       const AdapterSet* adapters,
                                       const std::vector<TaskDataset>& datasets,
                                       int batch_size) {
  std::vector<double> scores;
  scores.reserve(datasets.size());
  for (const TaskDataset& ds : datasets) {
    const LabelSchema schema{ds.label_names};
    scores.push_back(evaluate_f1(params, adapters, ds.test, schema, batch_size));
  }
  return scores;
}

namespace {

std::vector<Param*> trainable_params(ModelParams& model, AdapterSet* adapters) {
  std::vector<Param*> out;
  for (Param* p : model.all_params()) {
    if (!p->frozen) out.push_back(p);
  }
  if (adapters != nullptr) {
    for (Param* p : adapters->params()) {
      if (!p->frozen) out.push_back(p);
    }
  }
  return out;
}

std::vector<Tensor> snapshot(const std::vector<Param*>& params) {
  std::vector<Tensor> values;
  values.reserve(params.size());
  for (const Param* p : params) values.push_back(p->value);
  return values;
}

void restore(const std::vector<Param*>& params, const std::vector<Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = values[i];
  }
}

void apply_lora_freezing(ModelParams& model, const RegimeConfig& cfg) {
  model.set_encoder_frozen(true);
  for (Param* p : model.head_params()) {
    p->frozen = !cfg.classifier_trainable;
  }
}

AdapterSet make_adapters(const ModelConfig& model_cfg, const RegimeConfig& cfg) {
  Rng rng = Rng(cfg.seed).fork("lora-init");
  return init_adapter_set(rng, lora_targets(), model_cfg.hidden_dim,
                          model_cfg.hidden_dim, cfg.lora_rank, cfg.lora_alpha,
                          cfg.lora_dropout);
}

std::string phase_key_for(const std::vector<std::string>& langs) {
  std::string key;
  for (const std::string& lang : langs) {
    if (!key.empty()) key += '+';
    key += lang;
  }
  return key;
}

std::vector<TaskDataset> reorder_datasets(
    const std::vector<TaskDataset>& datasets, const LanguageOrder& order) {
  std::vector<std::string> langs;
  langs.reserve(datasets.size());
  for (const TaskDataset& ds : datasets) langs.push_back(ds.spec.lang_id);
  validate_permutation(order, langs);
  std::vector<TaskDataset> out;
  out.reserve(datasets.size());
  for (const std::string& lang : order.lang_ids) {
    auto it = std::find_if(datasets.begin(), datasets.end(),
                           [&](const TaskDataset& ds) {
                             return ds.spec.lang_id == lang;
                           });
    out.push_back(*it);
  }
  return out;
}

std::vector<std::string> dataset_langs(const std::vector<TaskDataset>& datasets) {
  std::vector<std::string> langs;
  langs.reserve(datasets.size());
  for (const TaskDataset& ds : datasets) langs.push_back(ds.spec.lang_id);
  return langs;
}

void require_nonempty(const std::vector<TaskDataset>& datasets) {
  if (datasets.empty()) {
    throw ConfigError("training: no datasets");
  }
  for (const TaskDataset& ds : datasets) {
    if (ds.train.empty() || ds.valid.empty() || ds.test.empty()) {
      throw ConfigError("training: dataset '" + ds.spec.lang_id +
                        "' has an empty split");
    }
  }
}

}  // namespace

TrainPhaseResult train_phase(ModelParams& model, AdapterSet* adapters,
                             const std::vector<LabeledSequence>& train_split,
                             const std::vector<LabeledSequence>& valid_split,
                             const LabelSchema& schema, const RegimeConfig& cfg,
                             const std::string& phase_key) {
  const std::vector<Param*> params = trainable_params(model, adapters);
  if (params.empty()) {
    throw ConfigError("training: no trainable parameters");
  }
  AdamOptimizer optimizer(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});
  for (Param* p : params) optimizer.register_param(*p);

  Rng shuffle_rng = Rng(cfg.seed).fork("shuffle", phase_key);
  Rng dropout_rng = Rng(cfg.seed).fork("dropout", phase_key);

  EarlyStopper stopper(cfg.patience);
  TrainPhaseResult result;
  std::vector<Tensor> best = snapshot(params);

  std::vector<std::size_t> indices(train_split.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(indices);
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          indices.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<LabeledSequence> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_split[indices[i]]);
      }
      Tape tape;
      ForwardOptions opts;
      opts.train_mode = true;
      opts.dropout_rng = &dropout_rng;
      const NodeId loss_node = build_loss(tape, model, adapters, batch, opts);
      optimizer.step(tape.backward(loss_node));
    }

    const double valid_f1 =
        evaluate_f1(model, adapters, valid_split, schema, cfg.batch_size);
    result.valid_trajectory.push_back(valid_f1);
    const bool stop = stopper.feed(valid_f1);
    if (stopper.best_epoch() == epoch) {
      best = snapshot(params);
    }
    if (stop) {
      result.early_stopped = true;
      result.epochs_used = epoch;
      break;
    }
  }
  if (!result.early_stopped) {
    result.epochs_used = cfg.max_epochs;
  }
  restore(params, best);
  return result;
}

SequentialRun train_vanilla(const ModelConfig& model_cfg,
                            const std::vector<TaskDataset>& datasets,
                            const LanguageOrder& order,
                            const RegimeConfig& cfg) {
  RegimeConfig local = cfg;
  local.validate();
  require_nonempty(datasets);
  const std::vector<TaskDataset> ordered = reorder_datasets(datasets, order);

  Rng init_rng = Rng(local.seed).fork("model-init");
  SequentialRun run{ModelParams::init(model_cfg, init_rng), std::nullopt, {}};
  run.model.set_all_frozen(false);

  run.log.regime = regime_tag(local.regime, 0);
  run.log.order_id = order.order_id;
  run.log.seed = local.seed;
  run.log.order = order.lang_ids;

  for (std::size_t t = 0; t < ordered.size(); ++t) {
    const TaskDataset& task = ordered[t];
    const LabelSchema schema{task.label_names};
    const TrainPhaseResult phase =
        train_phase(run.model, nullptr, task.train, task.valid, schema, local,
                    phase_key_for({task.spec.lang_id}));
    StepRecord record;
    record.step = static_cast<int>(t);
    record.lang = task.spec.lang_id;
    record.test_f1 =
        evaluate_all_tests(run.model, nullptr, ordered, local.batch_size);
    record.valid_f1 = phase.valid_trajectory;
    record.epochs_used = phase.epochs_used;
    record.early_stopped = phase.early_stopped;
    run.log.steps.push_back(std::move(record));
  }
  run.log.validate();
  return run;
}

SequentialRun train_shared_lora(const ModelConfig& model_cfg,
                                const std::vector<TaskDataset>& datasets,
                                const LanguageOrder& order,
                                const RegimeConfig& cfg) {
  RegimeConfig local = cfg;
  local.validate();
  if (local.regime != Regime::kSharedLora) {
    throw ConfigError("train_shared_lora: config regime mismatch");
  }
  require_nonempty(datasets);
  const std::vector<TaskDataset> ordered = reorder_datasets(datasets, order);

  Rng init_rng = Rng(local.seed).fork("model-init");
  SequentialRun run{ModelParams::init(model_cfg, init_rng), std::nullopt, {}};
  apply_lora_freezing(run.model, local);
  run.adapters = make_adapters(model_cfg, local);

  run.log.regime = regime_tag(local.regime, local.lora_rank);
  run.log.order_id = order.order_id;
  run.log.seed = local.seed;
  run.log.order = order.lang_ids;

  for (std::size_t t = 0; t < ordered.size(); ++t) {
    const TaskDataset& task = ordered[t];
    const LabelSchema schema{task.label_names};
    const TrainPhaseResult phase =
        train_phase(run.model, &*run.adapters, task.train, task.valid, schema,
                    local, phase_key_for({task.spec.lang_id}));
    StepRecord record;
    record.step = static_cast<int>(t);
    record.lang = task.spec.lang_id;
    record.test_f1 = evaluate_all_tests(run.model, &*run.adapters, ordered,
                                        local.batch_size);
    record.valid_f1 = phase.valid_trajectory;
    record.epochs_used = phase.epochs_used;
    record.early_stopped = phase.early_stopped;
    run.log.steps.push_back(std::move(record));
  }
  run.log.validate();
  return run;
}

SequentialRun train_multi(const ModelConfig& model_cfg,
                          const std::vector<TaskDataset>& datasets,
                          const RegimeConfig& cfg) {
  RegimeConfig local = cfg;
  local.validate();
  if (local.regime != Regime::kMulti) {
    throw ConfigError("train_multi: config regime mismatch");
  }
  require_nonempty(datasets);

  Rng init_rng = Rng(local.seed).fork("model-init");
  SequentialRun run{ModelParams::init(model_cfg, init_rng), std::nullopt, {}};
  AdapterSet* adapters = nullptr;
  if (local.uses_lora()) {
    apply_lora_freezing(run.model, local);
    run.adapters = make_adapters(model_cfg, local);
    adapters = &*run.adapters;
  } else {
    run.model.set_all_frozen(false);
  }

  // Pooled training split; the pooled order is owned by the shuffle stream.
  std::vector<LabeledSequence> pooled_train;
  std::vector<LabeledSequence> pooled_valid;
  for (const TaskDataset& ds : datasets) {
    pooled_train.insert(pooled_train.end(), ds.train.begin(), ds.train.end());
    pooled_valid.insert(pooled_valid.end(), ds.valid.begin(), ds.valid.end());
  }
  const LabelSchema schema{datasets.front().label_names};
  const std::vector<std::string> langs = dataset_langs(datasets);
  const TrainPhaseResult phase =
      train_phase(run.model, adapters, pooled_train, pooled_valid, schema,
                  local, phase_key_for(langs));

  run.log.regime = regime_tag(local.regime, local.lora_rank);
  run.log.order_id = "pooled";
  run.log.seed = local.seed;
  run.log.order = langs;
  StepRecord record;
  record.step = 0;
  record.lang = phase_key_for(langs);
  record.test_f1 =
      evaluate_all_tests(run.model, adapters, datasets, local.batch_size);
  record.valid_f1 = phase.valid_trajectory;
  record.epochs_used = phase.epochs_used;
  record.early_stopped = phase.early_stopped;
  run.log.steps.push_back(std::move(record));
  return run;
}

namespace {

/// Shared implementation for the two independent per-task regimes.
PerTaskRun train_per_task(const ModelConfig& model_cfg,
                          const std::vector<TaskDataset>& datasets,
                          const RegimeConfig& cfg, int workers, bool lora) {
  require_nonempty(datasets);
  const std::vector<std::string> langs = dataset_langs(datasets);

  struct TaskOutput {
    ModelParams model;
    AdapterSet adapters;
    TrainPhaseResult phase;
    std::vector<double> test_f1;
  };

  auto run_task = [&](std::size_t t) {
    Rng init_rng = Rng(cfg.seed).fork("model-init");
    TaskOutput out{ModelParams::init(model_cfg, init_rng), {}, {}, {}};
    AdapterSet* adapters = nullptr;
    if (lora) {
      apply_lora_freezing(out.model, cfg);
      out.adapters = make_adapters(model_cfg, cfg);
      adapters = &out.adapters;
    } else {
      out.model.set_all_frozen(false);
    }
    const TaskDataset& task = datasets[t];
    const LabelSchema schema{task.label_names};
    out.phase =
        train_phase(out.model, adapters, task.train, task.valid, schema, cfg,
                    phase_key_for({task.spec.lang_id}));
    out.test_f1 =
        evaluate_all_tests(out.model, adapters, datasets, cfg.batch_size);
    return out;
  };

  std::vector<TaskOutput> outputs(datasets.size());
  if (workers <= 1) {
    for (std::size_t t = 0; t < datasets.size(); ++t) {
      outputs[t] = run_task(t);
    }
  } else {
    std::vector<std::future<TaskOutput>> futures(datasets.size());
    std::size_t next = 0;
    while (next < datasets.size()) {
      const std::size_t wave = std::min<std::size_t>(
          static_cast<std::size_t>(workers), datasets.size() - next);
      for (std::size_t w = 0; w < wave; ++w) {
        futures[next + w] =
            std::async(std::launch::async, run_task, next + w);
      }
      for (std::size_t w = 0; w < wave; ++w) {
        outputs[next + w] = futures[next + w].get();
      }
      next += wave;
    }
  }

  PerTaskRun run;
  run.log.regime = regime_tag(cfg.regime, cfg.lora_rank);
  run.log.order_id = "per_task";
  run.log.seed = cfg.seed;
  run.log.order = langs;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    StepRecord record;
    record.step = static_cast<int>(t);
    record.lang = langs[t];
    record.test_f1 = std::move(outputs[t].test_f1);
    record.valid_f1 = outputs[t].phase.valid_trajectory;
    record.epochs_used = outputs[t].phase.epochs_used;
    record.early_stopped = outputs[t].phase.early_stopped;
    run.log.steps.push_back(std::move(record));
    run.models.push_back(std::move(outputs[t].model));
    if (lora) {
      run.adapters.push_back(std::move(outputs[t].adapters));
    }
  }
  run.log.validate();
  return run;
}

}  // namespace

PerTaskRun train_mono(const ModelConfig& model_cfg,
                      const std::vector<TaskDataset>& datasets,
                      const RegimeConfig& cfg, int workers) {
  RegimeConfig local = cfg;
  local.validate();
  if (local.regime != Regime::kMono) {
    throw ConfigError("train_mono: config regime mismatch");
  }
  return train_per_task(model_cfg, datasets, local, workers, false);
}

PerTaskRun train_nonshared_lora(const ModelConfig& model_cfg,
                                const std::vector<TaskDataset>& datasets,
                                const RegimeConfig& cfg, int workers) {
  RegimeConfig local = cfg;
  local.validate();
  if (local.regime != Regime::kNonSharedLora) {
    throw ConfigError("train_nonshared_lora: config regime mismatch");
  }
  return train_per_task(model_cfg, datasets, local, workers, true);
}

}  // namespace langloop
