// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "langloop/errors.hpp"
#include "langloop/regimes.hpp"
#include "langloop/serialize.hpp"
#include "support.hpp"

using namespace langloop;

namespace {

GeneratorConfig tiny_generator() {
  GeneratorConfig gen;
  gen.slot_types = {"time", "place"};
  gen.shared_pool_size = 21;
  gen.script_range_size = 21;
  gen.max_seq_len = 12;
  return gen;
}

ModelConfig tiny_model_config(const GeneratorConfig& gen, int max_script) {
  ModelConfig cfg;
  cfg.vocab_size = gen.required_vocab(max_script);
  cfg.hidden_dim = 8;
  cfg.max_seq_len = 12;
  cfg.num_labels = gen.num_labels();
  cfg.dropout_rate = 0.1;
  return cfg;
}

std::vector<TaskDataset> tiny_datasets(std::size_t t, double overlap = 0.2) {
  const GeneratorConfig gen = tiny_generator();
  const SplitSizes sizes{12, 6, 6};
  std::vector<TaskDataset> out;
  for (std::size_t i = 0; i < t; ++i) {
    LanguageSpec spec;
    spec.lang_id = "syn" + std::to_string(i);
    spec.script_id = static_cast<int>(i);
    spec.family_id = 0;
    spec.overlap = overlap;
    spec.seed = 1000 + i;
    out.push_back(generate_language(spec, sizes, gen));
  }
  return out;
}

RegimeConfig tiny_regime(Regime regime, std::size_t rank = 0) {
  RegimeConfig cfg;
  cfg.regime = regime;
  cfg.learning_rate = 5e-3;
  cfg.max_epochs = 3;
  cfg.patience = 2;
  cfg.batch_size = 4;
  cfg.lora_rank = rank;
  if (rank > 0) cfg.lora_alpha = static_cast<double>(rank);
  cfg.seed = 7;
  return cfg;
}

std::string model_bytes(const ModelParams& model) {
  std::string bytes;
  for (const Param* p : model.all_params()) {
    bytes += p->name;
    bytes += tensor_bytes(p->value);
  }
  return bytes;
}

std::string adapters_bytes(const AdapterSet& set) {
  std::string bytes;
  for (const LoraAdapter& a : set.adapters) {
    bytes += a.target;
    bytes += tensor_bytes(a.a.value);
    bytes += tensor_bytes(a.b.value);
  }
  return bytes;
}

LanguageOrder identity_order(const std::vector<TaskDataset>& datasets) {
  LanguageOrder order;
  order.order_id = "identity";
  for (const TaskDataset& ds : datasets) order.lang_ids.push_back(ds.spec.lang_id);
  return order;
}

}  // namespace

TEST_SUITE("regimes") {

TEST_CASE("config defaults follow the adapter/full split") {
  RegimeConfig lora = tiny_regime(Regime::kSharedLora, 2);
  lora.learning_rate = 0;
  lora.max_epochs = 0;
  lora.patience = 0;
  lora.lora_alpha = 0;
  lora.finalize();
  CHECK(lora.learning_rate == doctest::Approx(5e-6));
  CHECK(lora.max_epochs == 100);
  CHECK(lora.patience == 15);
  CHECK(lora.lora_alpha == 2.0);  // alpha defaults to the rank

  RegimeConfig full = tiny_regime(Regime::kVanilla);
  full.learning_rate = 0;
  full.max_epochs = 0;
  full.patience = 0;
  full.finalize();
  CHECK(full.learning_rate == doctest::Approx(5e-5));
  CHECK(full.max_epochs == 50);
  CHECK(full.patience == 5);

  RegimeConfig bad = tiny_regime(Regime::kVanilla);
  bad.lora_rank = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RegimeConfig missing = tiny_regime(Regime::kNonSharedLora, 0);
  CHECK_THROWS_AS(missing.finalize(), ConfigError);
  RegimeConfig impatient = tiny_regime(Regime::kVanilla);
  impatient.patience = 10;
  CHECK_THROWS_AS(impatient.validate(), ConfigError);
}

TEST_CASE("early stopping traces") {
  // Monotone improvement never stops; the best epoch is the last.
  const EarlyStopDecision up =
      evaluate_early_stop({0.1, 0.2, 0.3, 0.4, 0.5}, 3);
  CHECK(up.stop_epoch == 0);
  CHECK(up.best_epoch == 5);

  // Flat: the first epoch sets the best, then patience runs out.
  const EarlyStopDecision flat =
      evaluate_early_stop({0.4, 0.4, 0.4, 0.4, 0.4, 0.4}, 3);
  CHECK(flat.stop_epoch == 4);  // patience + 1
  CHECK(flat.best_epoch == 1);

  // Definition trace from the contract.
  const EarlyStopDecision trace =
      evaluate_early_stop({0.5, 0.7, 0.6, 0.6, 0.6}, 3);
  CHECK(trace.stop_epoch == 5);
  CHECK(trace.best_epoch == 2);

  CHECK_THROWS_AS(evaluate_early_stop({0.5}, 0), ConfigError);
}

TEST_CASE("mono equals vanilla with a single task") {
  const auto datasets = tiny_datasets(1);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 0);

  const PerTaskRun mono =
      train_mono(model_cfg, datasets, tiny_regime(Regime::kMono));
  const SequentialRun vanilla =
      train_vanilla(model_cfg, datasets, identity_order(datasets),
                    tiny_regime(Regime::kVanilla));

  CHECK(model_bytes(mono.models[0]) == model_bytes(vanilla.model));
  CHECK(mono.log.steps[0].valid_f1 == vanilla.log.steps[0].valid_f1);
  CHECK(mono.log.steps[0].test_f1 == vanilla.log.steps[0].test_f1);
}

TEST_CASE("multi with a single task matches mono exactly") {
  const auto datasets = tiny_datasets(1);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 0);
  const SequentialRun multi =
      train_multi(model_cfg, datasets, tiny_regime(Regime::kMulti));
  const PerTaskRun mono =
      train_mono(model_cfg, datasets, tiny_regime(Regime::kMono));
  CHECK(model_bytes(multi.model) == model_bytes(mono.models[0]));
  CHECK(multi.log.steps[0].valid_f1 == mono.log.steps[0].valid_f1);
}

TEST_CASE("shared and non-shared coincide for T = 1") {
  const auto datasets = tiny_datasets(1);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 0);
  const SequentialRun shared =
      train_shared_lora(model_cfg, datasets, identity_order(datasets),
                        tiny_regime(Regime::kSharedLora, 2));
  const PerTaskRun non_shared = train_nonshared_lora(
      model_cfg, datasets, tiny_regime(Regime::kNonSharedLora, 2));
  CHECK(adapters_bytes(*shared.adapters) ==
        adapters_bytes(non_shared.adapters[0]));
  CHECK(model_bytes(shared.model) == model_bytes(non_shared.models[0]));
  CHECK(shared.log.steps[0].test_f1 == non_shared.log.steps[0].test_f1);
}

TEST_CASE("non-shared results are invariant to task order and parallelism") {
  const auto datasets = tiny_datasets(3);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 2);
  const RegimeConfig cfg = tiny_regime(Regime::kNonSharedLora, 2);

  const PerTaskRun forward_run = train_nonshared_lora(model_cfg, datasets, cfg);
  std::vector<TaskDataset> reversed(datasets.rbegin(), datasets.rend());
  const PerTaskRun reversed_run =
      train_nonshared_lora(model_cfg, reversed, cfg);
  const PerTaskRun parallel_run =
      train_nonshared_lora(model_cfg, datasets, cfg, /*workers=*/3);

  for (std::size_t t = 0; t < datasets.size(); ++t) {
    const std::size_t rt = datasets.size() - 1 - t;
    CHECK(adapters_bytes(forward_run.adapters[t]) ==
          adapters_bytes(reversed_run.adapters[rt]));
    CHECK(adapters_bytes(forward_run.adapters[t]) ==
          adapters_bytes(parallel_run.adapters[t]));
    CHECK(model_bytes(forward_run.models[t]) ==
          model_bytes(parallel_run.models[t]));
    // Own-task score is order-free.
    CHECK(forward_run.log.steps[t].test_f1[t] ==
          reversed_run.log.steps[rt].test_f1[rt]);
  }
}

TEST_CASE("frozen encoder is bit-identical before and after adapter training") {
  const auto datasets = tiny_datasets(2);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 1);
  const RegimeConfig cfg = tiny_regime(Regime::kSharedLora, 2);

  Rng init_rng = Rng(cfg.seed).fork("model-init");
  ModelParams reference = ModelParams::init(model_cfg, init_rng);
  reference.set_encoder_frozen(true);
  const std::uint64_t before = frozen_params_hash(reference);

  const SequentialRun run = train_shared_lora(
      model_cfg, datasets, identity_order(datasets), cfg);
  CHECK(frozen_params_hash(run.model) == before);

  const PerTaskRun non_shared = train_nonshared_lora(
      model_cfg, datasets, tiny_regime(Regime::kNonSharedLora, 2));
  for (const ModelParams& m : non_shared.models) {
    CHECK(frozen_params_hash(m) == before);
  }

  // The head trained: it must differ from the fresh init.
  CHECK(tensor_bytes(run.model.w_cls.value) !=
        tensor_bytes(reference.w_cls.value));
}

TEST_CASE("vanilla first-step row equals the mono row for that language") {
  const auto datasets = tiny_datasets(2);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 1);
  const SequentialRun vanilla = train_vanilla(
      model_cfg, datasets, identity_order(datasets), tiny_regime(Regime::kVanilla));
  const PerTaskRun mono =
      train_mono(model_cfg, datasets, tiny_regime(Regime::kMono));
  CHECK(vanilla.log.steps[0].test_f1 == mono.log.steps[0].test_f1);
  CHECK(vanilla.log.steps.size() == datasets.size());
  for (const StepRecord& s : vanilla.log.steps) {
    CHECK(s.test_f1.size() == datasets.size());
  }
}

TEST_CASE("multi on duplicated identical datasets scores both equally") {
  const GeneratorConfig gen = tiny_generator();
  const SplitSizes sizes{12, 6, 6};
  LanguageSpec spec;
  spec.lang_id = "first";
  spec.script_id = 0;
  spec.overlap = 0.2;
  spec.seed = 5;
  TaskDataset a = generate_language(spec, sizes, gen);
  spec.lang_id = "second";
  TaskDataset b = generate_language(spec, sizes, gen);
  const ModelConfig model_cfg = tiny_model_config(gen, 0);
  const SequentialRun multi =
      train_multi(model_cfg, {a, b}, tiny_regime(Regime::kMulti));
  CHECK(multi.log.steps[0].test_f1[0] == multi.log.steps[0].test_f1[1]);
}

TEST_CASE("rank sweep scales the adapter parameter count 1:2:4") {
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 0);
  std::vector<std::size_t> counts;
  for (std::size_t rank : {2u, 4u, 8u}) {
    Rng rng = Rng(7).fork("lora-init");
    const AdapterSet set =
        init_adapter_set(rng, lora_targets(), model_cfg.hidden_dim,
                         model_cfg.hidden_dim, rank,
                         static_cast<double>(rank), 0.1);
    counts.push_back(set.trainable_count());
  }
  CHECK(counts[1] == 2 * counts[0]);
  CHECK(counts[2] == 4 * counts[0]);
}

TEST_CASE("gradients flow only to adapters and the head under lora freezing") {
  const auto datasets = tiny_datasets(1);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 0);
  Rng init_rng = Rng(3).fork("model-init");
  ModelParams model = ModelParams::init(model_cfg, init_rng);
  model.set_encoder_frozen(true);
  Rng arng = Rng(3).fork("lora-init");
  AdapterSet adapters =
      init_adapter_set(arng, lora_targets(), model_cfg.hidden_dim,
                       model_cfg.hidden_dim, 2, 2.0, 0.0);
  Tape tape;
  const std::vector<LabeledSequence> batch(datasets[0].train.begin(),
                                           datasets[0].train.begin() + 4);
  const NodeId loss = build_loss(tape, model, &adapters, batch);
  const GradMap grads = tape.backward(loss);
  for (const Param* p : model.encoder_params()) {
    CHECK(!grads.contains(p));
  }
  CHECK(grads.contains(&model.w_cls));
  CHECK(grads.contains(&model.b_cls));
  for (const LoraAdapter& a : adapters.adapters) {
    CHECK(grads.contains(&a.a));
    CHECK(grads.contains(&a.b));
  }
}

TEST_CASE("same seed reproduces a sequential run bit for bit") {
  const auto datasets = tiny_datasets(2);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 1);
  const RegimeConfig cfg = tiny_regime(Regime::kVanilla);
  const SequentialRun a =
      train_vanilla(model_cfg, datasets, identity_order(datasets), cfg);
  const SequentialRun b =
      train_vanilla(model_cfg, datasets, identity_order(datasets), cfg);
  CHECK(a.log.to_jsonl() == b.log.to_jsonl());
  CHECK(model_bytes(a.model) == model_bytes(b.model));
}

TEST_CASE("order/dataset mismatch and empty datasets are rejected") {
  const auto datasets = tiny_datasets(2);
  const ModelConfig model_cfg = tiny_model_config(tiny_generator(), 1);
  LanguageOrder bad{"bad", {"syn0", "nope"}};
  CHECK_THROWS_AS(train_vanilla(model_cfg, datasets, bad,
                                tiny_regime(Regime::kVanilla)),
                  ConfigError);
  CHECK_THROWS_AS(
      train_multi(model_cfg, {}, tiny_regime(Regime::kMulti)), ConfigError);
  std::vector<TaskDataset> gutted = datasets;
  gutted[0].train.clear();
  CHECK_THROWS_AS(train_mono(model_cfg, gutted, tiny_regime(Regime::kMono)),
                  ConfigError);
}

}  // TEST_SUITE
