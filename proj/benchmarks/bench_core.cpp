// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "langloop/metrics.hpp"
#include "langloop/model.hpp"
#include "langloop/regimes.hpp"
#include "langloop/rng.hpp"
#include "langloop/tape.hpp"
#include "langloop/tasks.hpp"

namespace {

using namespace langloop;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_tensor({n, n}, rng);
  const Tensor b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

ModelConfig bench_model_config() {
  GeneratorConfig gen;
  ModelConfig cfg;
  cfg.vocab_size = gen.required_vocab(3);
  cfg.hidden_dim = 32;
  cfg.max_seq_len = 24;
  cfg.num_labels = gen.num_labels();
  cfg.dropout_rate = 0.1;
  return cfg;
}

std::vector<LabeledSequence> bench_batch(std::size_t n) {
  LanguageSpec spec;
  spec.lang_id = "bench";
  spec.overlap = 0.2;
  spec.seed = 42;
  const TaskDataset ds =
      generate_language(spec, SplitSizes{n, 1, 1}, GeneratorConfig{});
  return ds.train;
}

void BM_ForwardBatch(benchmark::State& state) {
  const ModelConfig cfg = bench_model_config();
  Rng rng = Rng(1).fork("model-init");
  const ModelParams model = ModelParams::init(cfg, rng);
  const auto batch = bench_batch(16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, nullptr, batch));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 16);
}
BENCHMARK(BM_ForwardBatch);

void BM_TrainStep(benchmark::State& state) {
  const ModelConfig cfg = bench_model_config();
  Rng rng = Rng(1).fork("model-init");
  ModelParams model = ModelParams::init(cfg, rng);
  const auto batch = bench_batch(16);
  Rng dropout(3);
  for (auto _ : state) {
    Tape tape;
    ForwardOptions opts;
    opts.train_mode = true;
    opts.dropout_rng = &dropout;
    const NodeId loss = build_loss(tape, model, nullptr, batch, opts);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 16);
}
BENCHMARK(BM_TrainStep);

void BM_GenerateLanguage(benchmark::State& state) {
  LanguageSpec spec;
  spec.lang_id = "bench";
  spec.overlap = 0.3;
  for (auto _ : state) {
    spec.seed++;
    benchmark::DoNotOptimize(
        generate_language(spec, SplitSizes{200, 50, 50}, GeneratorConfig{}));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 300);
}
BENCHMARK(BM_GenerateLanguage);

void BM_SpanF1(benchmark::State& state) {
  const LabelSchema schema = GeneratorConfig{}.schema();
  LanguageSpec spec;
  spec.lang_id = "bench";
  spec.seed = 9;
  const TaskDataset ds =
      generate_language(spec, SplitSizes{500, 1, 1}, GeneratorConfig{});
  std::vector<std::vector<int>> gold;
  for (const LabeledSequence& seq : ds.train) gold.push_back(seq.labels);
  for (auto _ : state) {
    benchmark::DoNotOptimize(span_f1(gold, gold, schema));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 500);
}
BENCHMARK(BM_SpanF1);

void BM_TransferReport(benchmark::State& state) {
  Rng rng(17);
  const std::size_t t = 8;
  std::vector<std::string> langs;
  for (std::size_t i = 0; i < t; ++i) langs.push_back("L" + std::to_string(i));
  std::vector<RunLog> logs;
  for (int n = 0; n < 5; ++n) {
    RunLog log;
    log.regime = "vanilla";
    log.order_id = "bench";
    log.order = langs;
    rng.shuffle(log.order);
    for (std::size_t i = 0; i < t; ++i) {
      StepRecord s;
      s.step = static_cast<int>(i);
      s.lang = log.order[i];
      for (std::size_t j = 0; j < t; ++j) s.test_f1.push_back(rng.uniform());
      s.valid_f1 = {0.5};
      log.steps.push_back(std::move(s));
    }
    logs.push_back(std::move(log));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_transfer_report(logs, 9));
  }
}
BENCHMARK(BM_TransferReport);

}  // namespace

BENCHMARK_MAIN();
