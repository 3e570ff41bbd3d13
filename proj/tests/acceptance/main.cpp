// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "langloop/annot.hpp"
#include "langloop/errors.hpp"
#include "langloop/experiment.hpp"
#include "langloop/heatmap.hpp"
#include "langloop/lora.hpp"
#include "langloop/massive.hpp"
#include "langloop/metrics.hpp"
#include "langloop/model.hpp"
#include "langloop/optimizer.hpp"
#include "langloop/regimes.hpp"
#include "langloop/serialize.hpp"
#include "langloop/summary.hpp"
#include "langloop/tasks.hpp"
#include "support.hpp"

using namespace langloop;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness (per-op and full model at d = 8).

std::string criterion_gradients() {
  Rng rng(2024);
  double worst = 0.0;

  auto fd_check = [&](Param& p, const std::function<double()>& loss,
                      const GradMap& grads, const char* what) {
    const Tensor fd = test::fd_gradient(loss, p);
    require(grads.contains(&p), std::string(what) + ": gradient missing");
    const double err = test::max_rel_error(grads.at(&p), fd);
    worst = std::max(worst, err);
    require(err < 1e-4, std::string(what) + ": rel error " + fmt(err));
  };

  // Every differentiable primitive, via small composite graphs.
  {
    Param a{"a", test::random_tensor({4, 5}, rng), false};
    Param b{"b", test::random_tensor({4, 5}, rng), false};
    Param row{"row", test::random_tensor({1, 5}, rng), false};
    auto build = [&](Tape& t) {
      const NodeId x = t.add_row_broadcast(
          t.add(t.parameter(a), t.scale(t.parameter(b), 0.7)), t.parameter(row));
      const NodeId y = t.matmul(t.gelu(x), t.transpose(t.parameter(b)));
      return t.sum(t.softmax_rows(y));
    };
    Tape tape;
    const GradMap grads = tape.backward(build(tape));
    auto loss = [&] { Tape t; return t.value(build(t)).scalar_value(); };
    fd_check(a, loss, grads, "composite/a");
    fd_check(b, loss, grads, "composite/b");
    fd_check(row, loss, grads, "composite/row");
  }
  {
    Param table{"table", test::random_tensor({7, 4}, rng), false};
    auto build = [&](Tape& t) {
      const NodeId g1 = t.gather_rows(t.parameter(table), {0, 3, 3, 6});
      const NodeId g2 = t.gather_rows(t.parameter(table), {1, 2});
      Rng mask(42);
      const NodeId cat = t.dropout(t.concat_rows({g1, g2}), 0.25, mask);
      return t.softmax_cross_entropy(cat, {0, 1, 2, 3, 0, 1},
                                     {1, 1, 1, 0, 1, 1});
    };
    Tape tape;
    const GradMap grads = tape.backward(build(tape));
    fd_check(table, [&] { Tape t; return t.value(build(t)).scalar_value(); },
             grads, "gather/dropout/xent");
  }

  // Full model loss at d = 8, every parameter.
  ModelConfig cfg;
  cfg.vocab_size = 24;
  cfg.hidden_dim = 8;
  cfg.max_seq_len = 10;
  cfg.num_labels = 5;
  cfg.dropout_rate = 0.0;
  Rng init = Rng(7).fork("model-init");
  ModelParams model = ModelParams::init(cfg, init);
  const std::vector<LabeledSequence> batch{
      {{2, 9, 4, 17}, {0, 1, 2, 0}},
      {{3, 12, 7}, {0, 3, 4}},
  };
  Rng arng = Rng(7).fork("lora-init");
  AdapterSet adapters = init_adapter_set(arng, lora_targets(), 8, 8, 2, 2.0, 0.0);
  for (LoraAdapter& a : adapters.adapters) {
    for (double& v : a.b.value.values()) v = rng.uniform(-0.3, 0.3);
  }
  Tape tape;
  const NodeId loss_node = build_loss(tape, model, &adapters, batch);
  const GradMap grads = tape.backward(loss_node);
  auto model_loss = [&] { return loss(model, &adapters, batch); };
  for (Param* p : model.all_params()) {
    fd_check(*p, model_loss, grads, p->name.c_str());
  }
  for (LoraAdapter& a : adapters.adapters) {
    fd_check(a.a, model_loss, grads, "adapter.a");
    fd_check(a.b, model_loss, grads, "adapter.b");
  }
  return "max rel error " + fmt(worst);
}

// ---------------------------------------------------------------------------
// Criterion 2: LoRA algebra.

std::string criterion_lora_algebra() {
  Rng rng(55);
  // Merge equivalence over 100 random inputs.
  LoraAdapter adapter = init_adapter(rng, "w_q", 8, 6, 3, 7.0);
  for (double& v : adapter.a.value.values()) v = rng.uniform(-1, 1);
  for (double& v : adapter.b.value.values()) v = rng.uniform(-1, 1);
  const Tensor w0 = test::random_tensor({8, 6}, rng);
  const Tensor merged = merge(w0, adapter);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Tensor x = test::random_tensor({6}, rng, -2, 2);
    worst = std::max(worst, max_abs_diff(matmul(merged, x),
                                         lora_forward(w0, adapter, x)));
  }
  require(worst < 1e-9, "merge equivalence off by " + fmt(worst));

  // B = 0 no-op.
  LoraAdapter fresh = init_adapter(rng, "w_v", 8, 6, 3, 3.0);
  const Tensor x = test::random_tensor({6}, rng);
  require(max_abs_diff(lora_forward(w0, fresh, x), matmul(w0, x)) == 0.0,
          "fresh adapter is not a no-op");
  require(max_abs_diff(merge(w0, fresh), w0) == 0.0, "fresh merge changes W0");

  // Alpha linearity.
  LoraAdapter doubled = adapter;
  doubled.alpha = 2.0 * adapter.alpha;
  const Tensor base = matmul(w0, x);
  const Tensor d1 = sub(lora_forward(w0, adapter, x), base);
  const Tensor d2 = sub(lora_forward(w0, doubled, x), base);
  require(max_abs_diff(scale(d1, 2.0), d2) < 1e-12, "alpha linearity broken");

  // rank(delta) <= r by SVD tail.
  double tail = 0.0;
  for (std::size_t r : {1u, 2u, 4u}) {
    LoraAdapter a = init_adapter(rng, "w_q", 10, 8, r, static_cast<double>(r));
    for (double& v : a.a.value.values()) v = rng.uniform(-1, 1);
    for (double& v : a.b.value.values()) v = rng.uniform(-1, 1);
    const std::vector<double> sv = test::singular_values(lora_delta(a));
    for (std::size_t i = r; i < sv.size(); ++i) tail = std::max(tail, sv[i]);
  }
  require(tail < 1e-9, "SVD tail " + fmt(tail));
  return "merge diff " + fmt(worst) + ", svd tail " + fmt(tail);
}

// ---------------------------------------------------------------------------
// Criterion 3: metric oracles (independent brute-force summation).

RunLog fabricate_log(const std::vector<std::string>& order,
                     std::vector<std::vector<double>> rows) {
  RunLog log;
  log.regime = "vanilla";
  log.order_id = "fab";
  log.order = order;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    StepRecord s;
    s.step = static_cast<int>(i);
    s.lang = order[i];
    s.test_f1 = std::move(rows[i]);
    s.valid_f1 = {0.0};
    log.steps.push_back(std::move(s));
  }
  return log;
}

double brute_p(const RunLog& log, std::size_t s) {
  double sum = 0.0;
  for (std::size_t j = 0; j <= s; ++j) sum += log.steps[s].test_f1[j];
  return sum / static_cast<double>(s + 1);
}

std::string criterion_metric_oracles() {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 2 + rng.below(7);  // T in 2..8
    std::vector<std::string> langs;
    for (std::size_t i = 0; i < t; ++i) langs.push_back("L" + std::to_string(i));
    std::vector<RunLog> logs;
    const std::size_t orders = 1 + rng.below(4);
    for (std::size_t n = 0; n < orders; ++n) {
      std::vector<std::string> order = langs;
      rng.shuffle(order);
      std::vector<std::vector<double>> rows(t, std::vector<double>(t));
      for (auto& row : rows) {
        for (double& v : row) v = rng.uniform();
      }
      logs.push_back(fabricate_log(order, std::move(rows)));
    }

    // CFT / CBT per order.
    for (const RunLog& log : logs) {
      const RMatrix r = RMatrix::from_runlog(log);
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < t; ++i) {
        double xbar = 0.0;
        for (std::size_t j = i + 1; j < t; ++j) xbar += log.steps[i].test_f1[j];
        acc += xbar / static_cast<double>(t - i - 1);
      }
      require(std::abs(cft(r) - acc / static_cast<double>(t - 1)) < 1e-12,
              "cft oracle mismatch");
      double bacc = 0.0;
      for (std::size_t i = 0; i + 1 < t; ++i) {
        bacc += log.steps[t - 1].test_f1[i] - log.steps[i].test_f1[i];
      }
      require(std::abs(cbt(r) - bacc / static_cast<double>(t - 1)) < 1e-12,
              "cbt oracle mismatch");
    }

    // Performance shift.
    const PerLanguageStat shift = performance_shift(logs);
    for (const std::string& lang : langs) {
      double total = 0.0;
      int count = 0;
      for (const RunLog& log : logs) {
        const int i = log.step_of(lang);
        if (i < 1) continue;
        total += brute_p(log, static_cast<std::size_t>(i) - 1) -
                 brute_p(log, static_cast<std::size_t>(i));
        ++count;
      }
      if (count == 0) continue;
      require(std::abs(shift.value.at(lang) - total / count) < 1e-12,
              "shift oracle mismatch");
    }

    // MFT / MBT for h <= 5.
    const int max_h = 5;
    for (int h = 1; h <= max_h; ++h) {
      double total = 0.0;
      std::size_t count = 0;
      for (const RunLog& log : logs) {
        for (std::size_t i = 1; i + static_cast<std::size_t>(h) < t; ++i) {
          total += brute_p(log, i + static_cast<std::size_t>(h)) -
                   brute_p(log, i - 1);
          ++count;
        }
      }
      if (count == 0) continue;
      require(std::abs(mft(logs, h).aggregate -
                       total / static_cast<double>(count)) < 1e-12,
              "mft oracle mismatch at h=" + std::to_string(h));
    }
    for (int h = 0; h <= max_h; ++h) {
      double total = 0.0;
      std::size_t count = 0;
      for (const RunLog& log : logs) {
        for (std::size_t i = static_cast<std::size_t>(h) + 1; i < t; ++i) {
          total += brute_p(log, i) -
                   brute_p(log, i - static_cast<std::size_t>(h) - 1);
          ++count;
        }
      }
      if (count == 0) continue;
      require(std::abs(mbt(logs, h).aggregate -
                       total / static_cast<double>(count)) < 1e-12,
              "mbt oracle mismatch at h=" + std::to_string(h));
    }

    // MBT_0 sample identity: exactly the negated shift, per language.
    const HopStat mbt0 = mbt(logs, 0);
    for (const auto& [lang, value] : mbt0.per_language) {
      require(value == -shift.value.at(lang), "mbt0 != -shift for " + lang);
    }
  }
  return "100 random instances, T <= 8, H <= 5";
}

// ---------------------------------------------------------------------------
// Shared helpers for the training criteria.

GeneratorConfig desk_generator() { return GeneratorConfig{}; }

std::vector<TaskDataset> desk_datasets(std::size_t t, double overlap,
                                       const SplitSizes& sizes,
                                       bool mixed_families) {
  const GeneratorConfig gen = desk_generator();
  std::vector<TaskDataset> out;
  for (std::size_t i = 0; i < t; ++i) {
    LanguageSpec spec;
    spec.lang_id = "syn" + std::to_string(i);
    spec.script_id = static_cast<int>(i);
    spec.family_id = mixed_families ? static_cast<int>(i % 2) : 0;
    spec.vitality = i % 3 == 0 ? Vitality::kLow
                   : i % 3 == 1 ? Vitality::kMid
                                : Vitality::kHigh;
    spec.overlap = overlap;
    spec.seed = 9000 + i;
    out.push_back(generate_language(spec, sizes, gen));
  }
  return out;
}

ModelConfig desk_model(std::size_t t) {
  ModelConfig cfg;
  cfg.vocab_size = desk_generator().required_vocab(static_cast<int>(t) - 1);
  cfg.hidden_dim = 32;
  cfg.max_seq_len = 24;
  cfg.num_labels = desk_generator().num_labels();
  cfg.dropout_rate = 0.1;
  return cfg;
}

RegimeConfig desk_regime(Regime regime, std::size_t rank, std::uint64_t seed) {
  RegimeConfig cfg;
  cfg.regime = regime;
  cfg.lora_rank = rank;
  if (rank > 0) cfg.lora_alpha = static_cast<double>(rank);
  if (cfg.uses_lora()) {
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 12;
    cfg.patience = 4;
  } else {
    cfg.learning_rate = 5e-3;
    cfg.max_epochs = 8;
    cfg.patience = 3;
  }
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Criterion 4: regime identities.

std::string criterion_regime_identities() {
  const SplitSizes sizes{40, 12, 12};
  const std::vector<TaskDataset> single = desk_datasets(1, 0.2, sizes, false);
  ModelConfig cfg = desk_model(1);
  cfg.hidden_dim = 16;  // identity checks do not need the full width

  auto bytes_of = [](const ModelParams& m) {
    std::string out;
    for (const Param* p : m.all_params()) out += tensor_bytes(p->value);
    return out;
  };
  auto adapter_bytes = [](const AdapterSet& s) {
    std::string out;
    for (const LoraAdapter& a : s.adapters) {
      out += tensor_bytes(a.a.value) + tensor_bytes(a.b.value);
    }
    return out;
  };

  // MONO(D) == VANILLA(T=1, D).
  const PerTaskRun mono =
      train_mono(cfg, single, desk_regime(Regime::kMono, 0, 11));
  LanguageOrder order{"identity", {single[0].spec.lang_id}};
  const SequentialRun vanilla =
      train_vanilla(cfg, single, order, desk_regime(Regime::kVanilla, 0, 11));
  require(bytes_of(mono.models[0]) == bytes_of(vanilla.model),
          "MONO != VANILLA at T=1");

  // SHARED(T=1) == NON-SHARED(T=1).
  const SequentialRun shared = train_shared_lora(
      cfg, single, order, desk_regime(Regime::kSharedLora, 4, 11));
  const PerTaskRun non_shared = train_nonshared_lora(
      cfg, single, desk_regime(Regime::kNonSharedLora, 4, 11));
  require(adapter_bytes(*shared.adapters) ==
              adapter_bytes(non_shared.adapters[0]),
          "SHARED != NON-SHARED at T=1");

  // NON-SHARED is invariant to task order (and to parallel execution).
  const std::vector<TaskDataset> three = desk_datasets(3, 0.2, sizes, false);
  ModelConfig cfg3 = desk_model(3);
  cfg3.hidden_dim = 16;
  const RegimeConfig ns = desk_regime(Regime::kNonSharedLora, 4, 13);
  const PerTaskRun fwd = train_nonshared_lora(cfg3, three, ns);
  std::vector<TaskDataset> rev(three.rbegin(), three.rend());
  const PerTaskRun bwd = train_nonshared_lora(cfg3, rev, ns);
  const PerTaskRun par = train_nonshared_lora(cfg3, three, ns, 3);
  for (std::size_t t = 0; t < three.size(); ++t) {
    require(adapter_bytes(fwd.adapters[t]) ==
                adapter_bytes(bwd.adapters[three.size() - 1 - t]),
            "NON-SHARED depends on training order");
    require(adapter_bytes(fwd.adapters[t]) == adapter_bytes(par.adapters[t]),
            "NON-SHARED parallel != serial");
  }

  // Frozen-base bit-identity for both adapter regimes.
  Rng init = Rng(13).fork("model-init");
  ModelParams reference = ModelParams::init(cfg3, init);
  reference.set_encoder_frozen(true);
  const std::uint64_t frozen_before = frozen_params_hash(reference);
  LanguageOrder order3{"o3",
                       {three[0].spec.lang_id, three[1].spec.lang_id,
                        three[2].spec.lang_id}};
  const SequentialRun shared3 = train_shared_lora(
      cfg3, three, order3, desk_regime(Regime::kSharedLora, 4, 13));
  require(frozen_params_hash(shared3.model) == frozen_before,
          "SHARED mutated the frozen base");
  for (const ModelParams& m : fwd.models) {
    require(frozen_params_hash(m) == frozen_before,
            "NON-SHARED mutated the frozen base");
  }
  return "identities hold bit-exactly";
}

// ---------------------------------------------------------------------------
// Criterion 5: directional forgetting reproduction.

struct SeedOutcome {
  double cbt_vanilla = 0.0;
  double cbt_shared = 0.0;
  double final_multi = 0.0;
  double final_vanilla = 0.0;
  double final_shared = 0.0;
  double worst_nonshared_gap = 0.0;
  double learned_mean = 0.0;
  double unseen_mean = 0.0;
};

SeedOutcome run_seed(const std::vector<TaskDataset>& datasets,
                     const ModelConfig& model_cfg, std::uint64_t seed,
                     std::size_t order_index) {
  std::vector<std::string> langs;
  for (const TaskDataset& ds : datasets) langs.push_back(ds.spec.lang_id);
  OrderPolicy policy;
  policy.kind = OrderPolicyKind::kShuffled;
  policy.seed = seed;
  const LanguageOrder order =
      make_orders(policy, langs, order_index + 1, nullptr)[order_index];

  SeedOutcome out;
  const SequentialRun vanilla = train_vanilla(
      model_cfg, datasets, order, desk_regime(Regime::kVanilla, 0, seed));
  const RMatrix rv = RMatrix::from_runlog(vanilla.log);
  out.cbt_vanilla = cbt(rv);
  out.final_vanilla = mean(vanilla.log.steps.back().test_f1);

  double learned = 0.0, unseen = 0.0;
  std::size_t n_learned = 0, n_unseen = 0;
  for (std::size_t i = 0; i < rv.size(); ++i) {
    for (std::size_t j = 0; j < rv.size(); ++j) {
      if (j <= i) {
        learned += rv.at(i, j);
        ++n_learned;
      } else {
        unseen += rv.at(i, j);
        ++n_unseen;
      }
    }
  }
  out.learned_mean = learned / static_cast<double>(n_learned);
  out.unseen_mean = unseen / static_cast<double>(n_unseen);

  const SequentialRun shared = train_shared_lora(
      model_cfg, datasets, order, desk_regime(Regime::kSharedLora, 4, seed));
  out.cbt_shared = cbt(RMatrix::from_runlog(shared.log));
  out.final_shared = mean(shared.log.steps.back().test_f1);

  const SequentialRun multi = train_multi(
      model_cfg, datasets, desk_regime(Regime::kMulti, 0, seed));
  out.final_multi = mean(multi.log.steps[0].test_f1);

  const PerTaskRun mono =
      train_mono(model_cfg, datasets, desk_regime(Regime::kMono, 0, seed));
  const PerTaskRun nonshared = train_nonshared_lora(
      model_cfg, datasets, desk_regime(Regime::kNonSharedLora, 4, seed));
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    const double gap = std::abs(nonshared.log.steps[t].test_f1[t] -
                                mono.log.steps[t].test_f1[t]);
    out.worst_nonshared_gap = std::max(out.worst_nonshared_gap, gap);
  }
  return out;
}

std::string criterion_forgetting() {
  const std::size_t T = 6;
  const std::vector<TaskDataset> datasets =
      desk_datasets(T, 0.2, SplitSizes{200, 50, 50}, true);
  const ModelConfig model_cfg = desk_model(T);

  std::vector<std::future<SeedOutcome>> futures;
  for (std::uint64_t n = 0; n < 5; ++n) {
    futures.push_back(std::async(std::launch::async, [&, n] {
      return run_seed(datasets, model_cfg, 100 + n, n);
    }));
  }
  int ok_cbt = 0, ok_rank = 0, ok_gap = 0;
  std::ostringstream detail;
  double learned_sum = 0.0, unseen_sum = 0.0;
  for (auto& f : futures) {
    const SeedOutcome o = f.get();
    if (o.cbt_vanilla < 0.0 && o.cbt_shared <= o.cbt_vanilla) ++ok_cbt;
    if (o.final_multi > o.final_vanilla && o.final_vanilla > o.final_shared) {
      ++ok_rank;
    }
    if (o.worst_nonshared_gap <= 0.02) ++ok_gap;
    learned_sum += o.learned_mean;
    unseen_sum += o.unseen_mean;
    detail << " [cbtV " << fmt(o.cbt_vanilla) << " cbtS " << fmt(o.cbt_shared)
           << " M/V/S " << fmt(o.final_multi) << '/' << fmt(o.final_vanilla)
           << '/' << fmt(o.final_shared) << " gap "
           << fmt(o.worst_nonshared_gap) << ']';
  }
  require(ok_cbt >= 4, "CBT ordering held in only " + std::to_string(ok_cbt) +
                           "/5 seeds:" + detail.str());
  require(ok_rank >= 4, "final-F1 ordering held in only " +
                            std::to_string(ok_rank) + "/5 seeds:" + detail.str());
  require(ok_gap >= 4, "NON-SHARED vs MONO gap <= 2pts held in only " +
                           std::to_string(ok_gap) + "/5 seeds:" + detail.str());
  // Evaluation-matrix reading: the learned (lower-left) triangle is the
  // cooler (higher-scoring) one.
  require(learned_sum > unseen_sum, "learned triangle not above unseen");
  return std::to_string(ok_cbt) + "/5 cbt, " + std::to_string(ok_rank) +
         "/5 ordering, " + std::to_string(ok_gap) + "/5 gap," + detail.str();
}

// ---------------------------------------------------------------------------
// Criterion 6: script-overlap effect on forward transfer.

std::string criterion_overlap_effect() {
  const std::size_t T = 4;
  const SplitSizes sizes{120, 30, 30};
  const std::vector<TaskDataset> low = desk_datasets(T, 0.0, sizes, false);
  const std::vector<TaskDataset> high = desk_datasets(T, 0.9, sizes, false);
  const ModelConfig model_cfg = desk_model(T);

  auto cft_for = [&](const std::vector<TaskDataset>& datasets,
                     std::uint64_t seed, std::size_t index) {
    std::vector<std::string> langs;
    for (const TaskDataset& ds : datasets) langs.push_back(ds.spec.lang_id);
    OrderPolicy policy;
    policy.kind = OrderPolicyKind::kShuffled;
    policy.seed = seed;
    const LanguageOrder order =
        make_orders(policy, langs, index + 1, nullptr)[index];
    const SequentialRun run = train_vanilla(
        model_cfg, datasets, order, desk_regime(Regime::kVanilla, 0, seed));
    return cft(RMatrix::from_runlog(run.log));
  };

  std::vector<std::future<std::pair<double, double>>> futures;
  for (std::uint64_t n = 0; n < 5; ++n) {
    futures.push_back(std::async(std::launch::async, [&, n] {
      return std::make_pair(cft_for(low, 300 + n, n), cft_for(high, 300 + n, n));
    }));
  }
  int ok = 0;
  std::ostringstream detail;
  for (auto& f : futures) {
    const auto [cft_low, cft_high] = f.get();
    if (cft_high > cft_low) ++ok;
    detail << " [" << fmt(cft_low) << " vs " << fmt(cft_high) << ']';
  }
  require(ok >= 4, "CFT(0.9) > CFT(0.0) held in only " + std::to_string(ok) +
                       "/5 seeds:" + detail.str());
  return std::to_string(ok) + "/5 seeds," + detail.str();
}

// ---------------------------------------------------------------------------
// Criterion 7: annotation grammar round trip.

std::string criterion_parser() {
  // Hand example pinned by the format.
  const AnnotatedUtterance hand = parse_annot_utt("wake me at [time : nine am]");
  require(hand.tokens ==
              std::vector<std::string>{"wake", "me", "at", "nine", "am"},
          "hand example tokens");
  require(hand.tags ==
              std::vector<std::string>{"O", "O", "O", "B-time", "I-time"},
          "hand example tags");

  // 1000 generated utterances round trip.
  const GeneratorConfig gen = desk_generator();
  const std::vector<TaskDataset> datasets =
      desk_datasets(2, 0.4, SplitSizes{520, 25, 25}, true);
  std::size_t checked = 0;
  for (const TaskDataset& ds : datasets) {
    for (const LabeledSequence& seq : ds.train) {
      if (checked >= 1000) break;
      const std::string annot = sequence_to_annot(seq, ds.label_names, nullptr);
      const AnnotatedUtterance parsed = parse_annot_utt(annot);
      require(parsed.normalized() == annot, "round trip changed the text");
      require(parsed.tokens.size() == seq.tokens.size(), "token count drift");
      for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        require(parsed.tags[i] ==
                    ds.label_names[static_cast<std::size_t>(seq.labels[i])],
                "tag drift at " + std::to_string(i));
      }
      ++checked;
    }
  }
  require(checked >= 1000, "only " + std::to_string(checked) + " utterances");
  (void)gen;

  // Malformed inputs are rejected with positions.
  const std::vector<std::string> bad = {
      "[a : x [b : y]]", "wake ] me", "[time : nine", "[time nine]",
      "[ : nine]", "at [time : ] nine"};
  for (const std::string& input : bad) {
    try {
      parse_annot_utt(input);
      throw CheckFailure("accepted malformed input: " + input);
    } catch (const ParseError& e) {
      require(std::string(e.what()).find("position") != std::string::npos,
              "no position in: " + std::string(e.what()));
    }
  }
  return std::to_string(checked) + " utterances round-tripped, " +
         std::to_string(bad.size()) + " malformed inputs rejected";
}

// ---------------------------------------------------------------------------
// Criterion 8: parameter accounting relations.

std::string criterion_parameter_accounting() {
  test::TempDir tmp("accept_params");
  const std::string out = (tmp.path() / "out").string();
  std::ostringstream config;
  config << R"({
  "seed": 3, "num_orders": 1, "max_hop": 2, "output_dir": ")" << out << R"(",
  "languages": [
    {"lang_id": "syn0", "script_id": 0, "overlap": 0.2, "seed": 100},
    {"lang_id": "syn1", "script_id": 1, "overlap": 0.2, "seed": 101},
    {"lang_id": "syn2", "script_id": 2, "overlap": 0.2, "seed": 102}
  ],
  "split_sizes": {"train": 16, "valid": 8, "test": 8},
  "generator": {"max_seq_len": 16},
  "model": {"hidden_dim": 16, "max_seq_len": 16},
  "regimes": [
    {"regime": "multi", "learning_rate": 0.005, "max_epochs": 2, "patience": 1},
    {"regime": "mono", "learning_rate": 0.005, "max_epochs": 2, "patience": 1},
    {"regime": "vanilla", "learning_rate": 0.005, "max_epochs": 2, "patience": 1},
    {"regime": "shared_lora", "rank": 2, "learning_rate": 0.01, "max_epochs": 2, "patience": 1},
    {"regime": "shared_lora", "rank": 4, "learning_rate": 0.01, "max_epochs": 2, "patience": 1},
    {"regime": "shared_lora", "rank": 8, "learning_rate": 0.01, "max_epochs": 2, "patience": 1},
    {"regime": "nonshared_lora", "rank": 4, "learning_rate": 0.01, "max_epochs": 2, "patience": 1}
  ],
  "orders": {"policy": "shuffled"}
})";
  const ExperimentConfig cfg =
      ExperimentConfig::from_json_text(config.str(), "accept8");
  const ExperimentData data = materialize(cfg);
  run_sweep(cfg, data, cfg.output_dir, 2);
  const SweepSummary summary = summarize_sweep(cfg, data, cfg.output_dir);
  require(summary.missing.empty(), "sweep incomplete");

  auto row = [&](const std::string& tag) -> const RegimeSummaryRow& {
    for (const RegimeSummaryRow& r : summary.rows) {
      if (r.tag == tag) return r;
    }
    throw CheckFailure("missing summary row " + tag);
  };
  const std::size_t T = data.datasets.size();
  require(row("mono").total_trainable == T * row("multi").trainable_per_task,
          "MONO total != T x MULTI trainable");
  require(row("nonshared_lora_r4").total_trainable ==
              T * row("shared_lora_r4").trainable_per_task,
          "NON-SHARED total != T x SHARED per-task count");
  require(row("nonshared_lora_r4").adapter_params ==
              row("shared_lora_r4").adapter_params,
          "adapter count mismatch");
  const std::size_t r2 = row("shared_lora_r2").adapter_params;
  require(row("shared_lora_r4").adapter_params == 2 * r2 &&
              row("shared_lora_r8").adapter_params == 4 * r2,
          "rank ratios not exactly 1:2:4");
  return "MONO = " + std::to_string(row("mono").total_trainable) +
         ", MULTI = " + std::to_string(row("multi").trainable_per_task) +
         ", adapter r2/r4/r8 = " + std::to_string(r2) + "/" +
         std::to_string(2 * r2) + "/" + std::to_string(4 * r2);
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical reruns.

std::string criterion_determinism() {
  const SplitSizes sizes{40, 12, 12};
  const std::vector<TaskDataset> datasets = desk_datasets(2, 0.2, sizes, false);
  ModelConfig cfg = desk_model(2);
  cfg.hidden_dim = 16;
  ExperimentData data;
  data.datasets = datasets;
  data.model = cfg;
  data.schema = desk_generator().schema();
  for (const TaskDataset& ds : datasets) {
    data.vitality[ds.spec.lang_id] = ds.spec.vitality;
    data.resource_weights[ds.spec.lang_id] = 1.0;
  }
  LanguageOrder order{"o", {datasets[0].spec.lang_id, datasets[1].spec.lang_id}};

  test::TempDir tmp("accept_det");
  std::size_t compared = 0;
  for (const Regime regime :
       {Regime::kVanilla, Regime::kSharedLora, Regime::kNonSharedLora}) {
    const std::size_t rank = regime == Regime::kVanilla ? 0 : 4;
    const RegimeConfig rc = desk_regime(regime, rank, 77);
    const auto out_a = tmp.path() / (to_string(regime) + "_a");
    const auto out_b = tmp.path() / (to_string(regime) + "_b");
    run_single(data, rc, order, 0, out_a);
    run_single(data, rc, order, 0, out_b);

    // Every artifact byte-for-byte: logs, score matrices, checkpoints.
    std::vector<std::filesystem::path> files;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(out_a)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    require(!files.empty(), "no artifacts written");
    for (const std::filesystem::path& file : files) {
      const auto rel = std::filesystem::relative(file, out_a);
      require(std::filesystem::exists(out_b / rel),
              "missing twin artifact " + rel.string());
      require(read_file(file) == read_file(out_b / rel),
              "artifact differs: " + rel.string());
      ++compared;
    }
  }
  return std::to_string(compared) + " artifacts byte-identical";
}

struct Criterion {
  int id;
  const char* name;
  std::function<std::string()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::cerr << "usage: langloop_acceptance [--only N]\n";
      return 64;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", criterion_gradients},
      {2, "lora algebra", criterion_lora_algebra},
      {3, "metric oracles", criterion_metric_oracles},
      {4, "regime identities", criterion_regime_identities},
      {5, "forgetting reproduction", criterion_forgetting},
      {6, "script-overlap effect", criterion_overlap_effect},
      {7, "annotation parser", criterion_parser},
      {8, "parameter accounting", criterion_parameter_accounting},
      {9, "determinism", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::string detail = c.run();
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      std::cout << "[PASS] criterion " << c.id << ": " << c.name << " ("
                << detail << ", " << fmt(secs) << "s)\n";
    } catch (const std::exception& e) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      std::cout << "[FAIL] criterion " << c.id << ": " << c.name << " — "
                << e.what() << " (" << fmt(secs) << "s)\n";
      ++failures;
    }
    std::cout.flush();
  }
  return failures;
}
