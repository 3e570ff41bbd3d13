// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/experiment.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/massive.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

namespace {

using nlohmann::json;

LanguageSpec language_spec_from_json(const json& j) {
  LanguageSpec spec;
  spec.lang_id = j.at("lang_id").get<std::string>();
  spec.script_id = j.value("script_id", 0);
  spec.family_id = j.value("family_id", 0);
  spec.vitality = vitality_from_string(j.value("vitality", "mid"));
  spec.overlap = j.value("overlap", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

RegimeConfig regime_from_json(const json& j) {
  RegimeConfig cfg;
  cfg.regime = regime_from_string(j.at("regime").get<std::string>());
  cfg.learning_rate = j.value("learning_rate", 0.0);
  cfg.max_epochs = j.value("max_epochs", 0);
  cfg.patience = j.value("patience", 0);
  cfg.batch_size = j.value("batch_size", 16);
  cfg.lora_rank = j.value("rank", std::size_t{0});
  cfg.lora_alpha = j.value("alpha", 0.0);
  cfg.lora_dropout = j.value("lora_dropout", 0.1);
  cfg.classifier_trainable = j.value("classifier_trainable", true);
  cfg.reset_optimizer_between_tasks =
      j.value("reset_optimizer_between_tasks", true);
  cfg.finalize();
  return cfg;
}

OrderSpec orders_from_json(const json& j) {
  OrderSpec spec;
  const std::string kind = j.value("policy", "shuffled");
  if (kind == "explicit") {
    spec.kind = OrderSpec::Kind::kExplicit;
    spec.explicit_orders =
        j.at("orders").get<std::vector<std::vector<std::string>>>();
  } else if (kind == "file") {
    spec.kind = OrderSpec::Kind::kFile;
    spec.file = j.at("file").get<std::string>();
  } else {
    spec.kind = OrderSpec::Kind::kPolicy;
    if (kind == "shuffled") {
      spec.policy.kind = OrderPolicyKind::kShuffled;
    } else if (kind == "resource_ranked") {
      spec.policy.kind = OrderPolicyKind::kResourceRanked;
    } else if (kind == "destructive_last") {
      spec.policy.kind = OrderPolicyKind::kDestructiveLast;
      spec.policy.destructive =
          j.at("destructive").get<std::vector<std::string>>();
    } else {
      throw ConfigError("unknown order policy '" + kind + "'");
    }
  }
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(name + ": invalid JSON: " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.num_orders = j.value("num_orders", std::size_t{5});
    cfg.max_hop = j.value("max_hop", 9);
    cfg.workers = j.value("workers", 1);
    cfg.output_dir = j.value("output_dir", std::string("out"));
    if (j.contains("languages")) {
      for (const auto& entry : j.at("languages")) {
        cfg.languages.push_back(language_spec_from_json(entry));
      }
    }
    if (j.contains("massive_path")) {
      cfg.massive_path = j.at("massive_path").get<std::string>();
    }
    if (j.contains("split_sizes")) {
      const auto& s = j.at("split_sizes");
      cfg.split_sizes.train = s.value("train", std::size_t{200});
      cfg.split_sizes.valid = s.value("valid", std::size_t{50});
      cfg.split_sizes.test = s.value("test", std::size_t{50});
    }
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      cfg.generator.vocab_size = g.value("vocab_size", std::size_t{0});
      cfg.generator.shared_pool_size =
          g.value("shared_pool_size", std::size_t{42});
      cfg.generator.script_range_size =
          g.value("script_range_size", std::size_t{42});
      if (g.contains("slot_types")) {
        cfg.generator.slot_types =
            g.at("slot_types").get<std::vector<std::string>>();
      }
      cfg.generator.templates_per_family =
          g.value("templates_per_family", std::size_t{6});
      cfg.generator.max_seq_len = g.value("max_seq_len", std::size_t{24});
      cfg.generator.vitality_scales_train =
          g.value("vitality_scales_train", false);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      cfg.model.vocab_size = m.value("vocab_size", std::size_t{0});
      cfg.model.hidden_dim = m.value("hidden_dim", std::size_t{32});
      cfg.model.max_seq_len = m.value("max_seq_len", std::size_t{24});
      cfg.model.num_labels = m.value("num_labels", std::size_t{0});
      cfg.model.dropout_rate = m.value("dropout_rate", 0.1);
    }
    if (j.contains("regimes")) {
      for (const auto& entry : j.at("regimes")) {
        cfg.regimes.push_back(regime_from_json(entry));
      }
    }
    if (j.contains("orders")) {
      cfg.orders = orders_from_json(j.at("orders"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(name + ": bad config structure: " + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json_text(text, path.filename().string());
}

void ExperimentConfig::validate() const {
  if (num_orders < 1) {
    throw ConfigError("config: num_orders must be >= 1");
  }
  if (max_hop < 0) {
    throw ConfigError("config: max_hop must be >= 0");
  }
  if (workers < 1) {
    throw ConfigError("config: workers must be >= 1");
  }
  if (languages.empty() && massive_path.empty()) {
    throw ConfigError("config: need languages or massive_path");
  }
  if (!languages.empty() && !massive_path.empty()) {
    throw ConfigError("config: languages and massive_path are exclusive");
  }
  std::set<std::string> seen;
  for (const LanguageSpec& spec : languages) {
    if (!seen.insert(spec.lang_id).second) {
      throw ConfigError("config: duplicate lang_id '" + spec.lang_id + "'");
    }
  }
  if (regimes.empty()) {
    throw ConfigError("config: no regimes configured");
  }
  if (orders.kind == OrderSpec::Kind::kExplicit &&
      orders.explicit_orders.empty()) {
    throw ConfigError("config: explicit orders are empty");
  }
}

std::vector<std::string> ExperimentData::languages() const {
  std::vector<std::string> out;
  out.reserve(datasets.size());
  for (const TaskDataset& ds : datasets) out.push_back(ds.spec.lang_id);
  return out;
}

const TaskDataset& ExperimentData::dataset(const std::string& lang) const {
  for (const TaskDataset& ds : datasets) {
    if (ds.spec.lang_id == lang) return ds;
  }
  throw Error("no dataset for language '" + lang + "'");
}

namespace {

double vitality_multiplier(Vitality v) {
  switch (v) {
    case Vitality::kLow: return 0.5;
    case Vitality::kHigh: return 1.5;
    default: return 1.0;
  }
}

}  // namespace

ExperimentData materialize(const ExperimentConfig& config) {
  ExperimentData data;
  data.model = config.model;
  if (!config.massive_path.empty()) {
    IngestResult ingested = ingest_massive(config.massive_path);
    data.schema = LabelSchema{ingested.label_names};
    for (auto& [locale, ds] : ingested.datasets) {
      data.datasets.push_back(std::move(ds));
    }
    if (data.model.vocab_size == 0) {
      data.model.vocab_size = ingested.vocab.size();
    }
    if (data.model.num_labels == 0) {
      data.model.num_labels = ingested.label_names.size();
    }
  } else {
    GeneratorConfig gen = config.generator;
    int max_script = 0;
    for (const LanguageSpec& spec : config.languages) {
      max_script = std::max(max_script, spec.script_id);
    }
    if (gen.vocab_size == 0) {
      gen.vocab_size = gen.required_vocab(max_script);
    }
    gen.max_seq_len = std::min(gen.max_seq_len, config.model.max_seq_len);
    data.schema = gen.schema();
    for (const LanguageSpec& spec : config.languages) {
      data.datasets.push_back(
          generate_language(spec, config.split_sizes, gen));
    }
    if (data.model.vocab_size == 0) {
      data.model.vocab_size = gen.vocab_size;
    } else if (data.model.vocab_size < gen.vocab_size) {
      throw ConfigError("config: model vocab_size " +
                        std::to_string(data.model.vocab_size) +
                        " smaller than the generator needs (" +
                        std::to_string(gen.vocab_size) + ")");
    }
    if (data.model.num_labels == 0) {
      data.model.num_labels = gen.num_labels();
    }
  }
  data.model.validate();
  for (const TaskDataset& ds : data.datasets) {
    if (ds.label_names.size() != data.model.num_labels) {
      throw ConfigError("config: num_labels " +
                        std::to_string(data.model.num_labels) +
                        " does not match schema of " +
                        std::to_string(ds.label_names.size()));
    }
    data.vitality[ds.spec.lang_id] = ds.spec.vitality;
    data.resource_weights[ds.spec.lang_id] =
        static_cast<double>(ds.train.size()) *
        vitality_multiplier(ds.spec.vitality);
  }
  return data;
}

std::vector<LanguageOrder> experiment_orders(const ExperimentConfig& config,
                                             const ExperimentData& data) {
  const std::vector<std::string> langs = data.languages();
  switch (config.orders.kind) {
    case OrderSpec::Kind::kExplicit: {
      std::vector<LanguageOrder> orders;
      std::size_t i = 0;
      for (const auto& lang_ids : config.orders.explicit_orders) {
        LanguageOrder order{"explicit_" + std::to_string(i++), lang_ids};
        validate_permutation(order, langs);
        orders.push_back(std::move(order));
      }
      if (orders.size() < config.num_orders) {
        throw ConfigError("config: " + std::to_string(config.num_orders) +
                          " orders requested but only " +
                          std::to_string(orders.size()) + " provided");
      }
      orders.resize(config.num_orders);
      return orders;
    }
    case OrderSpec::Kind::kFile: {
      std::vector<LanguageOrder> orders = load_orders_file(config.orders.file);
      for (const LanguageOrder& order : orders) {
        validate_permutation(order, langs);
      }
      if (orders.size() < config.num_orders) {
        throw ConfigError("config: orders file has too few orders");
      }
      orders.resize(config.num_orders);
      return orders;
    }
    case OrderSpec::Kind::kPolicy: {
      OrderPolicy policy = config.orders.policy;
      if (policy.seed == 0) policy.seed = config.seed;
      return make_orders(policy, langs, config.num_orders,
                         &data.resource_weights);
    }
  }
  throw ConfigError("config: bad order spec");
}

std::filesystem::path run_dir(const std::filesystem::path& out,
                              const std::string& tag, std::size_t order_index,
                              std::uint64_t seed) {
  return out / tag /
         ("ord" + std::to_string(order_index) + "_seed" + std::to_string(seed));
}

namespace {

void write_run_artifacts(const std::filesystem::path& dir, const RunLog& log,
                         const ModelParams* model,
                         const std::vector<const ModelParams*>& task_models,
                         const AdapterSet* adapters,
                         const std::vector<const AdapterSet*>& task_adapters,
                         std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  log.save(dir / "runlog.jsonl");

  LabeledMatrix scores;
  scores.col_labels = log.order;
  for (const StepRecord& s : log.steps) {
    scores.row_labels.push_back("step" + std::to_string(s.step) + ":" + s.lang);
    scores.cells.insert(scores.cells.end(), s.test_f1.begin(), s.test_f1.end());
  }
  scores.save(dir / "scores.csv");
  if (log.steps.size() == log.order.size()) {
    RMatrix::from_runlog(log).to_labeled().save(dir / "r_matrix.csv");
  }

  const std::filesystem::path ckpt = dir / "checkpoints";
  if (model != nullptr) {
    save_model(ckpt / "model", *model, log.regime, seed);
    if (adapters != nullptr) {
      save_adapter_set(ckpt / "adapters", *adapters, "shared", seed);
    }
  }
  for (std::size_t t = 0; t < task_models.size(); ++t) {
    const std::filesystem::path task_dir = ckpt / ("task_" + log.order[t]);
    save_model(task_dir / "model", *task_models[t], log.regime, seed);
    if (t < task_adapters.size() && task_adapters[t] != nullptr) {
      save_adapter_set(task_dir / "adapters", *task_adapters[t], log.order[t],
                       seed);
    }
  }
}

}  // namespace

RunLog run_single(const ExperimentData& data, const RegimeConfig& regime,
                  const LanguageOrder& order, std::size_t order_index,
                  const std::filesystem::path& out_dir, int workers) {
  const std::string tag = regime_tag(regime.regime, regime.lora_rank);
  const std::filesystem::path dir =
      run_dir(out_dir, tag, order_index, regime.seed);

  switch (regime.regime) {
    case Regime::kVanilla: {
      SequentialRun run =
          train_vanilla(data.model, data.datasets, order, regime);
      write_run_artifacts(dir, run.log, &run.model, {}, nullptr, {},
                          regime.seed);
      return run.log;
    }
    case Regime::kSharedLora: {
      SequentialRun run =
          train_shared_lora(data.model, data.datasets, order, regime);
      write_run_artifacts(dir, run.log, &run.model, {}, &*run.adapters, {},
                          regime.seed);
      return run.log;
    }
    case Regime::kMulti: {
      SequentialRun run = train_multi(data.model, data.datasets, regime);
      write_run_artifacts(dir, run.log, &run.model, {},
                          run.adapters ? &*run.adapters : nullptr, {},
                          regime.seed);
      return run.log;
    }
    case Regime::kMono: {
      PerTaskRun run = train_mono(data.model, data.datasets, regime, workers);
      std::vector<const ModelParams*> models;
      for (const ModelParams& m : run.models) models.push_back(&m);
      write_run_artifacts(dir, run.log, nullptr, models, nullptr, {},
                          regime.seed);
      return run.log;
    }
    case Regime::kNonSharedLora: {
      PerTaskRun run =
          train_nonshared_lora(data.model, data.datasets, regime, workers);
      std::vector<const ModelParams*> models;
      std::vector<const AdapterSet*> adapters;
      for (const ModelParams& m : run.models) models.push_back(&m);
      for (const AdapterSet& a : run.adapters) adapters.push_back(&a);
      write_run_artifacts(dir, run.log, nullptr, models, nullptr, adapters,
                          regime.seed);
      return run.log;
    }
  }
  throw Error("run_single: unhandled regime");
}

void run_sweep(const ExperimentConfig& config, const ExperimentData& data,
               const std::filesystem::path& out_dir, int workers) {
  const std::vector<LanguageOrder> orders = experiment_orders(config, data);

  struct Job {
    RegimeConfig regime;
    LanguageOrder order;
    std::size_t order_index;
  };
  std::vector<Job> jobs;
  for (std::size_t n = 0; n < orders.size(); ++n) {
    for (const RegimeConfig& base : config.regimes) {
      RegimeConfig rc = base;
      rc.seed = config.seed + n;
      jobs.push_back(Job{rc, orders[n], n});
    }
  }

  auto run_job = [&](const Job& job) {
    run_single(data, job.regime, job.order, job.order_index, out_dir,
               /*workers=*/1);
  };

  if (workers <= 1) {
    for (const Job& job : jobs) run_job(job);
    return;
  }
  std::size_t next = 0;
  while (next < jobs.size()) {
    const std::size_t wave = std::min<std::size_t>(
        static_cast<std::size_t>(workers), jobs.size() - next);
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < wave; ++w) {
      futures.push_back(
          std::async(std::launch::async, run_job, std::cref(jobs[next + w])));
    }
    for (auto& f : futures) f.get();
    next += wave;
  }
}

std::vector<RunLog> load_regime_logs(const std::string& tag,
                                     const std::filesystem::path& sweep_dir) {
  const std::filesystem::path regime_dir = sweep_dir / tag;
  if (!std::filesystem::is_directory(regime_dir)) {
    throw IoError("missing sweep artifacts: " + regime_dir.string());
  }
  std::vector<std::filesystem::path> run_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(regime_dir)) {
    if (entry.is_directory()) run_dirs.push_back(entry.path());
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  std::vector<RunLog> logs;
  for (const std::filesystem::path& dir : run_dirs) {
    const std::filesystem::path log_path = dir / "runlog.jsonl";
    if (!std::filesystem::exists(log_path)) {
      throw IoError("missing run log: " + log_path.string());
    }
    logs.push_back(RunLog::load(log_path));
  }
  if (logs.empty()) {
    throw IoError("no runs found under " + regime_dir.string());
  }
  return logs;
}

void write_metrics(const ExperimentConfig& config,
                   const std::filesystem::path& sweep_dir) {
  for (const RegimeConfig& regime : config.regimes) {
    const std::string tag = regime_tag(regime.regime, regime.lora_rank);
    const std::vector<RunLog> logs = load_regime_logs(tag, sweep_dir);
    if (!regime_is_sequential(tag)) continue;

    const TransferReport report = build_transfer_report(logs, config.max_hop);
    const std::filesystem::path regime_dir = sweep_dir / tag;
    write_file(regime_dir / "transfer_report.json",
               transfer_report_json(report));
    hop_matrix(report.mbt_receiver_hops, report.languages)
        .save(regime_dir / "mbt_receiver.csv");
    hop_matrix(report.mft_donor_hops, report.languages)
        .save(regime_dir / "mft_donor.csv");
    // Per-order evaluation matrices, derived from the logs.
    for (std::size_t i = 0; i < logs.size(); ++i) {
      RMatrix::from_runlog(logs[i]).to_labeled().save(
          regime_dir / ("r_matrix_ord" + std::to_string(i) + ".csv"));
    }
  }
}

}  // namespace langloop
