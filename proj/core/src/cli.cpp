// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/cli.hpp"

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/experiment.hpp"
#include "langloop/heatmap.hpp"
#include "langloop/massive.hpp"
#include "langloop/serialize.hpp"
#include "langloop/summary.hpp"

namespace langloop {

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  int hops = -1;
  int orders = 0;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* config =
      cmd->add_option("--config", opts.config_path, "experiment config JSON");
  if (config_required) config->required();
  cmd->add_option("--out", opts.out, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "seed override");
  cmd->add_option("--workers", opts.workers, "worker pool size override");
  cmd->add_option("--hops,-H", opts.hops, "max hop distance override");
  cmd->add_option("--orders,-N", opts.orders, "number of orders override");
  cmd->add_flag("--dry-run", opts.dry_run,
                "validate inputs and print the plan without running");
}

ExperimentConfig load_config(const CommonOptions& opts) {
  if (opts.config_path.empty()) {
    throw ConfigError("--config is required");
  }
  ExperimentConfig cfg = ExperimentConfig::from_file(opts.config_path);
  if (opts.seed.has_value()) cfg.seed = *opts.seed;
  if (opts.workers > 0) cfg.workers = opts.workers;
  if (opts.hops >= 0) cfg.max_hop = opts.hops;
  if (opts.orders > 0) cfg.num_orders = static_cast<std::size_t>(opts.orders);
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  cfg.validate();
  return cfg;
}

void print_plan_header(const ExperimentConfig& cfg, const ExperimentData& data) {
  std::cout << "languages: ";
  for (const auto& lang : data.languages()) std::cout << lang << ' ';
  std::cout << "\nmodel: d=" << data.model.hidden_dim
            << " vocab=" << data.model.vocab_size
            << " labels=" << data.model.num_labels
            << " max_seq_len=" << data.model.max_seq_len << '\n';
  std::cout << "orders: " << cfg.num_orders << ", seed " << cfg.seed
            << ", max hop " << cfg.max_hop << '\n';
}

int cmd_generate(const CommonOptions& opts) {
  const ExperimentConfig cfg = load_config(opts);
  if (cfg.languages.empty()) {
    throw ConfigError("generate: config has no synthetic languages");
  }
  const ExperimentData data = materialize(cfg);
  if (opts.dry_run) {
    print_plan_header(cfg, data);
    std::cout << "would write " << (cfg.output_dir / "synthetic.jsonl").string()
              << '\n';
    return kExitOk;
  }
  export_jsonl(cfg.output_dir / "synthetic.jsonl", data.datasets);
  nlohmann::json manifest;
  manifest["format"] = "langloop-generate-v1";
  manifest["languages"] = data.languages();
  manifest["vocab_size"] = data.model.vocab_size;
  manifest["num_labels"] = data.model.num_labels;
  manifest["label_names"] = data.schema.names;
  write_file(cfg.output_dir / "generate_manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << (cfg.output_dir / "synthetic.jsonl").string()
            << " (" << data.datasets.size() << " languages)\n";
  return kExitOk;
}

int cmd_ingest(const CommonOptions& opts, const std::string& input) {
  if (input.empty()) {
    throw ConfigError("ingest: --input is required");
  }
  const IngestResult result = ingest_massive(input);
  std::size_t total = 0;
  for (const auto& [locale, ds] : result.datasets) {
    total += ds.train.size() + ds.valid.size() + ds.test.size();
  }
  std::cout << "ingested " << result.datasets.size() << " locales, " << total
            << " utterances, vocab " << result.vocab.size() << ", labels "
            << result.num_labels() << '\n';
  if (opts.dry_run) {
    return kExitOk;
  }
  const std::filesystem::path out =
      opts.out.empty() ? std::filesystem::path("ingested")
                       : std::filesystem::path(opts.out);
  for (const auto& [locale, ds] : result.datasets) {
    export_jsonl(out / ("locale_" + locale + ".jsonl"), {ds}, &result.vocab);
  }
  nlohmann::json manifest;
  manifest["format"] = "langloop-ingest-v1";
  manifest["vocab"] = result.vocab;
  manifest["label_names"] = result.label_names;
  std::vector<std::string> locales;
  for (const auto& [locale, ds] : result.datasets) locales.push_back(locale);
  manifest["locales"] = locales;
  write_file(out / "ingest_manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << out.string() << '\n';
  return kExitOk;
}

int cmd_train(const CommonOptions& opts, const std::string& regime,
              int order_index) {
  const ExperimentConfig cfg = load_config(opts);
  const ExperimentData data = materialize(cfg);
  const std::vector<LanguageOrder> orders = experiment_orders(cfg, data);
  if (order_index < 0 || static_cast<std::size_t>(order_index) >= orders.size()) {
    throw ConfigError("train: order index " + std::to_string(order_index) +
                      " outside [0, " + std::to_string(orders.size()) + ")");
  }
  const RegimeConfig* chosen = nullptr;
  for (const RegimeConfig& rc : cfg.regimes) {
    if (regime_tag(rc.regime, rc.lora_rank) == regime) {
      chosen = &rc;
      break;
    }
  }
  if (chosen == nullptr) {
    throw ConfigError("train: regime '" + regime +
                      "' is not configured in this experiment");
  }
  RegimeConfig rc = *chosen;
  rc.seed = cfg.seed + static_cast<std::uint64_t>(order_index);
  if (opts.dry_run) {
    print_plan_header(cfg, data);
    std::cout << "would train " << regime << " on order " << order_index
              << " into "
              << run_dir(cfg.output_dir, regime,
                         static_cast<std::size_t>(order_index), rc.seed)
                     .string()
              << '\n';
    return kExitOk;
  }
  run_single(data, rc, orders[static_cast<std::size_t>(order_index)],
             static_cast<std::size_t>(order_index), cfg.output_dir,
             cfg.workers);
  std::cout << "trained " << regime << " order " << order_index << '\n';
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const ExperimentConfig cfg = load_config(opts);
  const ExperimentData data = materialize(cfg);
  if (opts.dry_run) {
    print_plan_header(cfg, data);
    for (const RegimeConfig& rc : cfg.regimes) {
      for (std::size_t n = 0; n < cfg.num_orders; ++n) {
        std::cout << "would run "
                  << run_dir(cfg.output_dir,
                             regime_tag(rc.regime, rc.lora_rank), n,
                             cfg.seed + n)
                         .string()
                  << '\n';
      }
    }
    return kExitOk;
  }
  run_sweep(cfg, data, cfg.output_dir, cfg.workers);
  std::cout << "sweep complete: " << cfg.output_dir.string() << '\n';
  return kExitOk;
}

int cmd_metrics(const CommonOptions& opts, const std::string& in) {
  const ExperimentConfig cfg = load_config(opts);
  const std::filesystem::path sweep_dir =
      in.empty() ? cfg.output_dir : std::filesystem::path(in);
  if (opts.dry_run) {
    for (const RegimeConfig& rc : cfg.regimes) {
      const std::string tag = regime_tag(rc.regime, rc.lora_rank);
      if (regime_is_sequential(tag)) {
        std::cout << "would write " << (sweep_dir / tag).string()
                  << "/transfer_report.json\n";
      }
    }
    return kExitOk;
  }
  write_metrics(cfg, sweep_dir);
  std::cout << "metrics written under " << sweep_dir.string() << '\n';
  return kExitOk;
}

int cmd_heatmap(const CommonOptions& opts, const std::string& input,
                const std::string& output, const std::string& midpoint,
                const std::string& title) {
  if (!std::filesystem::exists(input)) {
    throw IoError("heatmap: no such input " + input);
  }
  const LabeledMatrix matrix = LabeledMatrix::load(input);
  HeatmapStyle style;
  style.title = title;
  if (midpoint == "zero") {
    style.midpoint = 0.0;
  } else if (midpoint == "mean") {
    double sum = 0.0;
    for (double v : matrix.cells) sum += v;
    style.midpoint = sum / static_cast<double>(matrix.cells.size());
  } else if (midpoint != "auto") {
    try {
      style.midpoint = std::stod(midpoint);
    } catch (const std::exception&) {
      throw ConfigError("heatmap: bad --midpoint '" + midpoint + "'");
    }
  }
  if (opts.dry_run) {
    std::cout << "heatmap: " << matrix.rows() << " x " << matrix.cols()
              << " cells from " << input << '\n';
    return kExitOk;
  }
  write_file(output, render_heatmap_svg(matrix, style));
  std::cout << "wrote " << output << '\n';
  return kExitOk;
}

int cmd_params(const CommonOptions& opts, const std::string& in) {
  const ExperimentConfig cfg = load_config(opts);
  const ExperimentData data = materialize(cfg);
  const std::filesystem::path sweep_dir =
      in.empty() ? cfg.output_dir : std::filesystem::path(in);
  const SweepSummary summary = summarize_sweep(cfg, data, sweep_dir);
  std::cout << summary_text(summary);
  if (!opts.dry_run) {
    write_file(sweep_dir / "params_report.txt", summary_text(summary));
    write_file(sweep_dir / "params_report.csv", summary_csv(summary));
  }
  if (!summary.missing.empty()) {
    throw IoError("params: sweep is missing " +
                  std::to_string(summary.missing.size()) + " run(s)");
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"langloop: a desk-scale multilingual continual-learning lab"};
  app.require_subcommand(1);

  CommonOptions generate_opts;
  auto* generate = app.add_subcommand(
      "generate", "generate synthetic task data as JSON-lines");
  add_common(generate, generate_opts, true);

  CommonOptions ingest_opts;
  std::string ingest_input;
  auto* ingest =
      app.add_subcommand("ingest", "validate and normalize a slot-filling "
                                    "JSON-lines corpus");
  ingest->add_option("--input", ingest_input, "JSON-lines corpus")->required();
  add_common(ingest, ingest_opts, false);

  CommonOptions train_opts;
  std::string train_regime;
  int train_order_index = 0;
  auto* train =
      app.add_subcommand("train", "run one regime on one language order");
  train->add_option("--regime", train_regime, "regime tag, e.g. vanilla")
      ->required();
  train->add_option("--order-index", train_order_index, "order index")
      ->default_val(0);
  add_common(train, train_opts, true);

  CommonOptions sweep_opts;
  auto* sweep =
      app.add_subcommand("sweep", "run every configured regime x order");
  add_common(sweep, sweep_opts, true);

  CommonOptions metrics_opts;
  std::string metrics_in;
  auto* metrics = app.add_subcommand(
      "metrics", "derive transfer reports from a finished sweep");
  metrics->add_option("--in", metrics_in, "sweep directory");
  add_common(metrics, metrics_opts, true);

  CommonOptions heatmap_opts;
  std::string heatmap_input, heatmap_output, heatmap_title;
  std::string heatmap_midpoint = "auto";
  auto* heatmap =
      app.add_subcommand("heatmap", "render a labeled matrix CSV as SVG");
  heatmap->add_option("--input", heatmap_input, "matrix CSV")->required();
  heatmap->add_option("--output", heatmap_output, "output SVG")->required();
  heatmap->add_option("--midpoint", heatmap_midpoint,
                      "auto | zero | mean | <number>");
  heatmap->add_option("--title", heatmap_title, "plot title");
  add_common(heatmap, heatmap_opts, false);

  CommonOptions params_opts;
  std::string params_in;
  auto* params = app.add_subcommand(
      "params", "method comparison table: trainable parameters and F1");
  params->add_option("--in", params_in, "sweep directory");
  add_common(params, params_opts, true);

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return cmd_generate(generate_opts);
    if (ingest->parsed()) return cmd_ingest(ingest_opts, ingest_input);
    if (train->parsed()) {
      return cmd_train(train_opts, train_regime, train_order_index);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (metrics->parsed()) return cmd_metrics(metrics_opts, metrics_in);
    if (heatmap->parsed()) {
      return cmd_heatmap(heatmap_opts, heatmap_input, heatmap_output,
                         heatmap_midpoint, heatmap_title);
    }
    if (params->parsed()) return cmd_params(params_opts, params_in);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitBadData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitMissingArtifact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace langloop
