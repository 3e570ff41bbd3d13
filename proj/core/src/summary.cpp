// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

/// Per-language final F1 of one run, keyed by lang.
std::map<std::string, double> final_per_language(const RunLog& log,
                                                 Regime regime) {
  std::map<std::string, double> out;
  if (log.steps.empty()) {
    throw Error("summary: run log has no steps");
  }
  switch (regime) {
    case Regime::kVanilla:
    case Regime::kSharedLora:
    case Regime::kMulti: {
      const StepRecord& last = log.steps.back();
      for (std::size_t j = 0; j < log.order.size(); ++j) {
        out[log.order[j]] = last.test_f1[j];
      }
      break;
    }
    case Regime::kMono:
    case Regime::kNonSharedLora: {
      // Own-task score: model/adapter t evaluated on task t.
      for (std::size_t t = 0; t < log.steps.size(); ++t) {
        out[log.order[t]] = log.steps[t].test_f1[t];
      }
      break;
    }
  }
  return out;
}

RegimeSummaryRow parameter_row(const ExperimentData& data,
                               const RegimeConfig& regime) {
  RegimeSummaryRow row;
  row.regime = regime.regime;
  row.rank = regime.lora_rank;
  row.tag = regime_tag(regime.regime, regime.lora_rank);

  // Counts come from a freshly initialized model with the regime's frozen
  // flags applied; only shapes matter.
  Rng rng(0);
  ModelParams model = ModelParams::init(data.model, rng);
  AdapterSet adapters;
  const AdapterSet* adapters_ptr = nullptr;
  if (regime.uses_lora()) {
    model.set_encoder_frozen(true);
    for (Param* p : model.head_params()) {
      p->frozen = !regime.classifier_trainable;
    }
    Rng arng(0);
    adapters = init_adapter_set(arng, lora_targets(), data.model.hidden_dim,
                                data.model.hidden_dim, regime.lora_rank,
                                regime.lora_alpha > 0
                                    ? regime.lora_alpha
                                    : static_cast<double>(regime.lora_rank),
                                regime.lora_dropout);
    adapters_ptr = &adapters;
  } else {
    model.set_all_frozen(false);
  }
  const TrainableBreakdown counts = count_trainable(model, adapters_ptr);
  row.base_params = counts.base;
  row.head_params = counts.head;
  row.adapter_params = counts.adapter;
  row.trainable_per_task = counts.total();
  const std::size_t tasks = data.datasets.size();
  const bool per_task =
      regime.regime == Regime::kMono || regime.regime == Regime::kNonSharedLora;
  row.total_trainable = per_task ? counts.total() * tasks : counts.total();
  return row;
}

}  // namespace

SweepSummary summarize_sweep(const ExperimentConfig& config,
                             const ExperimentData& data,
                             const std::filesystem::path& sweep_dir) {
  SweepSummary summary;
  for (const RegimeConfig& regime : config.regimes) {
    RegimeSummaryRow row = parameter_row(data, regime);

    std::vector<RunLog> logs;
    try {
      logs = load_regime_logs(row.tag, sweep_dir);
    } catch (const IoError& e) {
      summary.missing.push_back(e.what());
      summary.rows.push_back(std::move(row));
      continue;
    }
    if (logs.size() < config.num_orders) {
      summary.missing.push_back(row.tag + ": expected " +
                                std::to_string(config.num_orders) +
                                " runs, found " + std::to_string(logs.size()));
    }

    std::map<std::string, double> totals;
    std::map<std::string, int> counts;
    for (const RunLog& log : logs) {
      for (const auto& [lang, f1] : final_per_language(log, regime.regime)) {
        totals[lang] += f1;
        ++counts[lang];
      }
    }
    double grand = 0.0;
    for (const auto& [lang, total] : totals) {
      const double mean = total / counts.at(lang);
      row.per_language_f1[lang] = mean;
      grand += mean;
    }
    row.mean_f1 = totals.empty() ? 0.0 : grand / static_cast<double>(totals.size());
    row.groups = group_by_vitality(row.per_language_f1, data.vitality);
    row.num_runs = logs.size();
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
  return buf;
}

std::string opt_pct(const std::optional<double>& v) {
  return v.has_value() ? pct(*v) : std::string("-");
}

}  // namespace

std::string summary_text(const SweepSummary& summary) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof(line), "%-20s %12s %12s %8s   %7s %7s %7s %7s\n",
                "method", "trainable", "total", "runs", "F1%", "low%",
                "mid%", "high%");
  out << line;
  out << std::string(96, '-') << '\n';
  for (const RegimeSummaryRow& row : summary.rows) {
    std::snprintf(line, sizeof(line), "%-20s %12zu %12zu %8zu   %7s %7s %7s %7s\n",
                  row.tag.c_str(), row.trainable_per_task, row.total_trainable,
                  row.num_runs, row.num_runs == 0 ? "-" : pct(row.mean_f1).c_str(),
                  opt_pct(row.groups.low).c_str(), opt_pct(row.groups.mid).c_str(),
                  opt_pct(row.groups.high).c_str());
    out << line;
  }
  if (!summary.missing.empty()) {
    out << "\nmissing runs:\n";
    for (const std::string& m : summary.missing) {
      out << "  " << m << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(const SweepSummary& summary) {
  std::ostringstream out;
  out << "method,rank,base_params,head_params,adapter_params,"
         "trainable_per_task,total_trainable,runs,mean_f1,low,mid,high,"
         "unassigned\n";
  auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? format_double(*v) : std::string();
  };
  for (const RegimeSummaryRow& row : summary.rows) {
    out << row.tag << ',' << row.rank << ',' << row.base_params << ','
        << row.head_params << ',' << row.adapter_params << ','
        << row.trainable_per_task << ',' << row.total_trainable << ','
        << row.num_runs << ',' << format_double(row.mean_f1) << ','
        << opt(row.groups.low) << ',' << opt(row.groups.mid) << ','
        << opt(row.groups.high) << ',' << opt(row.groups.unassigned) << '\n';
  }
  return out.str();
}

}  // namespace langloop
