// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "langloop/errors.hpp"

namespace langloop {

std::vector<Span> extract_spans(const std::vector<int>& labels,
                                const LabelSchema& schema) {
  std::vector<Span> spans;
  std::optional<Span> open;
  auto close = [&] {
    if (open) {
      spans.push_back(*open);
      open.reset();
    }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (schema.is_begin(l)) {
      close();
      open = Span{schema.slot_of(l), i, i + 1};
    } else if (schema.is_inside(l)) {
      if (open && open->slot == schema.slot_of(l) && open->end == i) {
        open->end = i + 1;
      } else {
        // Orphan inside tag (prediction noise): treat as a span start.
        close();
        open = Span{schema.slot_of(l), i, i + 1};
      }
    } else {
      close();
    }
  }
  close();
  return spans;
}

SpanCounts& SpanCounts::operator+=(const SpanCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

double SpanCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double SpanCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double SpanCounts::f1() const {
  if (tp == 0 && fp == 0 && fn == 0) return 1.0;  // both sides span-free
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

SpanCounts span_counts(const std::vector<int>& predicted,
                       const std::vector<int>& gold,
                       const LabelSchema& schema) {
  if (predicted.size() != gold.size()) {
    throw Error("span_counts: prediction length " +
                std::to_string(predicted.size()) + " vs gold " +
                std::to_string(gold.size()));
  }
  std::vector<Span> pred = extract_spans(predicted, schema);
  std::vector<Span> ref = extract_spans(gold, schema);
  std::sort(pred.begin(), pred.end());
  std::sort(ref.begin(), ref.end());
  SpanCounts counts;
  std::size_t i = 0, j = 0;
  while (i < pred.size() && j < ref.size()) {
    if (pred[i] == ref[j]) {
      ++counts.tp;
      ++i;
      ++j;
    } else if (pred[i] < ref[j]) {
      ++counts.fp;
      ++i;
    } else {
      ++counts.fn;
      ++j;
    }
  }
  counts.fp += pred.size() - i;
  counts.fn += ref.size() - j;
  return counts;
}

double span_f1(const std::vector<std::vector<int>>& predicted,
               const std::vector<std::vector<int>>& gold,
               const LabelSchema& schema) {
  if (predicted.size() != gold.size()) {
    throw Error("span_f1: batch size mismatch");
  }
  SpanCounts total;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    total += span_counts(predicted[i], gold[i], schema);
  }
  return total.f1();
}

RMatrix RMatrix::from_runlog(const RunLog& log) {
  log.validate();
  const std::size_t t = log.order.size();
  if (log.steps.size() != t) {
    throw Error("r-matrix: log has " + std::to_string(log.steps.size()) +
                " steps for " + std::to_string(t) + " tasks");
  }
  RMatrix r;
  r.langs = log.order;
  r.cells.resize(t * t);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      r.at(i, j) = log.steps[i].test_f1[j];
    }
  }
  return r;
}

LabeledMatrix RMatrix::to_labeled() const {
  LabeledMatrix m;
  m.row_labels = langs;
  m.col_labels = langs;
  m.cells = cells;
  return m;
}

RMatrix RMatrix::from_labeled(const LabeledMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error("r-matrix: expected square matrix, got " +
                std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
  }
  RMatrix r;
  r.langs = m.col_labels;
  r.cells = m.cells;
  return r;
}

std::vector<double> running_average(const RMatrix& r) {
  const std::size_t t = r.size();
  std::vector<double> p(t);
  for (std::size_t s = 0; s < t; ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j <= s; ++j) sum += r.at(s, j);
    p[s] = sum / static_cast<double>(s + 1);
  }
  return p;
}

double cft(const RMatrix& r) {
  const std::size_t t = r.size();
  if (t < 2) {
    throw Error("cft: needs at least 2 tasks");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < t; ++j) row += r.at(i, j);
    total += row / static_cast<double>(t - i - 1);
  }
  return total / static_cast<double>(t - 1);
}

double cbt(const RMatrix& r) {
  const std::size_t t = r.size();
  if (t < 2) {
    throw Error("cbt: needs at least 2 tasks");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t; ++i) {
    total += r.at(t - 1, i) - r.at(i, i);
  }
  return total / static_cast<double>(t - 1);
}

namespace {

struct SampleAccumulator {
  double total = 0.0;
  std::size_t count = 0;
  std::map<std::string, double> per_language_total;
  std::map<std::string, int> per_language_count;

  void add(const std::string& lang, double sample) {
    total += sample;
    ++count;
    per_language_total[lang] += sample;
    ++per_language_count[lang];
  }

  HopStat finish(int hop, const char* what) const {
    if (count == 0) {
      throw Error(std::string(what) + ": no language has valid indices at hop " +
                  std::to_string(hop) + " (too large for this task count)");
    }
    HopStat stat;
    stat.hop = hop;
    stat.aggregate = total / static_cast<double>(count);
    stat.num_samples = count;
    for (const auto& [lang, sum] : per_language_total) {
      stat.per_language[lang] =
          sum / static_cast<double>(per_language_count.at(lang));
    }
    stat.per_language_samples = per_language_count;
    return stat;
  }
};

struct OrderView {
  RMatrix r;
  std::vector<double> p;
};

std::vector<OrderView> order_views(const std::vector<RunLog>& logs) {
  if (logs.empty()) {
    throw Error("metrics: no run logs");
  }
  std::vector<OrderView> views;
  for (const RunLog& log : logs) {
    OrderView v;
    v.r = RMatrix::from_runlog(log);
    v.p = running_average(v.r);
    views.push_back(std::move(v));
  }
  return views;
}

}  // namespace

PerLanguageStat performance_shift(const std::vector<RunLog>& logs) {
  const std::vector<OrderView> views = order_views(logs);
  // Every language must be present in every order.
  for (const OrderView& v : views) {
    for (const std::string& lang : views.front().r.langs) {
      if (std::find(v.r.langs.begin(), v.r.langs.end(), lang) ==
          v.r.langs.end()) {
        throw Error("performance_shift: language '" + lang +
                    "' absent from an order");
      }
    }
  }
  std::map<std::string, double> totals;
  std::map<std::string, int> counts;
  for (const OrderView& v : views) {
    for (std::size_t i = 1; i < v.r.langs.size(); ++i) {
      const std::string& lang = v.r.langs[i];
      totals[lang] += v.p[i - 1] - v.p[i];
      ++counts[lang];
    }
  }
  PerLanguageStat stat;
  for (const auto& [lang, total] : totals) {
    stat.value[lang] = total / static_cast<double>(counts.at(lang));
  }
  stat.samples = counts;
  return stat;
}

HopStat mft(const std::vector<RunLog>& logs, int hop) {
  if (hop < 1) {
    throw Error("mft: hop must be >= 1");
  }
  SampleAccumulator acc;
  for (const OrderView& v : order_views(logs)) {
    const std::size_t t = v.r.size();
    for (std::size_t i = 0; i < t; ++i) {
      if (i < 1 || i + static_cast<std::size_t>(hop) >= t) continue;
      acc.add(v.r.langs[i], v.p[i + static_cast<std::size_t>(hop)] - v.p[i - 1]);
    }
  }
  return acc.finish(hop, "mft");
}

HopStat mbt(const std::vector<RunLog>& logs, int hop) {
  if (hop < 0) {
    throw Error("mbt: hop must be >= 0");
  }
  SampleAccumulator acc;
  for (const OrderView& v : order_views(logs)) {
    const std::size_t t = v.r.size();
    for (std::size_t i = 0; i < t; ++i) {
      if (i < static_cast<std::size_t>(hop) + 1) continue;
      acc.add(v.r.langs[i], v.p[i] - v.p[i - static_cast<std::size_t>(hop) - 1]);
    }
  }
  return acc.finish(hop, "mbt");
}

HopStat donor_mft_marginal(const std::vector<RunLog>& logs, int hop) {
  if (hop < 0) {
    throw Error("donor_mft_marginal: hop must be >= 0");
  }
  SampleAccumulator acc;
  for (const OrderView& v : order_views(logs)) {
    const std::size_t t = v.r.size();
    for (std::size_t i = 0; i < t; ++i) {
      const std::size_t target = i + static_cast<std::size_t>(hop);
      if (target >= t || target < 1) continue;
      acc.add(v.r.langs[i], v.p[target] - v.p[target - 1]);
    }
  }
  return acc.finish(hop, "donor_mft_marginal");
}

HopStat receiver_mbt_marginal(const std::vector<RunLog>& logs, int hop) {
  if (hop < 0) {
    throw Error("receiver_mbt_marginal: hop must be >= 0");
  }
  SampleAccumulator acc;
  for (const OrderView& v : order_views(logs)) {
    const std::size_t t = v.r.size();
    for (std::size_t pos = 0; pos < t; ++pos) {
      const std::size_t row = pos + static_cast<std::size_t>(hop);
      if (row >= t || row < 1) continue;
      acc.add(v.r.langs[pos], v.r.at(row, pos) - v.r.at(row - 1, pos));
    }
  }
  return acc.finish(hop, "receiver_mbt_marginal");
}

VitalityGroupMeans group_by_vitality(
    const std::map<std::string, double>& scores,
    const std::map<std::string, Vitality>& vitality) {
  double sums[4] = {0, 0, 0, 0};
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& [lang, score] : scores) {
    auto it = vitality.find(lang);
    const Vitality v = it == vitality.end() ? Vitality::kUnassigned : it->second;
    const auto idx = static_cast<std::size_t>(v);
    sums[idx] += score;
    ++counts[idx];
  }
  VitalityGroupMeans out;
  auto mean = [&](Vitality v) -> std::optional<double> {
    const auto idx = static_cast<std::size_t>(v);
    if (counts[idx] == 0) return std::nullopt;
    return sums[idx] / static_cast<double>(counts[idx]);
  };
  out.low = mean(Vitality::kLow);
  out.mid = mean(Vitality::kMid);
  out.high = mean(Vitality::kHigh);
  out.unassigned = mean(Vitality::kUnassigned);
  out.low_n = counts[static_cast<std::size_t>(Vitality::kLow)];
  out.mid_n = counts[static_cast<std::size_t>(Vitality::kMid)];
  out.high_n = counts[static_cast<std::size_t>(Vitality::kHigh)];
  out.unassigned_n = counts[static_cast<std::size_t>(Vitality::kUnassigned)];
  return out;
}

TransferReport build_transfer_report(const std::vector<RunLog>& logs,
                                     int max_hop) {
  if (logs.empty()) {
    throw Error("transfer report: no run logs");
  }
  TransferReport report;
  report.num_orders = logs.size();
  report.max_hop = max_hop;
  report.languages = logs.front().order;
  std::sort(report.languages.begin(), report.languages.end());

  for (const RunLog& log : logs) {
    const RMatrix r = RMatrix::from_runlog(log);
    report.cft_per_order.push_back(cft(r));
    report.cbt_per_order.push_back(cbt(r));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.cft_mean = mean(report.cft_per_order);
  report.cbt_mean = mean(report.cbt_per_order);
  report.p_avg = performance_shift(logs);

  for (int h = 1; h <= max_hop; ++h) {
    try {
      report.mft_hops.push_back(mft(logs, h));
    } catch (const Error&) {
      break;  // hop exceeds what this task count supports
    }
  }
  for (int h = 0; h <= max_hop; ++h) {
    try {
      report.mbt_hops.push_back(mbt(logs, h));
    } catch (const Error&) {
      break;
    }
  }
  for (int h = 0; h <= max_hop; ++h) {
    try {
      report.mft_donor_hops.push_back(donor_mft_marginal(logs, h));
    } catch (const Error&) {
      break;
    }
  }
  for (int h = 0; h <= max_hop; ++h) {
    try {
      report.mbt_receiver_hops.push_back(receiver_mbt_marginal(logs, h));
    } catch (const Error&) {
      break;
    }
  }
  return report;
}

namespace {

nlohmann::json hop_stat_json(const HopStat& s) {
  nlohmann::json j;
  j["hop"] = s.hop;
  j["aggregate"] = s.aggregate;
  j["num_samples"] = s.num_samples;
  j["per_language"] = s.per_language;
  j["per_language_samples"] = s.per_language_samples;
  return j;
}

nlohmann::json hop_list_json(const std::vector<HopStat>& hops,
                             const char* variant, const char* sample) {
  nlohmann::json j;
  j["variant"] = variant;
  j["sample_definition"] = sample;
  j["hops"] = nlohmann::json::array();
  for (const HopStat& s : hops) j["hops"].push_back(hop_stat_json(s));
  return j;
}

}  // namespace

std::string transfer_report_json(const TransferReport& report) {
  nlohmann::json j;
  j["format"] = "langloop-transfer-report-v1";
  j["num_orders"] = report.num_orders;
  j["max_hop"] = report.max_hop;
  j["languages"] = report.languages;
  j["performance_shift"] = {
      {"sign_convention", "positive means degradation after the next task"},
      {"per_language", report.p_avg.value},
      {"per_language_samples", report.p_avg.samples}};
  j["cft"] = {{"mean", report.cft_mean}, {"per_order", report.cft_per_order}};
  j["cbt"] = {{"mean", report.cbt_mean},
              {"per_order", report.cbt_per_order},
              {"sign_convention", "negative means forgetting"}};
  j["mft"] = hop_list_json(report.mft_hops, "aggregate_equation",
                           "P[i+h] - P[i-1] for the language trained at step i");
  j["mbt"] = hop_list_json(report.mbt_hops, "aggregate_equation",
                           "P[i] - P[i-h-1]; at h=0 the negated shift sample");
  j["mft_donor"] = hop_list_json(
      report.mft_donor_hops, "donor_marginal",
      "P[i+h] - P[i+h-1]: running-average change h steps after training");
  j["mbt_receiver"] = hop_list_json(
      report.mbt_receiver_hops, "receiver_marginal",
      "R[i+h][lang] - R[i+h-1][lang]: own-column change caused by the "
      "language trained h steps later");
  return j.dump(2) + "\n";
}

LabeledMatrix hop_matrix(const std::vector<HopStat>& hops,
                         const std::vector<std::string>& languages) {
  LabeledMatrix m;
  m.col_labels = languages;
  for (const HopStat& s : hops) {
    m.row_labels.push_back("hop" + std::to_string(s.hop));
    for (const std::string& lang : languages) {
      auto it = s.per_language.find(lang);
      m.cells.push_back(it == s.per_language.end()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : it->second);
    }
  }
  return m;
}

}  // namespace langloop
