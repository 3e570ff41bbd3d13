// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "langloop/csv.hpp"
#include "langloop/labels.hpp"
#include "langloop/runlog.hpp"
#include "langloop/tasks.hpp"

namespace langloop {

// ---------------------------------------------------------------------------
// Span-level F1 (micro, exact type + boundary match).

struct Span {
  int slot;
  std::size_t begin;
  std::size_t end;  // exclusive
  auto operator<=>(const Span&) const = default;
};

/// Decodes BIO label ids into typed spans. An inside tag that does not
/// continue a span of the same type starts a new span (predictions may
/// violate the scheme; gold never does).
std::vector<Span> extract_spans(const std::vector<int>& labels,
                                const LabelSchema& schema);

struct SpanCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  SpanCounts& operator+=(const SpanCounts& o);
  double precision() const;
  double recall() const;
  /// 2PR/(P+R); 1 when both prediction and gold are span-free.
  double f1() const;
};

SpanCounts span_counts(const std::vector<int>& predicted,
                       const std::vector<int>& gold,
                       const LabelSchema& schema);

/// Micro span F1 over aligned batches; rejects length mismatches.
double span_f1(const std::vector<std::vector<int>>& predicted,
               const std::vector<std::vector<int>>& gold,
               const LabelSchema& schema);

// ---------------------------------------------------------------------------
// Evaluation matrix.

/// Square matrix R: R[i][j] is the test score on the j-th task of the order
/// after the i-th training step finished; the final model is row T-1.
struct RMatrix {
  std::vector<std::string> langs;  // column (and row) task order
  std::vector<double> cells;       // row-major T x T

  std::size_t size() const { return langs.size(); }
  double at(std::size_t i, std::size_t j) const {
    return cells[i * size() + j];
  }
  double& at(std::size_t i, std::size_t j) { return cells[i * size() + j]; }

  /// Requires one step per task (sequential regimes).
  static RMatrix from_runlog(const RunLog& log);

  LabeledMatrix to_labeled() const;
  static RMatrix from_labeled(const LabeledMatrix& m);
};

/// Running average P[s]: mean of row s over the tasks seen through step s
/// (columns 0..s).
std::vector<double> running_average(const RMatrix& r);

/// Forward transfer: mean over rows i of the mean of R[i][j], j > i.
/// Requires T >= 2.
double cft(const RMatrix& r);

/// Backward transfer: mean over i < T-1 of R[T-1][i] - R[i][i].
/// Requires T >= 2. Negative values indicate forgetting.
double cbt(const RMatrix& r);

// ---------------------------------------------------------------------------
// Shift and multi-hop statistics over a set of runs (one per order).

struct PerLanguageStat {
  std::map<std::string, double> value;  // mean over contributing orders
  std::map<std::string, int> samples;   // contributing order count
};

/// Average performance shift per language: for a language trained at step i
/// (i >= 1) the sample is P[i-1] - P[i]; positive means degradation.
PerLanguageStat performance_shift(const std::vector<RunLog>& logs);

struct HopStat {
  int hop = 0;
  double aggregate = 0.0;       // mean over all samples pooled across orders
  std::size_t num_samples = 0;
  std::map<std::string, double> per_language;
  std::map<std::string, int> per_language_samples;
};

/// Hop-h forward transfer, h >= 1: sample for language at step i is
/// P[i+h] - P[i-1]; languages lacking valid indices are excluded. Rejects a
/// hop with no valid language.
HopStat mft(const std::vector<RunLog>& logs, int hop);

/// Hop-h backward transfer, h >= 0: sample for language at step i is
/// P[i] - P[i-h-1]. At h = 0 each sample is exactly the negated performance
/// shift sample.
HopStat mbt(const std::vector<RunLog>& logs, int hop);

/// Heatmap variant (donor): the marginal running-average change observed h
/// steps after the language was trained, P[i+h] - P[i+h-1].
HopStat donor_mft_marginal(const std::vector<RunLog>& logs, int hop);

/// Heatmap variant (receiver): the marginal change of the language's own
/// column caused by the language trained h steps after it,
/// R[i+h][pos] - R[i+h-1][pos].
HopStat receiver_mbt_marginal(const std::vector<RunLog>& logs, int hop);

// ---------------------------------------------------------------------------
// Grouping and the aggregate report.

struct VitalityGroupMeans {
  std::optional<double> low, mid, high, unassigned;
  std::size_t low_n = 0, mid_n = 0, high_n = 0, unassigned_n = 0;
};

VitalityGroupMeans group_by_vitality(
    const std::map<std::string, double>& scores,
    const std::map<std::string, Vitality>& vitality);

struct TransferReport {
  std::size_t num_orders = 0;
  int max_hop = 0;
  std::vector<std::string> languages;
  PerLanguageStat p_avg;
  std::vector<double> cft_per_order;
  double cft_mean = 0.0;
  std::vector<double> cbt_per_order;
  double cbt_mean = 0.0;
  std::vector<HopStat> mft_hops;           // h = 1.. (valid hops only)
  std::vector<HopStat> mbt_hops;           // h = 0..
  std::vector<HopStat> mft_donor_hops;     // labeled variant
  std::vector<HopStat> mbt_receiver_hops;  // labeled variant
};

/// Aggregates the metric suite over N order runs of one sequential regime.
TransferReport build_transfer_report(const std::vector<RunLog>& logs,
                                     int max_hop);

/// JSON rendering with explicit variant labels and sign conventions.
std::string transfer_report_json(const TransferReport& report);

/// Hop x language matrix (rows = hops) for heatmap rendering; cells with no
/// valid sample are NaN.
LabeledMatrix hop_matrix(const std::vector<HopStat>& hops,
                         const std::vector<std::string>& languages);

}  // namespace langloop
