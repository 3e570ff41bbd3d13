// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "langloop/labels.hpp"

namespace langloop {

enum class Vitality { kLow, kMid, kHigh, kUnassigned };

std::string to_string(Vitality v);
Vitality vitality_from_string(const std::string& s);

/// A synthetic "language": script selects a private token id range, family
/// selects the template grammar, overlap is the probability that a content
/// token is drawn from the shared pool instead of the private range.
struct LanguageSpec {
  std::string lang_id;
  int script_id = 0;
  int family_id = 0;
  Vitality vitality = Vitality::kMid;
  double overlap = 0.0;
  std::uint64_t seed = 0;
};

struct SplitSizes {
  std::size_t train = 200;
  std::size_t valid = 50;
  std::size_t test = 50;
};

/// Token id space: 0 pad, 1 unk, then the shared pool, then one private range
/// per script. Each range is partitioned into equal-width groups: one filler
/// group plus one group per slot type, so that the slot type of a span is
/// recoverable from its tokens and every language expresses the same schema.
struct GeneratorConfig {
  std::size_t vocab_size = 0;  // 0 = derive from the largest script id used
  std::size_t shared_pool_size = 42;
  std::size_t script_range_size = 42;
  std::vector<std::string> slot_types = {"time",  "place", "person",
                                         "item",  "count", "event"};
  std::size_t templates_per_family = 6;
  std::size_t max_seq_len = 24;
  /// When set, the train split size is scaled by vitality
  /// (low 0.5x, mid 1x, high 1.5x).
  bool vitality_scales_train = false;

  LabelSchema schema() const { return LabelSchema::from_slot_types(slot_types); }
  std::size_t num_labels() const { return 1 + 2 * slot_types.size(); }
  std::size_t groups_per_range() const { return slot_types.size() + 1; }
  /// First token id of the shared pool.
  std::size_t shared_base() const { return 2; }
  std::size_t script_base(int script_id) const;
  /// Minimal vocab size covering scripts 0..max_script_id.
  std::size_t required_vocab(int max_script_id) const;
  void validate() const;
};

/// One language's task data.
struct TaskDataset {
  LanguageSpec spec;
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> valid;
  std::vector<LabeledSequence> test;
  std::vector<std::string> label_names;
};

/// Deterministic dataset generation: fully determined by (spec minus lang_id,
/// sizes, generator config). Splits contain no duplicate token sequences.
TaskDataset generate_language(const LanguageSpec& spec, const SplitSizes& sizes,
                              const GeneratorConfig& config);

/// Train-split size after the optional vitality multiplier.
std::size_t effective_train_size(const SplitSizes& sizes, Vitality vitality,
                                 const GeneratorConfig& config);

}  // namespace langloop
