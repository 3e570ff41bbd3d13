// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace langloop {

/// BIO tag universe shared by every language in an experiment:
/// id 0 is "O", slot k owns ids 2k+1 ("B-<slot>") and 2k+2 ("I-<slot>").
struct LabelSchema {
  std::vector<std::string> names;

  static LabelSchema from_slot_types(const std::vector<std::string>& slots);

  std::size_t size() const { return names.size(); }
  std::size_t num_slots() const { return (names.size() - 1) / 2; }

  bool is_outside(int label) const { return label == 0; }
  bool is_begin(int label) const { return label > 0 && label % 2 == 1; }
  bool is_inside(int label) const { return label > 0 && label % 2 == 0; }
  int slot_of(int label) const { return label <= 0 ? -1 : (label - 1) / 2; }
  int begin_label(int slot) const { return 2 * slot + 1; }
  int inside_label(int slot) const { return 2 * slot + 2; }

  /// Label id for a tag name ("O", "B-time", ...); -1 if absent.
  int id_of(const std::string& name) const;

  bool bio_valid(const std::vector<int>& labels) const;
  /// Throws Error naming the first offending index.
  void validate_bio(const std::vector<int>& labels) const;
};

/// One example of a task dataset: token ids with aligned BIO label ids.
struct LabeledSequence {
  std::vector<int> tokens;
  std::vector<int> labels;
};

/// Checks equal lengths, non-emptiness, length bound and BIO validity.
void validate_sequence(const LabeledSequence& seq, std::size_t max_seq_len,
                       const LabelSchema& schema);

}  // namespace langloop
