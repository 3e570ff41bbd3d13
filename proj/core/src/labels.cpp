// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/labels.hpp"

#include "langloop/errors.hpp"

namespace langloop {

LabelSchema LabelSchema::from_slot_types(const std::vector<std::string>& slots) {
  LabelSchema schema;
  schema.names.reserve(1 + 2 * slots.size());
  schema.names.push_back("O");
  for (const std::string& slot : slots) {
    schema.names.push_back("B-" + slot);
    schema.names.push_back("I-" + slot);
  }
  return schema;
}

int LabelSchema::id_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool LabelSchema::bio_valid(const std::vector<int>& labels) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= names.size()) return false;
    if (is_inside(l)) {
      if (i == 0) return false;
      const int prev = labels[i - 1];
      if (slot_of(prev) != slot_of(l)) return false;
    }
  }
  return true;
}

void LabelSchema::validate_bio(const std::vector<int>& labels) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= names.size()) {
      throw Error("label id " + std::to_string(l) + " out of schema at index " +
                  std::to_string(i));
    }
    if (is_inside(l)) {
      if (i == 0 || slot_of(labels[i - 1]) != slot_of(l)) {
        throw Error("inside tag without matching begin at index " +
                    std::to_string(i));
      }
    }
  }
}

void validate_sequence(const LabeledSequence& seq, std::size_t max_seq_len,
                       const LabelSchema& schema) {
  if (seq.tokens.empty()) {
    throw Error("empty sequence");
  }
  if (seq.tokens.size() != seq.labels.size()) {
    throw Error("sequence has " + std::to_string(seq.tokens.size()) +
                " tokens but " + std::to_string(seq.labels.size()) + " labels");
  }
  if (seq.tokens.size() > max_seq_len) {
    throw Error("sequence length " + std::to_string(seq.tokens.size()) +
                " exceeds max_seq_len " + std::to_string(max_seq_len));
  }
  schema.validate_bio(seq.labels);
}

}  // namespace langloop
