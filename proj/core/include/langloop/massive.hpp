// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "langloop/tasks.hpp"

namespace langloop {

/// Ingested corpus: per-locale datasets over one shared vocabulary (built
/// from the train partitions of every locale) and one shared label schema
/// (slot names sorted lexicographically).
struct IngestResult {
  std::map<std::string, TaskDataset> datasets;  // locale -> dataset
  std::vector<std::string> label_names;
  std::vector<std::string> vocab;  // index = token id; [0]=<pad>, [1]=<unk>
  std::unordered_map<std::string, int> token_ids;

  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t num_labels() const { return label_names.size(); }
};

/// Reads a JSON-lines file with fields locale, partition (train|dev|test),
/// utt, annot_utt. Tokenization is whitespace via the annotation parser;
/// tokens unseen in training map to the unk id. Malformed lines are rejected
/// with their line number; duplicates are kept.
IngestResult ingest_massive(const std::filesystem::path& path);
IngestResult ingest_massive_stream(std::istream& in, const std::string& name);

/// Writes datasets in the same JSON-lines format. Token ids are rendered
/// through `vocab` when provided, else as "tok<id>".
void export_jsonl(const std::filesystem::path& path,
                  const std::vector<TaskDataset>& datasets,
                  const std::vector<std::string>* vocab = nullptr);

/// Renders one sequence to the annotated format (used by export and tests).
std::string sequence_to_annot(const LabeledSequence& seq,
                              const std::vector<std::string>& label_names,
                              const std::vector<std::string>* vocab);

}  // namespace langloop
