// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/massive.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "langloop/annot.hpp"
#include "langloop/errors.hpp"
#include "langloop/model.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

namespace {

struct RawRecord {
  std::string locale;
  std::string partition;
  AnnotatedUtterance utt;
};

std::vector<RawRecord> read_records(std::istream& in, const std::string& name) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": malformed JSON on line " +
                           std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
    RawRecord rec;
    try {
      rec.locale = j.at("locale").get<std::string>();
      rec.partition = j.at("partition").get<std::string>();
      j.at("utt").get<std::string>();  // required by the format
      const auto annot = j.at("annot_utt").get<std::string>();
      rec.utt = parse_annot_utt(annot);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": missing field on line " +
                           std::to_string(line_no) + ": " + e.what(),
                       line_no);
    } catch (const ParseError& e) {
      throw ParseError(name + ": bad annot_utt on line " +
                           std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
    if (rec.partition != "train" && rec.partition != "dev" &&
        rec.partition != "test") {
      throw ParseError(name + ": unknown partition '" + rec.partition +
                           "' on line " + std::to_string(line_no),
                       line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

IngestResult ingest_massive_stream(std::istream& in, const std::string& name) {
  const std::vector<RawRecord> records = read_records(in, name);
  if (records.empty()) {
    throw ParseError(name + ": no records", 0);
  }

  // Shared label schema: slot names sorted for determinism.
  std::set<std::string> slots;
  for (const RawRecord& rec : records) {
    for (const std::string& tag : rec.utt.tags) {
      if (tag.size() > 2 && tag[1] == '-') slots.insert(tag.substr(2));
    }
  }
  IngestResult out;
  out.label_names =
      LabelSchema::from_slot_types({slots.begin(), slots.end()}).names;
  const LabelSchema schema{out.label_names};

  // Shared vocabulary from all train partitions, first-seen order.
  out.vocab = {"<pad>", "<unk>"};
  out.token_ids = {{"<pad>", kPadTokenId}, {"<unk>", kUnkTokenId}};
  for (const RawRecord& rec : records) {
    if (rec.partition != "train") continue;
    for (const std::string& tok : rec.utt.tokens) {
      if (out.token_ids.emplace(tok, static_cast<int>(out.vocab.size())).second) {
        out.vocab.push_back(tok);
      }
    }
  }

  std::size_t max_len = 0;
  for (const RawRecord& rec : records) {
    LabeledSequence seq;
    for (const std::string& tok : rec.utt.tokens) {
      auto it = out.token_ids.find(tok);
      seq.tokens.push_back(it == out.token_ids.end() ? kUnkTokenId
                                                     : it->second);
    }
    for (const std::string& tag : rec.utt.tags) {
      seq.labels.push_back(schema.id_of(tag));
    }
    max_len = std::max(max_len, seq.tokens.size());

    TaskDataset& ds = out.datasets[rec.locale];
    if (ds.spec.lang_id.empty()) {
      ds.spec.lang_id = rec.locale;
      ds.spec.vitality = Vitality::kUnassigned;
      ds.label_names = out.label_names;
    }
    if (rec.partition == "train") {
      ds.train.push_back(std::move(seq));
    } else if (rec.partition == "dev") {
      ds.valid.push_back(std::move(seq));
    } else {
      ds.test.push_back(std::move(seq));
    }
  }
  return out;
}

IngestResult ingest_massive(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return ingest_massive_stream(in, path.filename().string());
}

std::string sequence_to_annot(const LabeledSequence& seq,
                              const std::vector<std::string>& label_names,
                              const std::vector<std::string>* vocab) {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const int tok = seq.tokens[i];
    if (vocab != nullptr && static_cast<std::size_t>(tok) < vocab->size()) {
      tokens.push_back((*vocab)[static_cast<std::size_t>(tok)]);
    } else {
      tokens.push_back("tok" + std::to_string(tok));
    }
    const int label = seq.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= label_names.size()) {
      throw Error("export: label id " + std::to_string(label) +
                  " outside schema");
    }
    tags.push_back(label_names[static_cast<std::size_t>(label)]);
  }
  return render_annot_utt(tokens, tags);
}

void export_jsonl(const std::filesystem::path& path,
                  const std::vector<TaskDataset>& datasets,
                  const std::vector<std::string>* vocab) {
  std::ostringstream out;
  for (const TaskDataset& ds : datasets) {
    const struct {
      const std::vector<LabeledSequence>* split;
      const char* name;
    } splits[] = {{&ds.train, "train"}, {&ds.valid, "dev"}, {&ds.test, "test"}};
    for (const auto& [split, partition] : splits) {
      for (const LabeledSequence& seq : *split) {
        const std::string annot =
            sequence_to_annot(seq, ds.label_names, vocab);
        const AnnotatedUtterance plain = parse_annot_utt(annot);
        std::string utt;
        for (std::size_t i = 0; i < plain.tokens.size(); ++i) {
          if (i > 0) utt += ' ';
          utt += plain.tokens[i];
        }
        nlohmann::json j;
        j["locale"] = ds.spec.lang_id;
        j["partition"] = partition;
        j["utt"] = utt;
        j["annot_utt"] = annot;
        out << j.dump() << '\n';
      }
    }
  }
  write_file(path, out.str());
}

}  // namespace langloop
