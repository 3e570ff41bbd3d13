// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/runlog.hpp"

#include <sstream>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

bool regime_is_sequential(const std::string& regime_tag) {
  return regime_tag.rfind("vanilla", 0) == 0 ||
         regime_tag.rfind("shared_lora", 0) == 0;
}

int RunLog::step_of(const std::string& lang) const {
  for (const StepRecord& s : steps) {
    if (s.lang == lang) return s.step;
  }
  return -1;
}

void RunLog::validate() const {
  if (order.empty()) {
    throw Error("runlog: empty language order");
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const StepRecord& s = steps[i];
    if (s.step != static_cast<int>(i)) {
      throw Error("runlog: step records out of sequence at index " +
                  std::to_string(i));
    }
    if (s.test_f1.size() != order.size()) {
      throw Error("runlog: step " + std::to_string(i) + " has " +
                  std::to_string(s.test_f1.size()) + " scores, expected " +
                  std::to_string(order.size()));
    }
    for (double f : s.test_f1) {
      if (f < 0.0 || f > 1.0) {
        throw Error("runlog: F1 out of [0, 1] at step " + std::to_string(i));
      }
    }
    if (regime_is_sequential(regime) && s.lang != order[i]) {
      throw Error("runlog: step " + std::to_string(i) + " trained '" + s.lang +
                  "' but order says '" + order[i] + "'");
    }
  }
}

std::string RunLog::to_jsonl() const {
  std::ostringstream out;
  nlohmann::json header;
  header["type"] = "header";
  header["format"] = "langloop-runlog-v1";
  header["regime"] = regime;
  header["order_id"] = order_id;
  header["seed"] = seed;
  header["order"] = order;
  out << header.dump() << '\n';
  for (const StepRecord& s : steps) {
    nlohmann::json j;
    j["type"] = "step";
    j["step"] = s.step;
    j["lang"] = s.lang;
    j["test_f1"] = s.test_f1;
    j["valid_f1"] = s.valid_f1;
    j["epochs_used"] = s.epochs_used;
    j["early_stopped"] = s.early_stopped;
    out << j.dump() << '\n';
  }
  return out.str();
}

RunLog RunLog::from_jsonl(const std::string& text, const std::string& name) {
  RunLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
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
    const std::string type = j.value("type", "");
    if (type == "header") {
      log.regime = j.at("regime").get<std::string>();
      log.order_id = j.at("order_id").get<std::string>();
      log.seed = j.at("seed").get<std::uint64_t>();
      log.order = j.at("order").get<std::vector<std::string>>();
      have_header = true;
    } else if (type == "step") {
      StepRecord s;
      s.step = j.at("step").get<int>();
      s.lang = j.at("lang").get<std::string>();
      s.test_f1 = j.at("test_f1").get<std::vector<double>>();
      s.valid_f1 = j.at("valid_f1").get<std::vector<double>>();
      s.epochs_used = j.at("epochs_used").get<int>();
      s.early_stopped = j.at("early_stopped").get<bool>();
      log.steps.push_back(std::move(s));
    } else {
      throw ParseError(name + ": unknown record type on line " +
                           std::to_string(line_no),
                       line_no);
    }
  }
  if (!have_header) {
    throw ParseError(name + ": missing header record", line_no);
  }
  log.validate();
  return log;
}

void RunLog::save(const std::filesystem::path& path) const {
  write_file(path, to_jsonl());
}

RunLog RunLog::load(const std::filesystem::path& path) {
  return from_jsonl(read_file(path), path.filename().string());
}

}  // namespace langloop
