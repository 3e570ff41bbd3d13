// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/annot.hpp"

#include <cctype>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c) {
  return !is_space(c) && c != '[' && c != ']';
}

}  // namespace

std::string AnnotatedUtterance::normalized() const {
  return render_annot_utt(tokens, tags);
}

AnnotatedUtterance parse_annot_utt(const std::string& raw) {
  AnnotatedUtterance out;
  const std::size_t n = raw.size();
  std::size_t i = 0;
  bool in_span = false;
  std::string slot;
  std::size_t span_open_pos = 0;
  std::size_t span_tokens = 0;

  auto skip_ws = [&] {
    while (i < n && is_space(raw[i])) ++i;
  };
  auto read_word = [&] {
    const std::size_t start = i;
    while (i < n && is_word_char(raw[i])) ++i;
    return raw.substr(start, i - start);
  };

  skip_ws();
  if (i == n) {
    throw ParseError("empty annotated utterance", 0);
  }
  while (i < n) {
    const char c = raw[i];
    if (c == '[') {
      if (in_span) {
        throw ParseError("nested span", i);
      }
      span_open_pos = i;
      ++i;
      skip_ws();
      slot = read_word();
      if (slot.empty()) {
        throw ParseError("empty slot name", i);
      }
      skip_ws();
      if (i >= n || raw[i] != ':') {
        throw ParseError("missing ':' separator after slot name", i);
      }
      ++i;
      in_span = true;
      span_tokens = 0;
    } else if (c == ']') {
      if (!in_span) {
        throw ParseError("unbalanced ']'", i);
      }
      if (span_tokens == 0) {
        throw ParseError("empty span", i);
      }
      in_span = false;
      ++i;
    } else {
      const std::string word = read_word();
      if (word.empty()) {
        // Only reachable on stray control chars; treat as unexpected.
        throw ParseError("unexpected character", i);
      }
      if (in_span) {
        out.tokens.push_back(word);
        out.tags.push_back((span_tokens == 0 ? "B-" : "I-") + slot);
        ++span_tokens;
      } else {
        out.tokens.push_back(word);
        out.tags.push_back("O");
      }
    }
    skip_ws();
  }
  if (in_span) {
    throw ParseError("unbalanced '['", span_open_pos);
  }
  if (out.tokens.empty()) {
    throw ParseError("annotated utterance has no tokens", 0);
  }
  return out;
}

std::string render_annot_utt(const std::vector<std::string>& tokens,
                             const std::vector<std::string>& tags) {
  if (tokens.size() != tags.size()) {
    throw Error("render: token/tag length mismatch");
  }
  std::string out;
  std::string open_slot;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tag = tags[i];
    const bool begins = tag.rfind("B-", 0) == 0;
    const bool inside = tag.rfind("I-", 0) == 0;
    if (!begins && !inside && tag != "O") {
      throw Error("render: bad tag '" + tag + "' at index " + std::to_string(i));
    }
    if (inside && tag.substr(2) != open_slot) {
      throw Error("render: inside tag without open span at index " +
                  std::to_string(i));
    }
    if (!open_slot.empty() && !inside) {
      out += ']';
      open_slot.clear();
    }
    if (!out.empty()) out += ' ';
    if (begins) {
      open_slot = tag.substr(2);
      out += '[';
      out += open_slot;
      out += " : ";
    }
    out += tokens[i];
  }
  if (!open_slot.empty()) {
    out += ']';
  }
  return out;
}

}  // namespace langloop
