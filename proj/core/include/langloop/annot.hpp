// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace langloop {

/// A tokenized utterance with string BIO tags ("O", "B-time", "I-time", ...).
struct AnnotatedUtterance {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  /// Canonical annotated form: whitespace tokens, spans as
  /// "[slot : tok tok]" with single spaces.
  std::string normalized() const;
};

/// Parses the bracketed annotation format: tokens outside brackets are O, a
/// span "[slot : a b]" tags a as B-slot and b as I-slot. Nesting is forbidden.
/// Throws ParseError (with byte position) on unbalanced brackets, a missing
/// ":" separator, nested spans, an empty slot name, or an empty span.
AnnotatedUtterance parse_annot_utt(const std::string& raw);

/// Inverse of parse_annot_utt for valid BIO tag strings.
std::string render_annot_utt(const std::vector<std::string>& tokens,
                             const std::vector<std::string>& tags);

}  // namespace langloop
