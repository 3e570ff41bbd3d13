// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace langloop {

/// Base class for all langloop failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shape or dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input. Carries the byte offset of the offending char.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_ = 0;
};

/// Invalid experiment or regime configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem problem: unreadable input, missing upstream artifact.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace langloop
