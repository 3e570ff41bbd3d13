// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "langloop/tensor.hpp"

namespace langloop {

/// A named, persistent weight tensor. Identity is the object address: a Param
/// must stay at a stable location for as long as tapes, gradient maps, or an
/// optimizer refer to it. Frozen params never receive gradients.
struct Param {
  std::string name;
  Tensor value;
  bool frozen = false;

  std::size_t numel() const { return value.numel(); }
};

}  // namespace langloop
