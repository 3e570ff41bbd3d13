// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "langloop/tensor.hpp"

namespace langloop {

/// Tensor file format: flat little-endian 64-bit floats in `<stem>.bin`,
/// with a JSON sidecar `<stem>.json` carrying {"name", "shape"}.
void save_tensor(const std::filesystem::path& bin_path, const Tensor& t,
                 const std::string& name);

/// Loads a tensor written by save_tensor; validates byte length against the
/// sidecar shape. The sidecar name is returned through `name` when non-null.
Tensor load_tensor(const std::filesystem::path& bin_path,
                   std::string* name = nullptr);

/// Raw little-endian bytes of the tensor payload (no sidecar).
std::string tensor_bytes(const Tensor& t);

/// FNV-1a 64 over a byte string; used for bit-identity checks.
std::uint64_t fnv1a64(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace langloop
