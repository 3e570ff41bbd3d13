// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

void append_le64(std::string& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

double read_le64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<std::uint8_t>(p[i]);
  }
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
  std::filesystem::path p = bin_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::string tensor_bytes(const Tensor& t) {
  std::string out;
  out.reserve(t.numel() * 8);
  for (double v : t.values()) append_le64(out, v);
  return out;
}

void save_tensor(const std::filesystem::path& bin_path, const Tensor& t,
                 const std::string& name) {
  write_file(bin_path, tensor_bytes(t));
  nlohmann::json sidecar;
  sidecar["name"] = name;
  sidecar["shape"] = t.shape();
  sidecar["dtype"] = "f64le";
  write_file(sidecar_path(bin_path), sidecar.dump(2) + "\n");
}

Tensor load_tensor(const std::filesystem::path& bin_path, std::string* name) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file(sidecar_path(bin_path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad tensor sidecar for " + bin_path.string() + ": " +
                  e.what());
  }
  std::vector<std::size_t> shape =
      sidecar.at("shape").get<std::vector<std::size_t>>();
  if (name != nullptr) {
    *name = sidecar.at("name").get<std::string>();
  }
  const std::string bytes = read_file(bin_path);
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (bytes.size() != n * 8) {
    throw IoError("tensor payload size mismatch for " + bin_path.string());
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = read_le64(bytes.data() + i * 8);
  }
  return Tensor(std::move(shape), std::move(data));
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

}  // namespace langloop
