// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace langloop {

/// One training sequence: a permutation of the experiment's language set.
struct LanguageOrder {
  std::string order_id;
  std::vector<std::string> lang_ids;
};

enum class OrderPolicyKind {
  kResourceRanked,   // by descending resource weight
  kShuffled,         // seeded permutation
  kDestructiveLast,  // shuffled, with a named set forced to the suffix
};

struct OrderPolicy {
  OrderPolicyKind kind = OrderPolicyKind::kShuffled;
  std::uint64_t seed = 0;
  std::vector<std::string> destructive;  // kDestructiveLast only
};

/// N orders under one policy. Resource-ranked is deterministic (same order N
/// times); shuffled/destructive-last vary by seed + index. Weights are
/// required for resource ranking and ignored otherwise.
std::vector<LanguageOrder> make_orders(
    const OrderPolicy& policy, const std::vector<std::string>& languages,
    std::size_t n, const std::map<std::string, double>* resource_weights);

/// Throws unless `order` is a permutation of `languages`.
void validate_permutation(const LanguageOrder& order,
                          const std::vector<std::string>& languages);

/// Loads a bundled orders file: JSON {"orders": [[lang, ...], ...]}.
std::vector<LanguageOrder> load_orders_file(const std::filesystem::path& path);

}  // namespace langloop
