// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/orders.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/rng.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

void validate_permutation(const LanguageOrder& order,
                          const std::vector<std::string>& languages) {
  if (order.lang_ids.size() != languages.size()) {
    throw ConfigError("order '" + order.order_id + "' has " +
                      std::to_string(order.lang_ids.size()) +
                      " languages, experiment has " +
                      std::to_string(languages.size()));
  }
  std::set<std::string> expected(languages.begin(), languages.end());
  std::set<std::string> got(order.lang_ids.begin(), order.lang_ids.end());
  if (expected != got) {
    throw ConfigError("order '" + order.order_id +
                      "' is not a permutation of the language set");
  }
}

namespace {

LanguageOrder ranked_order(const std::vector<std::string>& languages,
                           const std::map<std::string, double>& weights) {
  std::vector<std::string> sorted = languages;
  for (const std::string& lang : sorted) {
    if (!weights.contains(lang)) {
      throw ConfigError("resource ranking: no weight for language '" + lang +
                        "'");
    }
  }
  // Descending by weight; lexicographic tie-break keeps it deterministic.
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](const std::string& a, const std::string& b) {
                     const double wa = weights.at(a), wb = weights.at(b);
                     if (wa != wb) return wa > wb;
                     return a < b;
                   });
  return LanguageOrder{"resource_ranked", std::move(sorted)};
}

}  // namespace

std::vector<LanguageOrder> make_orders(
    const OrderPolicy& policy, const std::vector<std::string>& languages,
    std::size_t n, const std::map<std::string, double>* resource_weights) {
  if (languages.empty()) {
    throw ConfigError("make_orders: empty language set");
  }
  if (n == 0) {
    throw ConfigError("make_orders: need at least one order");
  }
  std::vector<LanguageOrder> orders;
  switch (policy.kind) {
    case OrderPolicyKind::kResourceRanked: {
      if (resource_weights == nullptr) {
        throw ConfigError("resource ranking requires weights");
      }
      const LanguageOrder base = ranked_order(languages, *resource_weights);
      for (std::size_t i = 0; i < n; ++i) {
        orders.push_back(base);
        orders.back().order_id = "resource_ranked_" + std::to_string(i);
      }
      break;
    }
    case OrderPolicyKind::kShuffled: {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> perm = languages;
        Rng rng = Rng(policy.seed).fork("order", static_cast<std::uint64_t>(i));
        rng.shuffle(perm);
        orders.push_back(
            LanguageOrder{"shuffled_" + std::to_string(i), std::move(perm)});
      }
      break;
    }
    case OrderPolicyKind::kDestructiveLast: {
      std::set<std::string> lang_set(languages.begin(), languages.end());
      std::set<std::string> suffix(policy.destructive.begin(),
                                   policy.destructive.end());
      if (suffix.empty()) {
        throw ConfigError("destructive-last: empty destructive set");
      }
      for (const std::string& d : suffix) {
        if (!lang_set.contains(d)) {
          throw ConfigError("destructive-last: '" + d +
                            "' is not in the language set");
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> head;
        std::vector<std::string> tail;
        for (const std::string& lang : languages) {
          (suffix.contains(lang) ? tail : head).push_back(lang);
        }
        Rng rng = Rng(policy.seed).fork("order", static_cast<std::uint64_t>(i));
        rng.shuffle(head);
        rng.shuffle(tail);
        head.insert(head.end(), tail.begin(), tail.end());
        orders.push_back(LanguageOrder{
            "destructive_last_" + std::to_string(i), std::move(head)});
      }
      break;
    }
  }
  for (const LanguageOrder& order : orders) {
    validate_permutation(order, languages);
  }
  return orders;
}

std::vector<LanguageOrder> load_orders_file(const std::filesystem::path& path) {
  std::vector<LanguageOrder> orders;
  try {
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    std::size_t i = 0;
    for (const auto& entry : j.at("orders")) {
      LanguageOrder order;
      order.order_id = "file_" + std::to_string(i++);
      order.lang_ids = entry.get<std::vector<std::string>>();
      orders.push_back(std::move(order));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad orders file " + path.string() + ": " + e.what());
  }
  if (orders.empty()) {
    throw IoError("orders file " + path.string() + " has no orders");
  }
  return orders;
}

}  // namespace langloop
