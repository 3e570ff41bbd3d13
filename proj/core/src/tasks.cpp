// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/tasks.hpp"

#include <set>

#include "langloop/errors.hpp"
#include "langloop/model.hpp"
#include "langloop/rng.hpp"

namespace langloop {

std::string to_string(Vitality v) {
  switch (v) {
    case Vitality::kLow: return "low";
    case Vitality::kMid: return "mid";
    case Vitality::kHigh: return "high";
    case Vitality::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Vitality vitality_from_string(const std::string& s) {
  if (s == "low") return Vitality::kLow;
  if (s == "mid") return Vitality::kMid;
  if (s == "high") return Vitality::kHigh;
  if (s == "unassigned") return Vitality::kUnassigned;
  throw ConfigError("unknown vitality '" + s + "'");
}

std::size_t GeneratorConfig::script_base(int script_id) const {
  if (script_id < 0) {
    throw ConfigError("generator: script_id must be non-negative");
  }
  return shared_base() + shared_pool_size +
         static_cast<std::size_t>(script_id) * script_range_size;
}

std::size_t GeneratorConfig::required_vocab(int max_script_id) const {
  return script_base(max_script_id) + script_range_size;
}

void GeneratorConfig::validate() const {
  if (slot_types.empty()) {
    throw ConfigError("generator: need at least one slot type");
  }
  const std::size_t groups = groups_per_range();
  if (shared_pool_size < groups || script_range_size < groups) {
    throw ConfigError("generator: token ranges must hold one id per group");
  }
  if (max_seq_len < 4) {
    throw ConfigError("generator: max_seq_len too small for templates");
  }
}

std::size_t effective_train_size(const SplitSizes& sizes, Vitality vitality,
                                 const GeneratorConfig& config) {
  if (!config.vitality_scales_train) return sizes.train;
  switch (vitality) {
    case Vitality::kLow: return std::max<std::size_t>(1, sizes.train / 2);
    case Vitality::kHigh: return sizes.train + sizes.train / 2;
    default: return sizes.train;
  }
}

namespace {

// A template is a list of segments; group 0 is filler (O), group g >= 1 is
// slot type g-1 and emits B-/I- tags.
struct Segment {
  std::size_t group;
  std::size_t min_len;
  std::size_t max_len;
};
using Template = std::vector<Segment>;

// The template bank depends only on the family id, so languages of one family
// share sentence structure regardless of seed or script.
std::vector<Template> family_templates(int family_id,
                                       const GeneratorConfig& config) {
  Rng rng = Rng(0x7E3A11u).fork("family", static_cast<std::uint64_t>(family_id));
  const std::size_t num_slots = config.slot_types.size();
  std::vector<Template> bank;
  for (std::size_t t = 0; t < config.templates_per_family; ++t) {
    Template tpl;
    // Rotate slot coverage so every slot type appears across the bank.
    const std::size_t first_slot = (2 * t) % num_slots;
    const std::size_t second_slot = (2 * t + 1) % num_slots;
    const bool two_slots = rng.uniform() < 0.75;
    tpl.push_back({0, 1, 3});
    tpl.push_back({first_slot + 1, 1, 3});
    tpl.push_back({0, 1, 2});
    if (two_slots) {
      tpl.push_back({second_slot + 1, 1, 2});
      if (rng.uniform() < 0.5) {
        tpl.push_back({0, 1, 2});
      }
    }
    bank.push_back(std::move(tpl));
  }
  return bank;
}

std::size_t max_template_len(const std::vector<Template>& bank) {
  std::size_t m = 0;
  for (const Template& tpl : bank) {
    std::size_t n = 0;
    for (const Segment& s : tpl) n += s.max_len;
    m = std::max(m, n);
  }
  return m;
}

class TokenDrawer {
 public:
  TokenDrawer(const LanguageSpec& spec, const GeneratorConfig& config)
      : spec_(spec), config_(config) {
    const std::size_t groups = config.groups_per_range();
    shared_width_ = config.shared_pool_size / groups;
    script_width_ = config.script_range_size / groups;
  }

  // Slot groups split their range into span-initial and continuation halves,
  // so the begin/inside distinction is carried by the vocabulary itself.
  int draw(std::size_t group, std::size_t span_pos, Rng& rng) const {
    const bool shared = rng.uniform() < spec_.overlap;
    std::size_t base =
        shared ? config_.shared_base() + group * shared_width_
               : config_.script_base(spec_.script_id) + group * script_width_;
    std::size_t width = shared ? shared_width_ : script_width_;
    if (group != 0 && width >= 2) {
      const std::size_t initial = (width + 1) / 2;
      if (span_pos == 0) {
        width = initial;
      } else {
        base += initial;
        width -= initial;
      }
    }
    return static_cast<int>(base + rng.below(width));
  }

 private:
  const LanguageSpec& spec_;
  const GeneratorConfig& config_;
  std::size_t shared_width_;
  std::size_t script_width_;
};

LabeledSequence instantiate(const Template& tpl, const TokenDrawer& drawer,
                            const LabelSchema& schema, Rng& rng) {
  LabeledSequence seq;
  for (const Segment& seg : tpl) {
    const std::size_t len =
        seg.min_len + rng.below(seg.max_len - seg.min_len + 1);
    for (std::size_t i = 0; i < len; ++i) {
      seq.tokens.push_back(drawer.draw(seg.group, i, rng));
      if (seg.group == 0) {
        seq.labels.push_back(0);
      } else {
        const int slot = static_cast<int>(seg.group) - 1;
        seq.labels.push_back(i == 0 ? schema.begin_label(slot)
                                    : schema.inside_label(slot));
      }
    }
  }
  return seq;
}

}  // namespace

TaskDataset generate_language(const LanguageSpec& spec, const SplitSizes& sizes,
                              const GeneratorConfig& config) {
  config.validate();
  if (spec.overlap < 0.0 || spec.overlap > 1.0) {
    throw ConfigError("generator: overlap must be in [0, 1], got " +
                      std::to_string(spec.overlap));
  }
  if (sizes.train < 1 || sizes.valid < 1 || sizes.test < 1) {
    throw ConfigError("generator: split sizes must be >= 1");
  }
  if (config.vocab_size != 0 &&
      config.required_vocab(spec.script_id) > config.vocab_size) {
    throw ConfigError("generator: script " + std::to_string(spec.script_id) +
                      " needs vocab of " +
                      std::to_string(config.required_vocab(spec.script_id)) +
                      ", config allows " + std::to_string(config.vocab_size));
  }

  const LabelSchema schema = config.schema();
  const std::vector<Template> bank = family_templates(spec.family_id, config);
  if (max_template_len(bank) > config.max_seq_len) {
    throw ConfigError("generator: templates exceed max_seq_len");
  }
  const TokenDrawer drawer(spec, config);

  // Content depends on the seed (and script/family/overlap), not on lang_id.
  Rng rng = Rng(spec.seed).fork("taskgen");

  TaskDataset ds;
  ds.spec = spec;
  ds.label_names = schema.names;

  std::set<std::vector<int>> seen;
  auto draw_split = [&](std::size_t count) {
    std::vector<LabeledSequence> split;
    split.reserve(count);
    std::size_t failures = 0;
    while (split.size() < count) {
      const Template& tpl = bank[rng.below(bank.size())];
      LabeledSequence seq = instantiate(tpl, drawer, schema, rng);
      if (seen.insert(seq.tokens).second) {
        failures = 0;
        split.push_back(std::move(seq));
      } else if (++failures > 1000) {
        throw Error("generator: vocabulary exhausted for language '" +
                    spec.lang_id + "' (cannot draw more unique sequences)");
      }
    }
    return split;
  };

  ds.train = draw_split(effective_train_size(sizes, spec.vitality, config));
  ds.valid = draw_split(sizes.valid);
  ds.test = draw_split(sizes.test);

  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const LabeledSequence& seq : *split) {
      validate_sequence(seq, config.max_seq_len, schema);
    }
  }
  return ds;
}

}  // namespace langloop
