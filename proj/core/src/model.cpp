// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/model.hpp"

#include <cmath>

#include <json.hpp>

#include "langloop/errors.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

namespace {

constexpr double kAttentionMask = -1e9;

void glorot_fill(Tensor& t, Rng& rng) {
  // Fan-based uniform range over the last two (or only) dimensions.
  const std::size_t fan_in = t.rank() == 2 ? t.dim(0) : t.numel();
  const std::size_t fan_out = t.rank() == 2 ? t.dim(1) : 1;
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) {
    v = rng.uniform(-limit, limit);
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 2) {
    throw ConfigError("model: vocab_size must be >= 2 (pad + content)");
  }
  if (hidden_dim < 4) {
    throw ConfigError("model: hidden_dim must be >= 4");
  }
  if (max_seq_len < 1) {
    throw ConfigError("model: max_seq_len must be >= 1");
  }
  if (num_labels < 2) {
    throw ConfigError("model: num_labels must be >= 2");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("model: dropout_rate must be in [0, 1)");
  }
}

ModelParams ModelParams::init(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p;
  p.config = config;
  const std::size_t d = config.hidden_dim;
  p.embedding.value = Tensor({config.vocab_size, d});
  p.positional.value = Tensor({config.max_seq_len, d});
  p.w_q.value = Tensor({d, d});
  p.w_k.value = Tensor({d, d});
  p.w_v.value = Tensor({d, d});
  p.w_o.value = Tensor({d, d});
  p.w_ffn_in.value = Tensor({d, config.ffn_dim()});
  p.w_ffn_out.value = Tensor({config.ffn_dim(), d});
  p.w_cls.value = Tensor({d, config.num_labels});
  p.b_cls.value = Tensor({1, config.num_labels});
  for (Param* param : p.all_params()) {
    if (param == &p.b_cls) continue;  // bias starts at zero
    glorot_fill(param->value, rng);
  }
  return p;
}

std::vector<Param*> ModelParams::all_params() {
  return {&embedding, &positional, &w_q, &w_k,      &w_v,
          &w_o,       &w_ffn_in,   &w_ffn_out, &w_cls, &b_cls};
}

std::vector<const Param*> ModelParams::all_params() const {
  auto params = const_cast<ModelParams*>(this)->all_params();
  return {params.begin(), params.end()};
}

std::vector<Param*> ModelParams::encoder_params() {
  return {&embedding, &positional, &w_q, &w_k, &w_v, &w_o, &w_ffn_in,
          &w_ffn_out};
}

std::vector<const Param*> ModelParams::encoder_params() const {
  auto params = const_cast<ModelParams*>(this)->encoder_params();
  return {params.begin(), params.end()};
}

std::vector<Param*> ModelParams::head_params() { return {&w_cls, &b_cls}; }

void ModelParams::set_encoder_frozen(bool frozen) {
  for (Param* p : encoder_params()) p->frozen = frozen;
}

void ModelParams::set_all_frozen(bool frozen) {
  for (Param* p : all_params()) p->frozen = frozen;
}

ModelParams ModelParams::clone() const { return *this; }

std::size_t validate_batch(const ModelConfig& config,
                           const std::vector<LabeledSequence>& batch,
                           std::size_t padded_len) {
  if (batch.empty()) {
    throw Error("forward: empty batch");
  }
  std::size_t max_len = 0;
  for (const LabeledSequence& seq : batch) {
    if (seq.tokens.empty()) {
      throw Error("forward: empty sequence");
    }
    if (seq.tokens.size() != seq.labels.size()) {
      throw Error("forward: token/label length mismatch");
    }
    for (int tok : seq.tokens) {
      if (tok < 0 || static_cast<std::size_t>(tok) >= config.vocab_size) {
        throw Error("forward: token id " + std::to_string(tok) +
                    " out of vocabulary of size " +
                    std::to_string(config.vocab_size));
      }
    }
    max_len = std::max(max_len, seq.tokens.size());
  }
  std::size_t padded = padded_len == 0 ? max_len : padded_len;
  if (padded < max_len) {
    throw Error("forward: padded_len " + std::to_string(padded) +
                " shorter than longest sequence " + std::to_string(max_len));
  }
  if (padded > config.max_seq_len) {
    throw Error("forward: padded length " + std::to_string(padded) +
                " exceeds max_seq_len " + std::to_string(config.max_seq_len));
  }
  return padded;
}

namespace {

struct GraphOutput {
  std::vector<NodeId> per_seq_logits;  // each [L x num_labels]
  std::size_t padded_len = 0;
};

// Adapter branch in row-vector convention: x_rows (A^T) (B^T), scaled.
NodeId adapter_branch(Tape& tape, NodeId x, const LoraAdapter& adapter,
                      const ForwardOptions& opts) {
  NodeId in = x;
  if (opts.train_mode && adapter.dropout_rate > 0.0) {
    if (opts.dropout_rng == nullptr) {
      throw Error("forward: train mode requires a dropout rng");
    }
    in = tape.dropout(x, adapter.dropout_rate, *opts.dropout_rng);
  }
  NodeId at = tape.transpose(tape.parameter(adapter.a));
  NodeId bt = tape.transpose(tape.parameter(adapter.b));
  return tape.scale(tape.matmul(tape.matmul(in, at), bt), adapter.scaling());
}

NodeId projected(Tape& tape, NodeId x, const Param& weight,
                 const AdapterSet* adapters, const ForwardOptions& opts) {
  NodeId base = tape.matmul(x, tape.parameter(weight));
  if (adapters != nullptr) {
    if (const LoraAdapter* a = adapters->find(weight.name)) {
      base = tape.add(base, adapter_branch(tape, x, *a, opts));
    }
  }
  return base;
}

GraphOutput build_graph(Tape& tape, const ModelParams& params,
                        const AdapterSet* adapters,
                        const std::vector<LabeledSequence>& batch,
                        const ForwardOptions& opts) {
  const ModelConfig& cfg = params.config;
  const std::size_t padded = validate_batch(cfg, batch, opts.padded_len);
  if (opts.train_mode && cfg.dropout_rate > 0.0 &&
      opts.dropout_rng == nullptr) {
    throw Error("forward: train mode requires a dropout rng");
  }

  const NodeId emb = tape.parameter(params.embedding);
  const NodeId pos = tape.parameter(params.positional);
  std::vector<std::size_t> positions(padded);
  for (std::size_t i = 0; i < padded; ++i) positions[i] = i;
  const NodeId pos_rows = tape.gather_rows(pos, positions);

  GraphOutput out;
  out.padded_len = padded;
  for (const LabeledSequence& seq : batch) {
    std::vector<std::size_t> ids(padded, static_cast<std::size_t>(kPadTokenId));
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      ids[i] = static_cast<std::size_t>(seq.tokens[i]);
    }

    NodeId x = tape.add(tape.gather_rows(emb, ids), pos_rows);
    if (opts.train_mode && cfg.dropout_rate > 0.0) {
      x = tape.dropout(x, cfg.dropout_rate, *opts.dropout_rng);
    }

    NodeId q = projected(tape, x, params.w_q, adapters, opts);
    NodeId k = projected(tape, x, params.w_k, adapters, opts);
    NodeId v = projected(tape, x, params.w_v, adapters, opts);

    NodeId scores = tape.scale(
        tape.matmul(q, tape.transpose(k)),
        1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim)));
    // Padded key columns are masked out of every query row.
    Tensor mask({padded, padded});
    for (std::size_t col = seq.tokens.size(); col < padded; ++col) {
      for (std::size_t row = 0; row < padded; ++row) {
        mask.at(row, col) = kAttentionMask;
      }
    }
    scores = tape.add(scores, tape.constant(std::move(mask)));
    NodeId attn = tape.softmax_rows(scores);
    NodeId ctx = tape.matmul(tape.matmul(attn, v), tape.parameter(params.w_o));
    NodeId h = tape.add(x, ctx);

    NodeId ff = tape.gelu(tape.matmul(h, tape.parameter(params.w_ffn_in)));
    if (opts.train_mode && cfg.dropout_rate > 0.0) {
      ff = tape.dropout(ff, cfg.dropout_rate, *opts.dropout_rng);
    }
    ff = tape.matmul(ff, tape.parameter(params.w_ffn_out));
    h = tape.add(h, ff);

    NodeId logits = tape.add_row_broadcast(
        tape.matmul(h, tape.parameter(params.w_cls)),
        tape.parameter(params.b_cls));
    out.per_seq_logits.push_back(logits);
  }
  return out;
}

}  // namespace

Tensor forward(const ModelParams& params, const AdapterSet* adapters,
               const std::vector<LabeledSequence>& batch,
               const ForwardOptions& opts) {
  Tape tape;
  GraphOutput graph = build_graph(tape, params, adapters, batch, opts);
  const std::size_t L = graph.padded_len;
  const std::size_t C = params.config.num_labels;
  Tensor out({batch.size(), L, C});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor& logits = tape.value(graph.per_seq_logits[b]);
    std::copy(logits.values().begin(), logits.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(b * L * C));
  }
  return out;
}

NodeId build_loss(Tape& tape, const ModelParams& params,
                  const AdapterSet* adapters,
                  const std::vector<LabeledSequence>& batch,
                  const ForwardOptions& opts) {
  GraphOutput graph = build_graph(tape, params, adapters, batch, opts);
  const std::size_t L = graph.padded_len;
  std::vector<int> labels;
  std::vector<std::uint8_t> active;
  labels.reserve(batch.size() * L);
  active.reserve(batch.size() * L);
  for (const LabeledSequence& seq : batch) {
    for (std::size_t i = 0; i < L; ++i) {
      const bool real = i < seq.tokens.size();
      labels.push_back(real ? seq.labels[i] : 0);
      active.push_back(real ? 1 : 0);
    }
    for (std::size_t i = 0; i < seq.labels.size(); ++i) {
      const int l = seq.labels[i];
      if (l < 0 || static_cast<std::size_t>(l) >= params.config.num_labels) {
        throw Error("loss: label id " + std::to_string(l) +
                    " out of range for num_labels " +
                    std::to_string(params.config.num_labels));
      }
    }
  }
  NodeId all_logits = tape.concat_rows(graph.per_seq_logits);
  return tape.softmax_cross_entropy(all_logits, std::move(labels),
                                    std::move(active));
}

double loss(const ModelParams& params, const AdapterSet* adapters,
            const std::vector<LabeledSequence>& batch) {
  Tape tape;
  return tape.value(build_loss(tape, params, adapters, batch)).scalar_value();
}

std::vector<std::vector<int>> predict(const ModelParams& params,
                                      const AdapterSet* adapters,
                                      const std::vector<LabeledSequence>& batch) {
  Tensor logits = forward(params, adapters, batch, ForwardOptions{});
  const std::size_t L = logits.dim(1);
  const std::size_t C = logits.dim(2);
  std::vector<std::vector<int>> out(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    out[b].resize(batch[b].tokens.size());
    for (std::size_t i = 0; i < batch[b].tokens.size(); ++i) {
      const double* row = logits.data() + (b * L + i) * C;
      int best = 0;
      for (std::size_t c = 1; c < C; ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
      }
      out[b][i] = best;
    }
  }
  return out;
}

TrainableBreakdown count_trainable(const ModelParams& params,
                                   const AdapterSet* adapters) {
  TrainableBreakdown counts;
  for (const Param* p : params.encoder_params()) {
    if (!p->frozen) counts.base += p->numel();
  }
  for (const Param* p : const_cast<ModelParams&>(params).head_params()) {
    if (!p->frozen) counts.head += p->numel();
  }
  if (adapters != nullptr) {
    counts.adapter = adapters->trainable_count();
  }
  return counts;
}

void save_model(const std::filesystem::path& dir, const ModelParams& params,
                const std::string& regime_tag, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "langloop-model-v1";
  manifest["regime"] = regime_tag;
  manifest["seed"] = seed;
  manifest["config"] = {{"vocab_size", params.config.vocab_size},
                        {"hidden_dim", params.config.hidden_dim},
                        {"max_seq_len", params.config.max_seq_len},
                        {"num_labels", params.config.num_labels},
                        {"dropout_rate", params.config.dropout_rate}};
  nlohmann::json frozen;
  std::vector<std::string> names;
  for (const Param* p : params.all_params()) {
    frozen[p->name] = p->frozen;
    names.push_back(p->name);
    save_tensor(dir / (p->name + ".bin"), p->value, p->name);
  }
  manifest["frozen"] = frozen;
  manifest["params"] = names;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ModelParams load_model(const std::filesystem::path& dir,
                       std::string* regime_tag, std::uint64_t* seed) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad model manifest in " + dir.string() + ": " + e.what());
  }
  ModelConfig cfg;
  const auto& jc = manifest.at("config");
  cfg.vocab_size = jc.at("vocab_size").get<std::size_t>();
  cfg.hidden_dim = jc.at("hidden_dim").get<std::size_t>();
  cfg.max_seq_len = jc.at("max_seq_len").get<std::size_t>();
  cfg.num_labels = jc.at("num_labels").get<std::size_t>();
  cfg.dropout_rate = jc.at("dropout_rate").get<double>();
  if (regime_tag != nullptr) {
    *regime_tag = manifest.at("regime").get<std::string>();
  }
  if (seed != nullptr) {
    *seed = manifest.at("seed").get<std::uint64_t>();
  }
  ModelParams params;
  params.config = cfg;
  for (Param* p : params.all_params()) {
    p->value = load_tensor(dir / (p->name + ".bin"));
    p->frozen = manifest.at("frozen").at(p->name).get<bool>();
  }
  return params;
}

std::uint64_t frozen_params_hash(const ModelParams& params) {
  std::string bytes;
  for (const Param* p : params.all_params()) {
    if (!p->frozen) continue;
    bytes += p->name;
    bytes += '\0';
    bytes += tensor_bytes(p->value);
  }
  return fnv1a64(bytes);
}

}  // namespace langloop
