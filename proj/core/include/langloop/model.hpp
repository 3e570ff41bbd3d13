// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "langloop/labels.hpp"
#include "langloop/lora.hpp"
#include "langloop/param.hpp"
#include "langloop/rng.hpp"
#include "langloop/tape.hpp"
#include "langloop/tensor.hpp"

namespace langloop {

/// Token id 0 is reserved for padding everywhere.
inline constexpr int kPadTokenId = 0;
/// Token id 1 is the unknown-token id used by text ingestion.
inline constexpr int kUnkTokenId = 1;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_dim = 32;
  std::size_t max_seq_len = 24;
  std::size_t num_labels = 0;
  double dropout_rate = 0.1;

  std::size_t ffn_dim() const { return 4 * hidden_dim; }
  void validate() const;
};

/// Weights of the token tagger: embedding + positional table, one single-head
/// self-attention block with a feed-forward sublayer (residual connections,
/// no normalization layers), and a per-token linear classifier head.
/// The encoder tensors play the role of the frozen base under adapter-based
/// training; the classifier head is the task head added on top.
struct ModelParams {
  ModelConfig config;
  Param embedding{"embedding", {}, false};    // [vocab_size x d]
  Param positional{"positional", {}, false};  // [max_seq_len x d]
  // Attention projections [d x d], row-vector convention: h = x W.
  Param w_q{"w_q", {}, false};
  Param w_k{"w_k", {}, false};
  Param w_v{"w_v", {}, false};
  Param w_o{"w_o", {}, false};
  Param w_ffn_in{"w_ffn_in", {}, false};    // [d x 4d]
  Param w_ffn_out{"w_ffn_out", {}, false};  // [4d x d]
  Param w_cls{"w_cls", {}, false};          // [d x num_labels]
  Param b_cls{"b_cls", {}, false};          // [1 x num_labels]

  /// Glorot-style uniform init; consumes the rng in a fixed parameter order.
  static ModelParams init(const ModelConfig& config, Rng& rng);

  std::vector<Param*> all_params();
  std::vector<const Param*> all_params() const;
  std::vector<Param*> encoder_params();
  std::vector<const Param*> encoder_params() const;
  std::vector<Param*> head_params();

  void set_encoder_frozen(bool frozen);
  void set_all_frozen(bool frozen);

  ModelParams clone() const;
};

struct ForwardOptions {
  bool train_mode = false;
  Rng* dropout_rng = nullptr;
  /// Pad every sequence to this length (0 = batch max). Must not exceed
  /// max_seq_len.
  std::size_t padded_len = 0;
};

/// Validates a batch against the model config (token range, lengths,
/// non-empty sequences) and returns the padded length.
std::size_t validate_batch(const ModelConfig& config,
                           const std::vector<LabeledSequence>& batch,
                           std::size_t padded_len);

/// Per-token logits for a batch, shape [batch, padded_len, num_labels].
/// With no adapters and train_mode off the output is a pure function of
/// (params, batch).
Tensor forward(const ModelParams& params, const AdapterSet* adapters,
               const std::vector<LabeledSequence>& batch,
               const ForwardOptions& opts = {});

/// Records the forward pass and the mean token cross-entropy (non-pad
/// positions only) on the tape; returns the scalar loss node.
NodeId build_loss(Tape& tape, const ModelParams& params,
                  const AdapterSet* adapters,
                  const std::vector<LabeledSequence>& batch,
                  const ForwardOptions& opts = {});

/// Eval-mode scalar loss.
double loss(const ModelParams& params, const AdapterSet* adapters,
            const std::vector<LabeledSequence>& batch);

/// Argmax labels per position, ties broken toward the lowest label id.
/// Results are trimmed to each sequence's true length.
std::vector<std::vector<int>> predict(const ModelParams& params,
                                      const AdapterSet* adapters,
                                      const std::vector<LabeledSequence>& batch);

struct TrainableBreakdown {
  std::size_t base = 0;     // unfrozen encoder scalars
  std::size_t head = 0;     // unfrozen classifier scalars
  std::size_t adapter = 0;  // adapter scalars
  std::size_t total() const { return base + head + adapter; }
};

/// Exact count of scalars receiving gradients, given the frozen flags the
/// regime has applied.
TrainableBreakdown count_trainable(const ModelParams& params,
                                   const AdapterSet* adapters);

/// Model checkpoint: one tensor file per parameter plus manifest.json with
/// config, frozen flags, regime tag and seed.
void save_model(const std::filesystem::path& dir, const ModelParams& params,
                const std::string& regime_tag, std::uint64_t seed);
ModelParams load_model(const std::filesystem::path& dir,
                       std::string* regime_tag = nullptr,
                       std::uint64_t* seed = nullptr);

/// Hash of the serialized bytes of all frozen tensors (bit-identity checks).
std::uint64_t frozen_params_hash(const ModelParams& params);

}  // namespace langloop
