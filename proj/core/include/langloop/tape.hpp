// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "langloop/param.hpp"
#include "langloop/rng.hpp"
#include "langloop/tensor.hpp"

namespace langloop {

using NodeId = std::int32_t;

/// Gradients keyed by the parameter they belong to. Frozen parameters are
/// never present.
using GradMap = std::unordered_map<const Param*, Tensor>;

/// Record of primitive operations for reverse-mode differentiation. A tape is
/// confined to one forward pass; backward() replays it once, in reverse order
/// of recording. Parameters are read, never written.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeId constant(Tensor value);
  /// Leaf backed by a persistent parameter. The same Param maps to the same
  /// node on repeated calls, so adjoint fan-in accumulates naturally.
  NodeId parameter(const Param& p);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  /// m [R x C] + row [1 x C], broadcast over rows.
  NodeId add_row_broadcast(NodeId m, NodeId row);
  NodeId scale(NodeId a, double factor);
  NodeId gelu(NodeId a);
  NodeId transpose(NodeId a);
  NodeId softmax_rows(NodeId a);
  /// Inverted dropout; the Bernoulli mask is recorded on the tape. Rate 0 is
  /// the exact identity and consumes no randomness.
  NodeId dropout(NodeId a, double rate, Rng& rng);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  /// out[i] = m[rows[i]]; duplicate indices accumulate gradient.
  NodeId gather_rows(NodeId m, std::vector<std::size_t> rows);
  /// Mean token-level cross-entropy over the rows with active[i] != 0.
  /// logits [R x C], labels[i] in [0, C). Rejects an all-inactive batch.
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels,
                               std::vector<std::uint8_t> active);
  NodeId sum(NodeId a);

  const Tensor& value(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  /// d(loss)/d(p) for every non-frozen parameter recorded on this tape.
  /// loss must be a scalar node of this tape.
  GradMap backward(NodeId loss) const;

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kParameter,
    kMatMul,
    kAdd,
    kAddRowBroadcast,
    kScale,
    kGelu,
    kTranspose,
    kSoftmaxRows,
    kDropout,
    kConcatRows,
    kGatherRows,
    kSoftmaxCrossEntropy,
    kSum,
  };

  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value;
    // Per-op payloads.
    double factor = 0.0;              // kScale, kDropout keep-probability
    Tensor aux;                        // kDropout mask, kSoftmaxCrossEntropy probs
    std::vector<std::size_t> indices;  // kGatherRows rows, kConcatRows offsets
    std::vector<int> labels;           // kSoftmaxCrossEntropy
    std::vector<std::uint8_t> active;  // kSoftmaxCrossEntropy
    const Param* param = nullptr;      // kParameter
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Param*, NodeId> param_nodes_;
};

}  // namespace langloop
