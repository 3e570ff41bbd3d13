// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/tape.hpp"

#include <cmath>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

}  // namespace

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw Error("tape: node id " + std::to_string(id) + " not on this tape");
  }
  return nodes_[static_cast<std::size_t>(id)];
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

NodeId Tape::constant(Tensor value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(const Param& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) {
    return it->second;
  }
  Node n;
  n.op = Op::kParameter;
  n.value = p.value;
  n.param = &p;
  NodeId id = push(std::move(n));
  param_nodes_.emplace(&p, id);
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kMatMul;
  n.inputs = {a, b};
  n.value = langloop::matmul(value(a), value(b));
  check_finite(n.value, "matmul");
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a, b};
  n.value = langloop::add(value(a), value(b));
  return push(std::move(n));
}

NodeId Tape::add_row_broadcast(NodeId m, NodeId row) {
  const Tensor& mv = value(m);
  const Tensor& rv = value(row);
  if (mv.rank() != 2 || rv.rank() != 2 || rv.dim(0) != 1 ||
      rv.dim(1) != mv.dim(1)) {
    throw ShapeError("add_row_broadcast: incompatible shapes " +
                     mv.shape_str() + " and " + rv.shape_str());
  }
  Node n;
  n.op = Op::kAddRowBroadcast;
  n.inputs = {m, row};
  Tensor out = mv;
  const std::size_t cols = mv.dim(1);
  for (std::size_t r = 0; r < mv.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] += rv[c];
    }
  }
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::kScale;
  n.inputs = {a};
  n.factor = factor;
  n.value = langloop::scale(value(a), factor);
  return push(std::move(n));
}

NodeId Tape::gelu(NodeId a) {
  Node n;
  n.op = Op::kGelu;
  n.inputs = {a};
  Tensor out = value(a);
  for (double& x : out.values()) x = gelu_value(x);
  check_finite(out, "gelu");
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  Node n;
  n.op = Op::kTranspose;
  n.inputs = {a};
  n.value = langloop::transpose(value(a));
  return push(std::move(n));
}

NodeId Tape::softmax_rows(NodeId a) {
  const Tensor& in = value(a);
  if (in.rank() != 2) {
    throw ShapeError("softmax_rows: expected matrix, got " + in.shape_str());
  }
  Node n;
  n.op = Op::kSoftmaxRows;
  n.inputs = {a};
  Tensor out = in;
  const std::size_t rows = in.dim(0), cols = in.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data() + r * cols;
    double mx = row[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double denom = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      denom += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) row[c] /= denom;
  }
  check_finite(out, "softmax_rows");
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::dropout(NodeId a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw Error("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  Node n;
  n.op = Op::kDropout;
  n.inputs = {a};
  const Tensor& in = value(a);
  const double keep = 1.0 - rate;
  n.factor = keep;
  if (rate == 0.0) {
    n.aux = Tensor::full(in.shape(), 1.0);
    n.value = in;
  } else {
    Tensor mask(in.shape());
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.numel(); ++i) {
      const double m = rng.uniform() < keep ? 1.0 : 0.0;
      mask[i] = m;
      out[i] = in[i] * m / keep;
    }
    n.aux = std::move(mask);
    n.value = std::move(out);
  }
  return push(std::move(n));
}

NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) {
    throw ShapeError("concat_rows: no inputs");
  }
  const std::size_t cols = value(parts[0]).dim(1);
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (NodeId id : parts) {
    const Tensor& t = value(id);
    if (t.rank() != 2 || t.dim(1) != cols) {
      throw ShapeError("concat_rows: incompatible part shape " + t.shape_str());
    }
    offsets.push_back(rows);
    rows += t.dim(0);
  }
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& t = value(parts[i]);
    std::copy(t.values().begin(), t.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offsets[i] * cols));
  }
  Node n;
  n.op = Op::kConcatRows;
  n.inputs = parts;
  n.indices = std::move(offsets);
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::gather_rows(NodeId m, std::vector<std::size_t> rows) {
  const Tensor& src = value(m);
  if (src.rank() != 2) {
    throw ShapeError("gather_rows: expected matrix, got " + src.shape_str());
  }
  const std::size_t cols = src.dim(1);
  Tensor out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= src.dim(0)) {
      throw ShapeError("gather_rows: row index " + std::to_string(rows[i]) +
                       " out of range for " + src.shape_str());
    }
    std::copy(src.values().begin() + static_cast<std::ptrdiff_t>(rows[i] * cols),
              src.values().begin() + static_cast<std::ptrdiff_t>((rows[i] + 1) * cols),
              out.values().begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  Node n;
  n.op = Op::kGatherRows;
  n.inputs = {m};
  n.indices = std::move(rows);
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::softmax_cross_entropy(NodeId logits, std::vector<int> labels,
                                   std::vector<std::uint8_t> active) {
  const Tensor& lv = value(logits);
  if (lv.rank() != 2) {
    throw ShapeError("softmax_cross_entropy: expected [rows x classes], got " +
                     lv.shape_str());
  }
  const std::size_t rows = lv.dim(0), cols = lv.dim(1);
  if (labels.size() != rows || active.size() != rows) {
    throw ShapeError("softmax_cross_entropy: labels/active size mismatch");
  }
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!active[r]) continue;
    ++count;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= cols) {
      throw Error("softmax_cross_entropy: label out of range at row " +
                  std::to_string(r));
    }
  }
  if (count == 0) {
    throw Error("softmax_cross_entropy: all positions are padding");
  }
  Tensor probs({rows, cols});
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!active[r]) continue;
    const double* row = lv.data() + r * cols;
    double mx = row[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double denom = 0.0;
    for (std::size_t c = 0; c < cols; ++c) denom += std::exp(row[c] - mx);
    const double lse = mx + std::log(denom);
    for (std::size_t c = 0; c < cols; ++c) {
      probs[r * cols + c] = std::exp(row[c] - lse);
    }
    total += lse - row[labels[r]];
  }
  Node n;
  n.op = Op::kSoftmaxCrossEntropy;
  n.inputs = {logits};
  n.labels = std::move(labels);
  n.active = std::move(active);
  n.factor = static_cast<double>(count);
  n.aux = std::move(probs);
  n.value = Tensor::scalar(total / static_cast<double>(count));
  check_finite(n.value, "softmax_cross_entropy");
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  Node n;
  n.op = Op::kSum;
  n.inputs = {a};
  double total = 0.0;
  for (double v : value(a).values()) total += v;
  n.value = Tensor::scalar(total);
  return push(std::move(n));
}

GradMap Tape::backward(NodeId loss) const {
  const Node& top = node(loss);
  if (!top.value.is_scalar()) {
    throw Error("backward: loss must be a scalar, got shape " +
                top.value.shape_str());
  }
  std::vector<Tensor> adjoint(nodes_.size());
  std::vector<bool> seeded(nodes_.size(), false);

  auto accumulate = [&](NodeId id, const Tensor& grad) {
    auto idx = static_cast<std::size_t>(id);
    if (!seeded[idx]) {
      adjoint[idx] = grad;
      seeded[idx] = true;
    } else {
      adjoint[idx].add_in_place(grad);
    }
  };

  accumulate(loss, Tensor::scalar(1.0));

  for (auto id = static_cast<std::ptrdiff_t>(loss); id >= 0; --id) {
    const auto idx = static_cast<std::size_t>(id);
    if (!seeded[idx]) continue;
    const Node& n = nodes_[idx];
    const Tensor& g = adjoint[idx];
    switch (n.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kMatMul: {
        const Tensor& a = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
        const Tensor& b = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
        if (b.rank() == 1) {
          // g [m], a [m x n], b [n]
          Tensor ga({a.dim(0), a.dim(1)});
          Tensor gb({b.dim(0)});
          for (std::size_t i = 0; i < a.dim(0); ++i) {
            for (std::size_t k = 0; k < a.dim(1); ++k) {
              ga[i * a.dim(1) + k] = g[i] * b[k];
              gb[k] += g[i] * a[i * a.dim(1) + k];
            }
          }
          accumulate(n.inputs[0], ga);
          accumulate(n.inputs[1], gb);
        } else {
          accumulate(n.inputs[0], langloop::matmul(g, langloop::transpose(b)));
          accumulate(n.inputs[1], langloop::matmul(langloop::transpose(a), g));
        }
        break;
      }
      case Op::kAdd:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        break;
      case Op::kAddRowBroadcast: {
        accumulate(n.inputs[0], g);
        const std::size_t cols = g.dim(1);
        Tensor rg({1, cols});
        for (std::size_t r = 0; r < g.dim(0); ++r) {
          for (std::size_t c = 0; c < cols; ++c) rg[c] += g[r * cols + c];
        }
        accumulate(n.inputs[1], rg);
        break;
      }
      case Op::kScale:
        accumulate(n.inputs[0], langloop::scale(g, n.factor));
        break;
      case Op::kGelu: {
        const Tensor& x = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
        Tensor gx = g;
        for (std::size_t i = 0; i < gx.numel(); ++i) {
          gx[i] *= gelu_derivative(x[i]);
        }
        accumulate(n.inputs[0], gx);
        break;
      }
      case Op::kTranspose:
        accumulate(n.inputs[0], langloop::transpose(g));
        break;
      case Op::kSoftmaxRows: {
        const Tensor& y = n.value;
        const std::size_t rows = y.dim(0), cols = y.dim(1);
        Tensor gx({rows, cols});
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            dot += g[r * cols + c] * y[r * cols + c];
          }
          for (std::size_t c = 0; c < cols; ++c) {
            gx[r * cols + c] = y[r * cols + c] * (g[r * cols + c] - dot);
          }
        }
        accumulate(n.inputs[0], gx);
        break;
      }
      case Op::kDropout: {
        Tensor gx = g;
        for (std::size_t i = 0; i < gx.numel(); ++i) {
          gx[i] *= n.aux[i] / n.factor;
        }
        accumulate(n.inputs[0], gx);
        break;
      }
      case Op::kConcatRows: {
        const std::size_t cols = g.dim(1);
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          const Tensor& part = nodes_[static_cast<std::size_t>(n.inputs[i])].value;
          Tensor gp({part.dim(0), cols});
          const std::size_t off = n.indices[i] * cols;
          std::copy(g.values().begin() + static_cast<std::ptrdiff_t>(off),
                    g.values().begin() +
                        static_cast<std::ptrdiff_t>(off + part.numel()),
                    gp.values().begin());
          accumulate(n.inputs[i], gp);
        }
        break;
      }
      case Op::kGatherRows: {
        const Tensor& src = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
        const std::size_t cols = src.dim(1);
        Tensor gm({src.dim(0), cols});
        for (std::size_t i = 0; i < n.indices.size(); ++i) {
          for (std::size_t c = 0; c < cols; ++c) {
            gm[n.indices[i] * cols + c] += g[i * cols + c];
          }
        }
        accumulate(n.inputs[0], gm);
        break;
      }
      case Op::kSoftmaxCrossEntropy: {
        const double gbar = g.scalar_value() / n.factor;
        const Tensor& probs = n.aux;
        const std::size_t rows = probs.dim(0), cols = probs.dim(1);
        Tensor gl({rows, cols});
        for (std::size_t r = 0; r < rows; ++r) {
          if (!n.active[r]) continue;
          for (std::size_t c = 0; c < cols; ++c) {
            gl[r * cols + c] = gbar * probs[r * cols + c];
          }
          gl[r * cols + static_cast<std::size_t>(n.labels[r])] -= gbar;
        }
        accumulate(n.inputs[0], gl);
        break;
      }
      case Op::kSum: {
        const Tensor& x = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
        accumulate(n.inputs[0], Tensor::full(x.shape(), g.scalar_value()));
        break;
      }
    }
  }

  // Every non-frozen parameter on the tape gets an entry; parameters the
  // loss does not depend on get a zero gradient.
  GradMap grads;
  for (const auto& [param, id] : param_nodes_) {
    const auto idx = static_cast<std::size_t>(id);
    if (param->frozen) continue;
    if (seeded[idx]) {
      grads.emplace(param, std::move(adjoint[idx]));
    } else {
      grads.emplace(param, Tensor::zeros(param->value.shape()));
    }
  }
  return grads;
}

}  // namespace langloop
