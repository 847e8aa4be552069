// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unguide/errors.hpp"

namespace unguide {

bool Gradients::contains(const Tensor& param) const {
  return index_.contains(&param);
}

const Tensor& Gradients::of(const Tensor& param) const {
  auto it = index_.find(&param);
  if (it == index_.end()) throw LookupError("no gradient for this tensor");
  return grads_[it->second];
}

namespace {

constexpr float kInvSqrt2 = static_cast<float>(1.0 / std::numbers::sqrt2);
constexpr float kInvSqrt2Pi =
    static_cast<float>(1.0 / (std::numbers::sqrt2 * 1.7724538509055160273));

float gelu_value(float x) { return 0.5F * x * (1.0F + std::erf(x * kInvSqrt2)); }

float gelu_slope(float x) {
  return 0.5F * (1.0F + std::erf(x * kInvSqrt2)) +
         x * kInvSqrt2Pi * std::exp(-0.5F * x * x);
}

}  // namespace

std::size_t Tape::check(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
  return v.id;
}

const Tensor& Tape::node_value(const Node& n) const {
  if (n.external != nullptr) return *n.external;
  return n.owned;
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n{.op = Op::kConstant};
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::borrow(const Tensor& value) {
  Node n{.op = Op::kBorrowed};
  n.external = &value;
  return push(std::move(n));
}

Var Tape::parameter(Tensor& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return Var{this, it->second};
  }
  Node n{.op = Op::kParameter};
  n.external = &param;
  n.param = &param;
  n.requires_grad = true;
  Var v = push(std::move(n));
  param_nodes_.emplace(&param, v.id);
  return v;
}

Tensor Tape::compute(const Node& n, std::span<const Tensor* const> in) const {
  switch (n.op) {
    case Op::kConstant:
    case Op::kBorrowed:
    case Op::kParameter:
      return node_value(n);
    case Op::kMatMul:
      return unguide::matmul(*in[0], *in[1]);
    case Op::kMatMulNT:
      return unguide::matmul_nt(*in[0], *in[1]);
    case Op::kAdd:
      return unguide::add(*in[0], *in[1]);
    case Op::kSub:
      return unguide::sub(*in[0], *in[1]);
    case Op::kAddBias: {
      const Tensor& x = *in[0];
      const Tensor& b = *in[1];
      if (x.rank() != 2 || b.size() != x.cols()) {
        throw ShapeError("add_bias: bias " + shape_string(b.shape()) +
                         " does not match " + shape_string(x.shape()));
      }
      Tensor y = x;
      for (std::size_t r = 0; r < y.rows(); ++r) {
        auto row = y.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
      }
      return y;
    }
    case Op::kScale:
      return unguide::scale(*in[0], n.scalar);
    case Op::kGelu: {
      Tensor y = *in[0];
      for (float& v : y.values()) v = gelu_value(v);
      return y;
    }
    case Op::kGatherRows: {
      const Tensor& table = *in[0];
      if (table.rank() != 2) throw ShapeError("gather_rows: table must be a matrix");
      Tensor y(Shape{n.rows.size(), table.cols()});
      for (std::size_t i = 0; i < n.rows.size(); ++i) {
        if (n.rows[i] >= table.rows()) throw ShapeError("gather_rows: row out of range");
        auto src = table.row(n.rows[i]);
        std::copy(src.begin(), src.end(), y.row(i).begin());
      }
      return y;
    }
    case Op::kSum:
      return Tensor::scalar(static_cast<float>(unguide::sum(*in[0])));
    case Op::kSumSquares:
      return Tensor::scalar(static_cast<float>(unguide::squared_norm(*in[0])));
  }
  throw ContractError("unknown tape op");
}

namespace {

bool is_leaf_op(int op) { return op <= 2; }

}  // namespace

#define UNGUIDE_BINARY(name, opcode)                                  \
  Var Tape::name(Var a, Var b) {                                      \
    Node n{.op = Op::opcode, .lhs = check(a), .rhs = check(b)};       \
    const Tensor* in[] = {&node_value(nodes_[n.lhs]), &node_value(nodes_[n.rhs])}; \
    n.owned = compute(n, in);                                         \
    n.requires_grad = nodes_[n.lhs].requires_grad || nodes_[n.rhs].requires_grad; \
    return push(std::move(n));                                        \
  }

UNGUIDE_BINARY(matmul, kMatMul)
UNGUIDE_BINARY(matmul_nt, kMatMulNT)
UNGUIDE_BINARY(add, kAdd)
UNGUIDE_BINARY(sub, kSub)
UNGUIDE_BINARY(add_bias, kAddBias)

#undef UNGUIDE_BINARY

#define UNGUIDE_UNARY(name, opcode)                                   \
  Var Tape::name(Var a) {                                             \
    Node n{.op = Op::opcode, .lhs = check(a)};                        \
    const Tensor* in[] = {&node_value(nodes_[n.lhs])};                \
    n.owned = compute(n, in);                                         \
    n.requires_grad = nodes_[n.lhs].requires_grad;                    \
    return push(std::move(n));                                        \
  }

UNGUIDE_UNARY(gelu, kGelu)
UNGUIDE_UNARY(sum, kSum)
UNGUIDE_UNARY(sum_squares, kSumSquares)

#undef UNGUIDE_UNARY

Var Tape::scale(Var a, float s) {
  Node n{.op = Op::kScale, .lhs = check(a), .scalar = s};
  const Tensor* in[] = {&node_value(nodes_[n.lhs])};
  n.owned = compute(n, in);
  n.requires_grad = nodes_[n.lhs].requires_grad;
  return push(std::move(n));
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> rows) {
  Node n{.op = Op::kGatherRows, .lhs = check(table)};
  n.rows = std::move(rows);
  const Tensor* in[] = {&node_value(nodes_[n.lhs])};
  n.owned = compute(n, in);
  n.requires_grad = nodes_[n.lhs].requires_grad;
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return node_value(nodes_[check(v)]); }

bool Tape::requires_grad(Var v) const { return nodes_[check(v)].requires_grad; }

Gradients Tape::backward(Var loss) const {
  const std::size_t root = check(loss);
  if (node_value(nodes_[root]).size() != 1) {
    throw ContractError("backward: loss must be a scalar, got " +
                        shape_string(node_value(nodes_[root]).shape()));
  }

  std::vector<Tensor> grad(nodes_.size());
  auto accumulate = [&](std::size_t id, Tensor g) {
    if (!nodes_[id].requires_grad) return;
    if (grad[id].size() == 0) {
      grad[id] = std::move(g);
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) grad[id][i] += g[i];
    }
  };

  if (nodes_[root].requires_grad) {
    grad[root] = Tensor(node_value(nodes_[root]).shape(), 1.0F);
  }

  for (std::size_t id = root + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || grad[id].size() == 0) continue;
    if (is_leaf_op(static_cast<int>(n.op))) continue;
    const Tensor& g = grad[id];
    switch (n.op) {
      case Op::kMatMul: {
        const Tensor& a = node_value(nodes_[n.lhs]);
        const Tensor& b = node_value(nodes_[n.rhs]);
        if (nodes_[n.lhs].requires_grad) accumulate(n.lhs, unguide::matmul_nt(g, b));
        if (nodes_[n.rhs].requires_grad) accumulate(n.rhs, unguide::matmul_tn(a, g));
        break;
      }
      case Op::kMatMulNT: {
        // c = a b^T: da = g b, db = g^T a
        const Tensor& a = node_value(nodes_[n.lhs]);
        const Tensor& b = node_value(nodes_[n.rhs]);
        if (nodes_[n.lhs].requires_grad) accumulate(n.lhs, unguide::matmul(g, b));
        if (nodes_[n.rhs].requires_grad) accumulate(n.rhs, unguide::matmul_tn(g, a));
        break;
      }
      case Op::kAdd:
        accumulate(n.lhs, g);
        accumulate(n.rhs, g);
        break;
      case Op::kSub:
        accumulate(n.lhs, g);
        if (nodes_[n.rhs].requires_grad) accumulate(n.rhs, unguide::scale(g, -1.0F));
        break;
      case Op::kAddBias: {
        accumulate(n.lhs, g);
        if (nodes_[n.rhs].requires_grad) {
          Tensor gb(node_value(nodes_[n.rhs]).shape());
          for (std::size_t r = 0; r < g.rows(); ++r) {
            auto row = g.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
          }
          accumulate(n.rhs, std::move(gb));
        }
        break;
      }
      case Op::kScale:
        accumulate(n.lhs, unguide::scale(g, n.scalar));
        break;
      case Op::kGelu: {
        const Tensor& x = node_value(nodes_[n.lhs]);
        Tensor gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= gelu_slope(x[i]);
        accumulate(n.lhs, std::move(gx));
        break;
      }
      case Op::kGatherRows: {
        Tensor gt(node_value(nodes_[n.lhs]).shape());
        for (std::size_t i = 0; i < n.rows.size(); ++i) {
          auto src = g.row(i);
          auto dst = gt.row(n.rows[i]);
          for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
        }
        accumulate(n.lhs, std::move(gt));
        break;
      }
      case Op::kSum: {
        const Tensor& x = node_value(nodes_[n.lhs]);
        accumulate(n.lhs, Tensor(x.shape(), g.item()));
        break;
      }
      case Op::kSumSquares: {
        const Tensor& x = node_value(nodes_[n.lhs]);
        accumulate(n.lhs, unguide::scale(x, 2.0F * g.item()));
        break;
      }
      default:
        break;
    }
  }

  Gradients out;
  // Registration order, not address order.
  std::vector<std::pair<std::size_t, Tensor*>> ordered;
  for (const auto& [param, id] : param_nodes_) ordered.emplace_back(id, nodes_[id].param);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, param] : ordered) {
    Tensor g = grad[id].size() == 0 ? Tensor(param->shape()) : std::move(grad[id]);
    out.index_.emplace(param, out.params_.size());
    out.params_.push_back(param);
    out.grads_.push_back(std::move(g));
  }
  return out;
}

std::vector<Tensor> Tape::replay() const {
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    if (is_leaf_op(static_cast<int>(n.op))) {
      values.push_back(node_value(n));
      continue;
    }
    std::vector<const Tensor*> in{&values[n.lhs]};
    if (n.op == Op::kMatMul || n.op == Op::kMatMulNT || n.op == Op::kAdd ||
        n.op == Op::kSub || n.op == Op::kAddBias) {
      in.push_back(&values[n.rhs]);
    }
    values.push_back(compute(n, in));
  }
  return values;
}

}  // namespace unguide
