// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "unguide/tensor.hpp"

namespace unguide {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  const Tape* tape = nullptr;
  std::size_t id = 0;
};

/// Gradients keyed by parameter identity (the address of the parameter
/// tensor registered with Tape::parameter).
class Gradients {
 public:
  bool contains(const Tensor& param) const;
  const Tensor& of(const Tensor& param) const;
  std::size_t size() const noexcept { return grads_.size(); }

  /// Parameters in registration order.
  const std::vector<Tensor*>& params() const noexcept { return params_; }
  const std::vector<Tensor>& grads() const noexcept { return grads_; }

 private:
  friend class Tape;
  std::vector<Tensor*> params_;
  std::vector<Tensor> grads_;
  std::map<const Tensor*, std::size_t> index_;
};

/// Records primitive operations for reverse-mode differentiation.
///
/// Only nodes reachable from a registered parameter carry gradients; constant
/// subgraphs are skipped during backward. Parameters and borrowed constants
/// are referenced, not copied, and must outlive the tape. A tape has a single
/// writer.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Owned constant.
  Var constant(Tensor value);
  /// Borrowed constant; `value` must stay alive and unchanged.
  Var borrow(const Tensor& value);
  /// Trainable leaf. Registering the same tensor twice returns the same node.
  Var parameter(Tensor& param);

  Var matmul(Var a, Var b);     // a[m,k] * b[k,n]
  Var matmul_nt(Var a, Var b);  // a[m,k] * b[n,k]^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// x[n,m] + bias[m] broadcast over rows.
  Var add_bias(Var x, Var bias);
  Var scale(Var a, float s);
  Var gelu(Var a);
  Var gather_rows(Var table, std::vector<std::size_t> rows);
  Var sum(Var a);
  Var sum_squares(Var a);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient of a scalar `loss` with respect to every registered parameter.
  Gradients backward(Var loss) const;

  /// Recomputes every node from its leaves, in recording order.
  std::vector<Tensor> replay() const;

 private:
  enum class Op {
    kConstant,
    kBorrowed,
    kParameter,
    kMatMul,
    kMatMulNT,
    kAdd,
    kSub,
    kAddBias,
    kScale,
    kGelu,
    kGatherRows,
    kSum,
    kSumSquares,
  };

  struct Node {
    Op op;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    float scalar = 0.0F;
    std::vector<std::size_t> rows{};
    Tensor owned{};
    const Tensor* external = nullptr;
    Tensor* param = nullptr;
    bool requires_grad = false;
  };

  std::size_t check(Var v) const;
  const Tensor& node_value(const Node& n) const;
  Var push(Node node);
  Tensor compute(const Node& n, std::span<const Tensor* const> inputs) const;

  std::vector<Node> nodes_;
  std::map<const Tensor*, std::size_t> param_nodes_;
};

}  // namespace unguide
