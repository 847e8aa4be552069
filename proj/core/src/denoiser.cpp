// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/denoiser.hpp"

#include <zlib.h>

#include <cmath>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

std::string_view to_string(TargetMode mode) {
  return mode == TargetMode::kCond ? "cond" : "noncond";
}

TargetMode parse_target_mode(std::string_view text) {
  if (text == "cond") return TargetMode::kCond;
  if (text == "noncond") return TargetMode::kNonCond;
  throw ContractError("unknown target mode '" + std::string(text) +
                      "' (expected cond or noncond)");
}

namespace {

Linear make_linear(std::string name, std::size_t in, std::size_t out, bool bias,
                   Rng& rng) {
  Linear l;
  l.name = std::move(name);
  l.weight = randn(Shape{out, in}, rng, static_cast<float>(1.0 / std::sqrt(in)));
  if (bias) l.bias = Tensor(Shape{out});
  return l;
}

// Unit vector orthogonal to every row of `basis` (Gram-Schmidt on a draw).
std::vector<double> orthogonal_direction(const std::vector<std::vector<double>>& basis,
                                         std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  for (const auto& b : basis) {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += v[i] * b[i];
    for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Mutually orthogonal rows of norm sqrt(dim) for the primaries and the
// neutral concept; the neutral row also gets rho times the primaries' sum.
Tensor init_embeddings(const ConceptVocabulary& vocab, std::size_t dim, double rho,
                       Rng& rng) {
  const auto prim = vocab.primaries();
  if (prim.size() + 1 > dim) {
    throw ContractError("embed_dim " + std::to_string(dim) + " is too small for " +
                        std::to_string(prim.size()) + " concepts");
  }
  const double norm = std::sqrt(static_cast<double>(dim));
  Tensor table(Shape{vocab.table_rows(), dim});
  std::vector<std::vector<double>> basis;
  for (ConceptId id : prim) {
    basis.push_back(orthogonal_direction(basis, dim, rng));
    for (std::size_t i = 0; i < dim; ++i) {
      table(vocab.at(id).table_row, i) = static_cast<float>(basis.back()[i] * norm);
    }
  }
  const auto own = orthogonal_direction(basis, dim, rng);
  const std::size_t row = vocab.at(vocab.neutral()).table_row;
  for (std::size_t i = 0; i < dim; ++i) {
    double sum = 0.0;
    for (const auto& b : basis) sum += b[i] * norm;
    table(row, i) = static_cast<float>(own[i] * norm + rho * sum);
  }
  return table;
}

}  // namespace

DenoiserModel::DenoiserModel(ModelConfig config, ConceptVocabulary vocab,
                             std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)) {
  if (config_.data_dim == 0 || config_.hidden == 0 || config_.depth == 0 ||
      config_.time_dim == 0 || config_.time_dim % 2 != 0) {
    throw ContractError("model: dimensions must be positive and time_dim even");
  }
  if (config_.embed_dim != vocab_.embed_dim()) {
    throw ContractError("model: embed_dim differs from the vocabulary's");
  }
  vocab_.neutral();
  Rng rng(derive_seed(seed, {0x1A7E}));
  for (std::size_t l = 0; l < config_.depth; ++l) {
    const std::size_t in = l == 0 ? config_.data_dim : config_.hidden;
    const std::string prefix = "block" + std::to_string(l);
    layers_.push_back(make_linear(prefix + ".main", in, config_.hidden, true, rng));
    layers_.push_back(
        make_linear(prefix + ".time", config_.time_dim, config_.hidden, false, rng));
    layers_.push_back(
        make_linear(prefix + ".cond", config_.embed_dim, config_.hidden, false, rng));
  }
  layers_.push_back(make_linear("out", config_.hidden, config_.data_dim, true, rng));
  embeddings_ = init_embeddings(vocab_, config_.embed_dim, config_.neutral_overlap, rng);
}

const Linear& DenoiserModel::layer(std::size_t id) const {
  if (id >= layers_.size()) throw LookupError("unknown layer id " + std::to_string(id));
  return layers_[id];
}

Linear& DenoiserModel::layer(std::size_t id) {
  if (id >= layers_.size()) throw LookupError("unknown layer id " + std::to_string(id));
  return layers_[id];
}

LayerRole DenoiserModel::role(std::size_t id) const {
  layer(id);
  if (id == output_layer()) return LayerRole::kOutput;
  switch (id % 3) {
    case 0:
      return LayerRole::kMain;
    case 1:
      return LayerRole::kTime;
    default:
      return LayerRole::kCond;
  }
}

std::vector<std::size_t> DenoiserModel::cond_pathway_ids() const {
  return target_layers(TargetMode::kCond);
}

std::vector<std::size_t> DenoiserModel::target_layers(TargetMode mode) const {
  std::vector<std::size_t> ids;
  for (std::size_t id = 0; id < layers_.size(); ++id) {
    const LayerRole r = role(id);
    if (mode == TargetMode::kCond && r == LayerRole::kCond) ids.push_back(id);
    // Hidden-to-hidden and timestep projections; the 2-wide input and output
    // layers are excluded because a rank-1 update is not low rank there.
    if (mode == TargetMode::kNonCond &&
        ((r == LayerRole::kMain && id != 0) || r == LayerRole::kTime)) {
      ids.push_back(id);
    }
  }
  return ids;
}

Tensor DenoiserModel::embedding_of(ConceptId c) const {
  const Concept& concept_value = vocab_.at(c);
  Tensor e(Shape{config_.embed_dim});
  auto row = embeddings_.row(concept_value.table_row);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = row[i] + concept_value.offset[i];
  return e;
}

std::vector<Tensor*> DenoiserModel::base_parameters() {
  std::vector<Tensor*> out;
  for (Linear& l : layers_) {
    out.push_back(&l.weight);
    if (!l.bias.empty()) out.push_back(&l.bias);
  }
  out.push_back(&embeddings_);
  return out;
}

std::uint32_t DenoiserModel::base_checksum() const {
  uLong crc = crc32(0L, Z_NULL, 0);
  auto mix = [&crc](const Tensor& t) {
    const std::uint32_t c = checksum(t);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(&c), sizeof(c));
  };
  for (const Linear& l : layers_) {
    mix(l.weight);
    mix(l.bias);
  }
  mix(embeddings_);
  return static_cast<std::uint32_t>(crc);
}

void DenoiserModel::validate(const Adapter& adapter) const {
  auto check_layer = [this](std::size_t id, const Shape& expected_by_adapter) {
    if (id >= layers_.size()) {
      throw ContractError("adapter targets unknown layer " + std::to_string(id));
    }
    if (layers_[id].weight.shape() != expected_by_adapter) {
      throw ShapeError("adapter update for layer " + layers_[id].name + " has shape " +
                       shape_string(expected_by_adapter) + ", layer is " +
                       shape_string(layers_[id].weight.shape()));
    }
  };
  if (const auto* lora = std::get_if<LoraAdapter>(&adapter)) {
    for (const LoraFactor& f : lora->factors) {
      if (f.b.rank() != 2 || f.a.rank() != 2 || f.b.cols() != f.a.rows()) {
        throw ShapeError("LoRA factors for layer " + std::to_string(f.layer) +
                         " are not conformable");
      }
      check_layer(f.layer, Shape{f.b.rows(), f.a.cols()});
    }
  } else {
    for (const auto& [id, delta] : std::get<WeightDelta>(adapter).deltas) {
      check_layer(id, delta.shape());
    }
  }
}

void DenoiserModel::attach(Adapter adapter) {
  validate(adapter);
  adapter_ = std::move(adapter);
}

const Adapter* DenoiserModel::adapter() const noexcept {
  return adapter_ ? &*adapter_ : nullptr;
}

LoraAdapter* DenoiserModel::lora() noexcept {
  return adapter_ ? std::get_if<LoraAdapter>(&*adapter_) : nullptr;
}

Tensor DenoiserModel::time_features(std::span<const int> t) const {
  const std::size_t half = config_.time_dim / 2;
  Tensor f(Shape{t.size(), config_.time_dim});
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                   static_cast<double>(half));
      const double arg = static_cast<double>(t[r]) * freq;
      f(r, i) = static_cast<float>(std::sin(arg));
      f(r, half + i) = static_cast<float>(std::cos(arg));
    }
  }
  return f;
}

Var DenoiserModel::linear(Tape& tape, std::size_t id, Var x, Trainable trainable) const {
  const Linear& l = layers_[id];
  auto leaf = [&](const Tensor& t, bool train) {
    return train ? tape.parameter(const_cast<Tensor&>(t)) : tape.borrow(t);
  };
  const bool train_base = trainable == Trainable::kBase;

  Var y;
  const LoraFactor* factor = nullptr;
  const Tensor* dense = nullptr;
  if (adapter_) {
    if (const auto* lora = std::get_if<LoraAdapter>(&*adapter_)) {
      factor = lora->find(id);
    } else {
      dense = std::get<WeightDelta>(*adapter_).find(id);
    }
  }

  if (factor != nullptr && trainable == Trainable::kAdapter) {
    // Factored path keeps B and A on the tape: x W^T + scale (x A^T) B^T.
    const float s = std::get<LoraAdapter>(*adapter_).scale;
    y = tape.matmul_nt(x, tape.borrow(l.weight));
    Var xa = tape.matmul_nt(x, tape.parameter(const_cast<Tensor&>(factor->a)));
    Var xab = tape.matmul_nt(xa, tape.parameter(const_cast<Tensor&>(factor->b)));
    y = tape.add(y, tape.scale(xab, s));
  } else if (factor != nullptr || dense != nullptr) {
    Tensor effective = factor != nullptr
                           ? add(l.weight, materialize(*factor, std::get<LoraAdapter>(*adapter_).scale))
                           : add(l.weight, *dense);
    y = tape.matmul_nt(x, tape.constant(std::move(effective)));
  } else {
    y = tape.matmul_nt(x, leaf(l.weight, train_base));
  }
  if (!l.bias.empty()) y = tape.add_bias(y, leaf(l.bias, train_base));
  return y;
}

Var DenoiserModel::forward_impl(Tape& tape, Var z, std::span<const int> t,
                                std::span<const ConceptId> c,
                                Trainable trainable) const {
  const Tensor& zv = tape.value(z);
  if (zv.rank() != 2 || zv.cols() != config_.data_dim) {
    throw ShapeError("predict_eps: expected [n x " + std::to_string(config_.data_dim) +
                     "] input, got " + shape_string(zv.shape()));
  }
  const std::size_t n = zv.rows();
  if (t.size() != n || c.size() != n) {
    throw ShapeError("predict_eps: per-row timesteps/concepts do not match the batch");
  }

  std::vector<std::size_t> rows(n);
  Tensor offsets(Shape{n, config_.embed_dim});
  bool any_offset = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Concept& concept_value = vocab_.at(c[i]);
    rows[i] = concept_value.table_row;
    if (concept_value.kind == ConceptKind::kSynonym) {
      any_offset = true;
      std::copy(concept_value.offset.values().begin(), concept_value.offset.values().end(),
                offsets.row(i).begin());
    }
  }
  Var table = trainable == Trainable::kBase
                  ? tape.parameter(const_cast<Tensor&>(embeddings_))
                  : tape.borrow(embeddings_);
  Var e = tape.gather_rows(table, std::move(rows));
  if (any_offset) e = tape.add(e, tape.constant(std::move(offsets)));
  Var tau = tape.constant(time_features(t));

  Var h = z;
  for (std::size_t l = 0; l < config_.depth; ++l) {
    Var pre = linear(tape, 3 * l, h, trainable);
    pre = tape.add(pre, linear(tape, 3 * l + 1, tau, trainable));
    pre = tape.add(pre, linear(tape, 3 * l + 2, e, trainable));
    h = tape.gelu(pre);
  }
  return linear(tape, output_layer(), h, trainable);
}

Var DenoiserModel::forward(Tape& tape, Var z, std::span<const int> t,
                           std::span<const ConceptId> c, Trainable trainable) {
  if (trainable == Trainable::kAdapter && lora() == nullptr) {
    throw ContractError("forward: adapter training needs an attached LoRA adapter");
  }
  return forward_impl(tape, z, t, c, trainable);
}

Tensor DenoiserModel::predict_eps(const Tensor& z, std::span<const int> t,
                                  std::span<const ConceptId> c) const {
  Tape tape;
  Var out = forward_impl(tape, tape.borrow(z), t, c, Trainable::kNone);
  return tape.value(out);
}

Tensor DenoiserModel::predict_eps(const Tensor& z, int t, ConceptId c) const {
  vocab_.at(c);
  if (t < 0) throw ContractError("predict_eps: negative timestep");
  const std::size_t n = z.rank() == 2 ? z.rows() : 0;
  std::vector<int> ts(n, t);
  std::vector<ConceptId> cs(n, c);
  return predict_eps(z, ts, cs);
}

LoraAdapter make_lora_adapter(const DenoiserModel& model, TargetMode mode,
                              std::size_t rank, float scale, float a_init_std,
                              std::uint64_t seed) {
  if (rank == 0) throw ContractError("LoRA rank must be positive");
  LoraAdapter adapter;
  adapter.rank = rank;
  adapter.scale = scale;
  Rng rng(derive_seed(seed, {0x10CA}));
  for (std::size_t id : model.target_layers(mode)) {
    const Tensor& w = model.layer(id).weight;
    if (rank >= std::min(w.rows(), w.cols())) {
      throw ContractError("LoRA rank " + std::to_string(rank) + " is not below min(d, k) for " +
                          model.layer(id).name);
    }
    LoraFactor f;
    f.layer = id;
    f.b = Tensor(Shape{w.rows(), rank});
    f.a = randn(Shape{rank, w.cols()}, rng, a_init_std);
    adapter.factors.push_back(std::move(f));
  }
  return adapter;
}

}  // namespace unguide
