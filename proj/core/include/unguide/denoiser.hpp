// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unguide/diffusion.hpp"
#include "unguide/lora.hpp"
#include "unguide/tape.hpp"
#include "unguide/vocabulary.hpp"

namespace unguide {

struct ModelConfig {
  std::size_t data_dim = 2;
  std::size_t hidden = 128;
  std::size_t depth = 4;
  std::size_t embed_dim = 16;
  std::size_t time_dim = 16;
  /// Initial share of the primaries' summed embeddings in the neutral row.
  double neutral_overlap = 0.1;

  bool operator==(const ModelConfig&) const = default;
};

/// Fully-connected layer y = x W^T + b, W stored [out x in].
struct Linear {
  std::string name;
  Tensor weight;
  Tensor bias;  // empty when the layer has no bias
};

enum class LayerRole { kMain, kTime, kCond, kOutput };

/// Which layers a LoRA adapter modifies: the conditioning pathway (the
/// layers reading the concept embedding) or the hidden layers outside it.
enum class TargetMode { kCond, kNonCond };

std::string_view to_string(TargetMode mode);
TargetMode parse_target_mode(std::string_view text);

/// What a forward pass registers as trainable on the tape.
enum class Trainable { kNone, kBase, kAdapter };

/// Conditional noise predictor over low-dimensional points.
///
/// Each of `depth` hidden blocks computes
///   h' = gelu(main(h) + time(tau(t)) + cond(e(c)))
/// where tau is a sinusoidal timestep feature vector and e(c) the concept
/// embedding, followed by a linear output layer. Layer ids: block l owns
/// main = 3l, time = 3l + 1, cond = 3l + 2; the output layer is 3 * depth.
///
/// An attached adapter replaces W by W + dW on its target layers. Inference
/// materializes dW densely; a tape with Trainable::kAdapter keeps the LoRA
/// factors so they receive gradients. Base weights are never modified by
/// attach or detach.
class DenoiserModel : public NoisePredictor {
 public:
  DenoiserModel(ModelConfig config, ConceptVocabulary vocab, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const ConceptVocabulary& vocab() const noexcept { return vocab_; }

  std::size_t layer_count() const noexcept { return layers_.size(); }
  const Linear& layer(std::size_t id) const;
  Linear& layer(std::size_t id);
  LayerRole role(std::size_t id) const;
  std::size_t output_layer() const noexcept { return layers_.size() - 1; }
  std::vector<std::size_t> cond_pathway_ids() const;
  std::vector<std::size_t> target_layers(TargetMode mode) const;

  const Tensor& embeddings() const noexcept { return embeddings_; }
  Tensor& embeddings() noexcept { return embeddings_; }
  /// e(c): the concept's table row plus its fixed offset.
  Tensor embedding_of(ConceptId c) const;

  /// Every base tensor (weights, biases, embedding table).
  std::vector<Tensor*> base_parameters();
  std::uint32_t base_checksum() const;

  /// Optimizer steps the base weights have seen (0 = untrained).
  std::int64_t trained_steps() const noexcept { return trained_steps_; }
  void set_trained_steps(std::int64_t steps) noexcept { trained_steps_ = steps; }

  /// Replaces any attached adapter.
  void attach(Adapter adapter);
  void detach() noexcept { adapter_.reset(); }
  bool has_adapter() const noexcept { return adapter_.has_value(); }
  const Adapter* adapter() const noexcept;
  /// The attached LoRA adapter for training, or nullptr.
  LoraAdapter* lora() noexcept;

  Tensor predict_eps(const Tensor& z, int t, ConceptId c) const override;
  ConceptId neutral() const override { return vocab_.neutral(); }

  /// Per-row timesteps and concepts.
  Tensor predict_eps(const Tensor& z, std::span<const int> t,
                     std::span<const ConceptId> c) const;

  /// Records the forward pass on `tape`.
  Var forward(Tape& tape, Var z, std::span<const int> t, std::span<const ConceptId> c,
              Trainable trainable);

  /// Sinusoidal timestep features, one row per entry of t.
  Tensor time_features(std::span<const int> t) const;

 private:
  Var forward_impl(Tape& tape, Var z, std::span<const int> t,
                   std::span<const ConceptId> c, Trainable trainable) const;
  Var linear(Tape& tape, std::size_t id, Var x, Trainable trainable) const;
  void validate(const Adapter& adapter) const;

  ModelConfig config_;
  ConceptVocabulary vocab_;
  std::vector<Linear> layers_;
  Tensor embeddings_;
  std::optional<Adapter> adapter_;
  std::int64_t trained_steps_ = 0;
};

/// A zero-effect LoRA adapter (A ~ N(0, a_init_std^2), B = 0) on the layers
/// selected by `mode`.
LoraAdapter make_lora_adapter(const DenoiserModel& model, TargetMode mode,
                              std::size_t rank, float scale, float a_init_std,
                              std::uint64_t seed);

}  // namespace unguide
