// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unguide/dataset.hpp"
#include "unguide/unguidance.hpp"

namespace unguide {

/// Nearest-centroid labels over the true generating means.
class ConceptClassifier {
 public:
  explicit ConceptClassifier(std::vector<std::vector<double>> centroids);
  explicit ConceptClassifier(const ToyDataset& data);

  const std::vector<std::vector<double>>& centroids() const noexcept { return centroids_; }
  /// Ties go to the lowest cluster id.
  std::vector<std::size_t> classify(const Tensor& points) const;

 private:
  std::vector<std::vector<double>> centroids_;
};

/// 3 / ((1 - acc_e)^-1 + acc_s^-1 + (1 - acc_g)^-1); 0 at the poles
/// acc_e = 1, acc_g = 1 or acc_s = 0.
double harmonic_ho(double acc_e, double acc_s, double acc_g);

enum class PromptRole { kErased, kRetained, kSynonym };
std::string_view to_string(PromptRole role);

struct PromptResult {
  ConceptId concept_id = 0;
  std::string name;
  PromptRole role = PromptRole::kRetained;
  std::size_t n = 0;
  /// Fraction of samples classified into the prompt's own cluster.
  double accuracy = 0.0;
  Route route = Route::kRetain;
  double w = 0.0;
  double mean_c = 0.0;
  double mean_c0 = 0.0;
};

struct MetricsReport {
  double acc_e = 0.0;
  double acc_s = 0.0;
  double acc_g = 0.0;
  double h_o = 0.0;
  std::vector<PromptResult> prompts;
};

struct EvalConfig {
  std::size_t n_per_prompt = 200;
  ProbeConfig probe;
  SamplerConfig sampler;
  std::uint64_t seed = 1;
};

/// Samples every prompt class through generate_unguided: the erased concepts
/// (Acc_e, pooled fraction still in their own cluster), every other primary
/// (Acc_s, pooled fraction correct) and the synonyms of the erased concepts
/// (Acc_g, pooled fraction in the erased cluster). Prompt c draws its noise
/// from derive_seed(seed, {c}) and its probe from derive_seed(seed, {c, 1}).
MetricsReport run_erasure_eval(const DenoiserModel& base, const DenoiserModel& adapted,
                               const ToyDataset& data, const std::vector<ConceptId>& erased,
                               const EvalConfig& cfg, const NoiseSchedule& sched);

/// Fraction of base-model CFG samples of c landing in c's cluster.
double conditional_accuracy(const DenoiserModel& model, const ToyDataset& data, ConceptId c,
                            std::size_t n, const CfgParams& cfg, std::uint64_t seed,
                            const NoiseSchedule& sched);

struct NormTableRow {
  int steps = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  double mean_erased = 0.0;
  double mean_neutral = 0.0;
  double mean_retained = 0.0;
  double seconds = 0.0;
};

struct NormGrid {
  std::vector<int> steps;
  std::vector<std::size_t> repeats;
  std::vector<std::uint64_t> seeds;
};

/// Mean divergence norms of the erased, neutral and one retained concept for
/// every (steps, repeats, seed) cell, with wall-clock seconds per cell.
std::vector<NormTableRow> norm_table_report(const DenoiserModel& base,
                                            const DenoiserModel& adapted, ConceptId erased,
                                            ConceptId retained, const NormGrid& grid,
                                            const ProbeConfig& base_cfg,
                                            const NoiseSchedule& sched);

}  // namespace unguide
