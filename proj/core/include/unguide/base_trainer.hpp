// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unguide/dataset.hpp"
#include "unguide/denoiser.hpp"
#include "unguide/schedule.hpp"

namespace unguide {

struct BaseTrainConfig {
  std::int64_t steps = 5000;
  std::size_t batch = 64;
  float lr = 0.05F;
  double p_uncond = 0.1;
  std::uint64_t seed = 1;
  /// Upper bound on the final 100-step mean loss; 0 disables the check.
  double loss_threshold = 0.0;

  bool operator==(const BaseTrainConfig&) const = default;
};

/// Flags a run whose loss stays above `factor` times its initial level for
/// `window` consecutive steps. The initial level is the mean of the first
/// ten losses.
class DivergenceMonitor {
 public:
  explicit DivergenceMonitor(double factor = 10.0, std::size_t window = 100)
      : factor_(factor), window_(window) {}

  /// Throws TrainingDivergedError when the rule trips or the loss is not finite.
  void observe(double loss);

 private:
  double factor_;
  std::size_t window_;
  std::vector<double> head_;
  double reference_ = 0.0;
  std::size_t above_ = 0;
};

/// Mean over the last `window` entries (fewer when the trace is shorter).
double tail_mean(const std::vector<double>& trace, std::size_t window = 100);

/// Trains every base tensor of `model` with the epsilon-prediction objective
/// mean ||eps - eps_hat(z_t, t, c)||^2, t ~ U[1, T], replacing c by the neutral
/// concept with probability p_uncond. Per-example randomness derives from
/// (seed, step, index); steps continue from model.trained_steps() so a run can
/// be resumed. Returns the per-step loss trace.
std::vector<double> train_base(DenoiserModel& model, const ToyDataset& data,
                               const NoiseSchedule& sched, const BaseTrainConfig& cfg);

}  // namespace unguide
