// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace unguide {

struct ScheduleConfig {
  /// Number of training timesteps T; timestep 0 is clean data.
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  /// DDIM steps used for sampling, probing and partial denoising.
  int inference_steps = 50;

  bool operator==(const ScheduleConfig&) const = default;
};

/// Linear beta schedule with cumulative products alpha_bar.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(const ScheduleConfig& config = {});

  const ScheduleConfig& config() const noexcept { return config_; }
  int total_steps() const noexcept { return config_.train_steps; }
  int inference_steps() const noexcept { return config_.inference_steps; }

  /// beta_t for t in [1, T].
  double beta(int t) const;
  /// alpha_bar_t for t in [0, T]; alpha_bar_0 = 1.
  double alpha_bar(int t) const;
  bool contains(int t) const noexcept { return t >= 0 && t <= total_steps(); }

  /// The DDIM trajectory: inference_steps + 1 evenly spaced timesteps from T
  /// down to 0, strictly decreasing.
  std::vector<int> step_plan() const;
  /// Every timestep T, T-1, ..., 0.
  std::vector<int> full_plan() const;
  /// Timestep reached after k steps of step_plan().
  int timestep_after(int k) const;

 private:
  ScheduleConfig config_;
  std::vector<double> betas_;       // index t-1
  std::vector<double> alpha_bars_;  // index t
};

}  // namespace unguide
