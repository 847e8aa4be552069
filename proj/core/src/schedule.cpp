// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/schedule.hpp"

#include <cmath>
#include <string>

#include "unguide/errors.hpp"

namespace unguide {

NoiseSchedule::NoiseSchedule(const ScheduleConfig& config) : config_(config) {
  const int T = config.train_steps;
  if (T < 1) throw ContractError("schedule: train_steps must be positive");
  if (config.inference_steps < 1 || config.inference_steps > T) {
    throw ContractError("schedule: inference_steps must lie in [1, train_steps]");
  }
  if (!(config.beta_start > 0.0) || !(config.beta_end < 1.0) ||
      config.beta_end < config.beta_start) {
    throw ContractError("schedule: need 0 < beta_start <= beta_end < 1");
  }
  betas_.resize(T);
  alpha_bars_.resize(T + 1);
  alpha_bars_[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / (T - 1);
    betas_[t - 1] = config.beta_start + frac * (config.beta_end - config.beta_start);
    alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
  }
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > total_steps()) {
    throw ContractError("beta: timestep " + std::to_string(t) + " out of range");
  }
  return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (!contains(t)) {
    throw ContractError("alpha_bar: timestep " + std::to_string(t) + " out of range");
  }
  return alpha_bars_[t];
}

std::vector<int> NoiseSchedule::step_plan() const {
  const int n = inference_steps();
  const int T = total_steps();
  std::vector<int> plan(n + 1);
  for (int i = 0; i <= n; ++i) {
    plan[i] = static_cast<int>(std::lround(static_cast<double>(T) * (n - i) / n));
  }
  return plan;
}

std::vector<int> NoiseSchedule::full_plan() const {
  std::vector<int> plan(total_steps() + 1);
  for (int i = 0; i <= total_steps(); ++i) plan[i] = total_steps() - i;
  return plan;
}

int NoiseSchedule::timestep_after(int k) const {
  if (k < 0 || k > inference_steps()) {
    throw ContractError("timestep_after: step count " + std::to_string(k) +
                        " out of range");
  }
  return step_plan()[k];
}

}  // namespace unguide
