// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "unguide/base_trainer.hpp"
#include "unguide/dataset.hpp"
#include "unguide/eval.hpp"
#include "unguide/schedule.hpp"
#include "unguide/unguidance.hpp"
#include "unguide/unlearn.hpp"

namespace unguide {

/// Unlearning parameters with concepts referenced by name (or decimal id).
/// An empty mapping selects the vocabulary's mapping concept.
struct UnlearnSpec {
  std::string target = "cat";
  std::string mapping;
  float alpha = 9.0F;
  float gamma = 2.0F;
  std::int64_t iterations = 200;
  float lr = 5e-3F;
  int probe_min = 5;
  int probe_max = 40;
  std::size_t rank = 1;
  float scale = 8.0F;
  float a_init_std = 0.003F;
  TargetMode target_mode = TargetMode::kCond;
  // Used instead of iterations/lr when target_mode is noncond.
  std::int64_t noncond_iterations = 1200;
  float noncond_lr = 1e-4F;

  bool operator==(const UnlearnSpec&) const = default;
};

struct EvalSpec {
  std::size_t n_per_prompt = 200;
  float cfg_scale = 7.5F;
  bool reuse_probe_latents = false;

  bool operator==(const EvalSpec&) const = default;
};

/// Everything an experiment needs. Component seeds derive from `seed`; the
/// seed fields of the embedded configs are not serialized.
struct RunConfig {
  DatasetSpec dataset;
  ScheduleConfig schedule;
  ModelConfig model;
  BaseTrainConfig base_train = default_base_train();
  UnlearnSpec unlearn;
  ProbeConfig probe;
  EvalSpec eval;
  std::uint64_t seed = 2026;

  static BaseTrainConfig default_base_train();
  bool operator==(const RunConfig&) const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

/// Seeds of the pipeline stages.
enum class Stage : std::uint64_t {
  kVocabulary = 1,
  kModelInit,
  kBaseTrain,
  kUnlearn,
  kProbe,
  kEval,
  kSample,
};
std::uint64_t stage_seed(const RunConfig& cfg, Stage stage);

ConceptVocabulary make_vocabulary(const RunConfig& cfg);
ToyDataset make_dataset(const RunConfig& cfg, const ConceptVocabulary& vocab);
NoiseSchedule make_schedule(const RunConfig& cfg);
DenoiserModel make_model(const RunConfig& cfg, const ConceptVocabulary& vocab);
BaseTrainConfig base_train_config(const RunConfig& cfg);
UnlearnConfig unlearn_config(const RunConfig& cfg, const ConceptVocabulary& vocab);
ProbeConfig probe_config(const RunConfig& cfg);
EvalConfig eval_config(const RunConfig& cfg);

}  // namespace unguide
