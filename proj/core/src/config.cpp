// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/config.hpp"

#include <set>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/fileio.hpp"
#include "unguide/rng.hpp"

namespace unguide {

using nlohmann::json;

namespace {

constexpr const char* kActivation = "gelu_erf";

// Reads the keys of one JSON object and rejects any it was not asked for.
class Reader {
 public:
  Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ContractError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ContractError("config: bad value for '" + path_ + "." + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    known_.insert(key);
    return doc_.contains(key) ? &doc_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (known_.count(key) == 0) {
        throw ContractError("config: unknown key '" + path_ + "." + key + "'");
      }
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace

BaseTrainConfig RunConfig::default_base_train() {
  BaseTrainConfig c;
  c.steps = 4000;
  c.batch = 128;
  c.lr = 0.05F;
  c.p_uncond = 0.1;
  c.loss_threshold = 0.5;
  return c;
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto strip = [](BaseTrainConfig b) {
    b.seed = 0;
    return b;
  };
  auto strip_probe = [](ProbeConfig p) {
    p.seed = 0;
    return p;
  };
  return dataset == o.dataset && schedule == o.schedule && model == o.model &&
         strip(base_train) == strip(o.base_train) && unlearn == o.unlearn &&
         strip_probe(probe) == strip_probe(o.probe) && eval == o.eval && seed == o.seed;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["dataset"] = {{"clusters", cfg.dataset.clusters},
                  {"spread", cfg.dataset.spread},
                  {"variance", cfg.dataset.variance},
                  {"synonyms_per_concept", cfg.dataset.synonyms_per_concept},
                  {"synonym_offset_std", cfg.dataset.synonym_offset_std}};
  j["schedule"] = {{"train_steps", cfg.schedule.train_steps},
                   {"beta_start", cfg.schedule.beta_start},
                   {"beta_end", cfg.schedule.beta_end},
                   {"inference_steps", cfg.schedule.inference_steps}};
  j["model"] = {{"data_dim", cfg.model.data_dim},
                {"hidden", cfg.model.hidden},
                {"depth", cfg.model.depth},
                {"embed_dim", cfg.model.embed_dim},
                {"time_dim", cfg.model.time_dim},
                {"neutral_overlap", cfg.model.neutral_overlap},
                {"activation", kActivation}};
  j["base_train"] = {{"steps", cfg.base_train.steps},
                     {"batch", cfg.base_train.batch},
                     {"lr", cfg.base_train.lr},
                     {"p_uncond", cfg.base_train.p_uncond},
                     {"loss_threshold", cfg.base_train.loss_threshold}};
  j["unlearn"] = {{"target", cfg.unlearn.target},
                  {"mapping", cfg.unlearn.mapping},
                  {"alpha", cfg.unlearn.alpha},
                  {"gamma", cfg.unlearn.gamma},
                  {"iterations", cfg.unlearn.iterations},
                  {"lr", cfg.unlearn.lr},
                  {"probe_min", cfg.unlearn.probe_min},
                  {"probe_max", cfg.unlearn.probe_max},
                  {"rank", cfg.unlearn.rank},
                  {"scale", cfg.unlearn.scale},
                  {"a_init_std", cfg.unlearn.a_init_std},
                  {"target_mode", std::string(to_string(cfg.unlearn.target_mode))},
                  {"noncond_iterations", cfg.unlearn.noncond_iterations},
                  {"noncond_lr", cfg.unlearn.noncond_lr}};
  j["probe"] = {{"trials", cfg.probe.trials},
                {"probe_steps", cfg.probe.probe_steps},
                {"w_erase", cfg.probe.w_erase},
                {"w_retain", cfg.probe.w_retain},
                {"cfg_scale", cfg.probe.cfg_scale}};
  j["eval"] = {{"n_per_prompt", cfg.eval.n_per_prompt},
               {"cfg_scale", cfg.eval.cfg_scale},
               {"reuse_probe_latents", cfg.eval.reuse_probe_latents}};
  return j;
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  Reader root(doc, "config");
  root.get("seed", cfg.seed);
  if (const json* d = root.child("dataset")) {
    Reader r(*d, "dataset");
    r.get("clusters", cfg.dataset.clusters);
    r.get("spread", cfg.dataset.spread);
    r.get("variance", cfg.dataset.variance);
    r.get("synonyms_per_concept", cfg.dataset.synonyms_per_concept);
    r.get("synonym_offset_std", cfg.dataset.synonym_offset_std);
    r.finish();
  }
  if (const json* d = root.child("schedule")) {
    Reader r(*d, "schedule");
    r.get("train_steps", cfg.schedule.train_steps);
    r.get("beta_start", cfg.schedule.beta_start);
    r.get("beta_end", cfg.schedule.beta_end);
    r.get("inference_steps", cfg.schedule.inference_steps);
    r.finish();
  }
  if (const json* d = root.child("model")) {
    Reader r(*d, "model");
    r.get("data_dim", cfg.model.data_dim);
    r.get("hidden", cfg.model.hidden);
    r.get("depth", cfg.model.depth);
    r.get("embed_dim", cfg.model.embed_dim);
    r.get("time_dim", cfg.model.time_dim);
    r.get("neutral_overlap", cfg.model.neutral_overlap);
    std::string activation = kActivation;
    r.get("activation", activation);
    if (activation != kActivation) {
      throw ContractError("config: only the '" + std::string(kActivation) +
                          "' activation is supported");
    }
    r.finish();
  }
  if (const json* d = root.child("base_train")) {
    Reader r(*d, "base_train");
    r.get("steps", cfg.base_train.steps);
    r.get("batch", cfg.base_train.batch);
    r.get("lr", cfg.base_train.lr);
    r.get("p_uncond", cfg.base_train.p_uncond);
    r.get("loss_threshold", cfg.base_train.loss_threshold);
    r.finish();
  }
  if (const json* d = root.child("unlearn")) {
    Reader r(*d, "unlearn");
    r.get("target", cfg.unlearn.target);
    r.get("mapping", cfg.unlearn.mapping);
    r.get("alpha", cfg.unlearn.alpha);
    r.get("gamma", cfg.unlearn.gamma);
    r.get("iterations", cfg.unlearn.iterations);
    r.get("lr", cfg.unlearn.lr);
    r.get("probe_min", cfg.unlearn.probe_min);
    r.get("probe_max", cfg.unlearn.probe_max);
    r.get("rank", cfg.unlearn.rank);
    r.get("scale", cfg.unlearn.scale);
    r.get("a_init_std", cfg.unlearn.a_init_std);
    std::string mode(to_string(cfg.unlearn.target_mode));
    r.get("target_mode", mode);
    cfg.unlearn.target_mode = parse_target_mode(mode);
    r.get("noncond_iterations", cfg.unlearn.noncond_iterations);
    r.get("noncond_lr", cfg.unlearn.noncond_lr);
    r.finish();
  }
  if (const json* d = root.child("probe")) {
    Reader r(*d, "probe");
    r.get("trials", cfg.probe.trials);
    r.get("probe_steps", cfg.probe.probe_steps);
    r.get("w_erase", cfg.probe.w_erase);
    r.get("w_retain", cfg.probe.w_retain);
    r.get("cfg_scale", cfg.probe.cfg_scale);
    r.finish();
  }
  if (const json* d = root.child("eval")) {
    Reader r(*d, "eval");
    r.get("n_per_prompt", cfg.eval.n_per_prompt);
    r.get("cfg_scale", cfg.eval.cfg_scale);
    r.get("reuse_probe_latents", cfg.eval.reuse_probe_latents);
    r.finish();
  }
  root.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  write_file_atomic(path, to_json(cfg).dump(2) + "\n");
}

std::uint64_t stage_seed(const RunConfig& cfg, Stage stage) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(stage)});
}

ConceptVocabulary make_vocabulary(const RunConfig& cfg) {
  return ConceptVocabulary::standard(cfg.dataset.clusters, cfg.model.embed_dim,
                                     cfg.dataset.synonyms_per_concept,
                                     cfg.dataset.synonym_offset_std,
                                     stage_seed(cfg, Stage::kVocabulary));
}

ToyDataset make_dataset(const RunConfig& cfg, const ConceptVocabulary& vocab) {
  return ToyDataset::standard(cfg.dataset, vocab);
}

NoiseSchedule make_schedule(const RunConfig& cfg) { return NoiseSchedule(cfg.schedule); }

DenoiserModel make_model(const RunConfig& cfg, const ConceptVocabulary& vocab) {
  return DenoiserModel(cfg.model, vocab, stage_seed(cfg, Stage::kModelInit));
}

BaseTrainConfig base_train_config(const RunConfig& cfg) {
  BaseTrainConfig c = cfg.base_train;
  c.seed = stage_seed(cfg, Stage::kBaseTrain);
  return c;
}

UnlearnConfig unlearn_config(const RunConfig& cfg, const ConceptVocabulary& vocab) {
  const UnlearnSpec& s = cfg.unlearn;
  UnlearnConfig c;
  c.target = vocab.resolve(s.target);
  if (s.mapping.empty()) {
    const auto m = vocab.mapping(c.target);
    if (!m) throw ContractError("concept '" + s.target + "' has no mapping concept");
    c.mapping = *m;
  } else {
    c.mapping = vocab.resolve(s.mapping);
  }
  c.alpha = s.alpha;
  c.gamma = s.gamma;
  const bool noncond = s.target_mode == TargetMode::kNonCond;
  c.iterations = noncond ? s.noncond_iterations : s.iterations;
  c.lr = noncond ? s.noncond_lr : s.lr;
  c.probe_min = s.probe_min;
  c.probe_max = s.probe_max;
  c.rank = s.rank;
  c.scale = s.scale;
  c.a_init_std = s.a_init_std;
  c.target_mode = s.target_mode;
  c.seed = stage_seed(cfg, Stage::kUnlearn);
  return c;
}

ProbeConfig probe_config(const RunConfig& cfg) {
  ProbeConfig c = cfg.probe;
  c.seed = stage_seed(cfg, Stage::kProbe);
  return c;
}

EvalConfig eval_config(const RunConfig& cfg) {
  EvalConfig c;
  c.n_per_prompt = cfg.eval.n_per_prompt;
  c.probe = probe_config(cfg);
  c.sampler.cfg = CfgParams{cfg.eval.cfg_scale};
  c.sampler.reuse_probe_latents = cfg.eval.reuse_probe_latents;
  c.seed = stage_seed(cfg, Stage::kEval);
  return c;
}

}  // namespace unguide
