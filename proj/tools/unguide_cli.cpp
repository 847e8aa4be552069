// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

// unguide: train, unlearn, probe, sample and evaluate from the command line.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "unguide/base_trainer.hpp"
#include "unguide/checkpoint.hpp"
#include "unguide/config.hpp"
#include "unguide/csv.hpp"
#include "unguide/errors.hpp"
#include "unguide/eval.hpp"
#include "unguide/fileio.hpp"
#include "unguide/plot.hpp"
#include "unguide/unguidance.hpp"
#include "unguide/unlearn.hpp"

namespace fs = std::filesystem;
using namespace unguide;

namespace {

struct Options {
  std::string config;
  std::string base;
  std::vector<std::string> loras;
  std::string out;
  std::optional<std::uint64_t> seed;

  // train-lora
  std::string concept_name;
  std::optional<std::string> mapping;
  std::optional<float> alpha;
  std::optional<float> gamma;
  std::optional<std::int64_t> iters;
  std::optional<float> lr;
  std::optional<std::string> target_mode;

  // probe
  std::optional<std::size_t> trials;
  std::optional<int> probe_steps;
  std::optional<double> w_erase;
  std::optional<double> w_retain;

  // sample
  std::string mode = "auto";
  std::optional<double> w;
  std::size_t n = 200;

  // eval
  std::vector<std::string> erased;
  std::optional<std::size_t> eval_n;

  // mix
  double mix_alpha = 0.5;

  // norm-table
  std::vector<int> steps_grid{5, 10, 25};
  std::vector<std::size_t> repeats_grid{10, 30};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string retained;

  // plot
  std::string input;
};

// Console output carries no timestamps so that stdout/stderr are
// reproducible; the sidecar log next to the artifact has them.
void setup_logging(const std::string& sidecar) {
  std::vector<spdlog::sink_ptr> sinks;
  auto console = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  console->set_pattern("[%l] %v");
  sinks.push_back(console);
  if (!sidecar.empty()) {
    auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>(sidecar, true);
    file->set_pattern("%Y-%m-%dT%H:%M:%S.%e [%l] %v");
    sinks.push_back(file);
  }
  auto logger = std::make_shared<spdlog::logger>("unguide", sinks.begin(), sinks.end());
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("UNGUIDE_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  logger->flush_on(spdlog::level::trace);
  spdlog::set_default_logger(logger);
}

std::string sidecar_for(const std::string& out) {
  return out.empty() ? std::string{} : out + ".log";
}

struct Loaded {
  RunConfig cfg;
  DenoiserModel base;
};

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
  return value;
}

// The base checkpoint's config snapshot unless --config overrides it.
Loaded load_base(const Options& o) {
  const Checkpoint ckpt = load_checkpoint(require(o.base, "--base"));
  if (ckpt.role != CheckpointRole::kModel) {
    throw FormatError(o.base + " is not a model checkpoint");
  }
  RunConfig cfg = o.config.empty() ? run_config_from_json(ckpt.config) : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return {cfg, unpack_model(ckpt)};
}

DenoiserModel with_adapter(const DenoiserModel& base, const std::string& path) {
  DenoiserModel adapted = base;
  adapted.attach(load_adapter(path));
  return adapted;
}

const std::string& single_lora(const Options& o) {
  if (o.loras.size() != 1) throw CLI::ValidationError("--lora", "exactly one adapter expected");
  return o.loras.front();
}

void apply_probe_flags(const Options& o, ProbeConfig& p) {
  if (o.trials) p.trials = *o.trials;
  if (o.probe_steps) p.probe_steps = *o.probe_steps;
  if (o.w_erase) p.w_erase = *o.w_erase;
  if (o.w_retain) p.w_retain = *o.w_retain;
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

int cmd_train_base(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  const ConceptVocabulary vocab = make_vocabulary(cfg);
  const ToyDataset data = make_dataset(cfg, vocab);
  const NoiseSchedule sched = make_schedule(cfg);
  DenoiserModel model = make_model(cfg, vocab);
  spdlog::info("training base model: {} steps, batch {}", cfg.base_train.steps,
               cfg.base_train.batch);
  const auto trace = train_base(model, data, sched, base_train_config(cfg));
  spdlog::info("final loss (tail mean) {:.6f}", tail_mean(trace));
  save_checkpoint(require(o.out, "--out"), model, to_json(cfg));
  spdlog::info("wrote {}", o.out);
  return 0;
}

int cmd_train_lora(const Options& o) {
  Loaded l = load_base(o);
  UnlearnSpec& u = l.cfg.unlearn;
  if (!o.concept_name.empty()) u.target = o.concept_name;
  if (o.mapping) u.mapping = *o.mapping;
  if (o.alpha) u.alpha = *o.alpha;
  if (o.gamma) u.gamma = *o.gamma;
  if (o.target_mode) u.target_mode = parse_target_mode(*o.target_mode);
  const bool noncond = u.target_mode == TargetMode::kNonCond;
  if (o.iters) (noncond ? u.noncond_iterations : u.iterations) = *o.iters;
  if (o.lr) (noncond ? u.noncond_lr : u.lr) = *o.lr;
  const UnlearnConfig ucfg = unlearn_config(l.cfg, l.base.vocab());
  spdlog::info("unlearning '{}' toward '{}' ({} iterations, {} layers)", u.target,
               l.base.vocab().at(ucfg.mapping).name, ucfg.iterations, to_string(ucfg.target_mode));
  const UnlearnResult r = train_lora(l.base, make_schedule(l.cfg), ucfg);
  spdlog::info("final loss (tail mean) {:.6f}", tail_mean(r.loss));
  save_checkpoint(require(o.out, "--out"), Adapter{r.adapter}, to_json(l.cfg));
  spdlog::info("wrote {}", o.out);
  return 0;
}

int cmd_probe(const Options& o) {
  Loaded l = load_base(o);
  const DenoiserModel adapted = with_adapter(l.base, single_lora(o));
  const ConceptId c = l.base.vocab().resolve(require(o.concept_name, "--concept"));
  ProbeConfig p = probe_config(l.cfg);
  apply_probe_flags(o, p);
  const ProbeResult r = probe(l.base, adapted, c, p, make_schedule(l.cfg));
  const GuidanceDecision& d = r.decision;
  std::printf("concept=%s route=%s w=%g mean_c=%.6f mean_c0=%.6f\n",
              l.base.vocab().at(c).name.c_str(), std::string(to_string(d.route)).c_str(), d.w,
              d.mean_c, d.mean_c0);
  if (!o.out.empty()) {
    CsvTable t;
    t.header = {"branch", "trial", "norm"};
    auto add = [&t](const char* branch, const DivergenceStats& s) {
      for (std::size_t i = 0; i < s.norms.size(); ++i) {
        t.rows.push_back({branch, std::to_string(i), format_double(s.norms[i])});
      }
    };
    add("concept", r.concept_stats);
    add("neutral", r.neutral_stats);
    write_file_atomic(o.out, format_csv(t));
  }
  return 0;
}

int cmd_sample(const Options& o) {
  Loaded l = load_base(o);
  const ConceptId c = l.base.vocab().resolve(require(o.concept_name, "--concept"));
  const NoiseSchedule sched = make_schedule(l.cfg);
  const std::uint64_t seed = o.seed ? *o.seed : stage_seed(l.cfg, Stage::kSample);
  const CfgParams cfg{l.cfg.eval.cfg_scale};
  const std::vector<int> plan = sched.step_plan();
  const std::size_t dim = l.base.config().data_dim;

  Tensor points;
  if (o.mode == "base") {
    points = sample(l.base, c, plan, cfg, seed, o.n, dim, sched);
  } else if (o.mode == "lora") {
    points = sample(with_adapter(l.base, single_lora(o)), c, plan, cfg, seed, o.n, dim, sched);
  } else {
    const DenoiserModel adapted = with_adapter(l.base, single_lora(o));
    ProbeConfig p = probe_config(l.cfg);
    apply_probe_flags(o, p);
    SamplerConfig s;
    s.cfg = cfg;
    s.reuse_probe_latents = l.cfg.eval.reuse_probe_latents;
    if (o.mode == "unguide") {
      if (!o.w) throw CLI::RequiredError("--w");
      s.forced_w = *o.w;
    }
    const UnguidedSamples u = generate_unguided(l.base, adapted, c, p, s, o.n, seed, sched);
    points = u.samples;
    if (u.decision) {
      spdlog::info("route={} w={} mean_c={:.6f} mean_c0={:.6f}", to_string(u.decision->route),
                   u.decision->w, u.decision->mean_c, u.decision->mean_c0);
    }
  }
  write_or_print(o.out, format_csv(samples_table(l.base.vocab().at(c).name, points)));
  return 0;
}

std::vector<ConceptId> erased_concepts(const Options& o, const Loaded& l,
                                       const Checkpoint& adapter_ckpt) {
  std::vector<ConceptId> erased;
  for (const auto& name : o.erased) erased.push_back(l.base.vocab().resolve(name));
  if (erased.empty()) {
    if (adapter_ckpt.role == CheckpointRole::kDelta) {
      throw CLI::RequiredError("--concept (merged adapters need explicit erased concepts)");
    }
    const RunConfig snap = run_config_from_json(adapter_ckpt.config);
    erased.push_back(l.base.vocab().resolve(snap.unlearn.target));
  }
  return erased;
}

// Prefers a primary that is neither erased nor a mapping target.
ConceptId default_retained(const ConceptVocabulary& vocab, const std::vector<ConceptId>& erased) {
  std::optional<ConceptId> fallback;
  for (ConceptId p : vocab.primaries()) {
    bool is_erased = false;
    bool is_mapping = false;
    for (ConceptId e : erased) {
      const auto m = vocab.mapping(e);
      is_erased = is_erased || p == e;
      is_mapping = is_mapping || (m && p == *m);
    }
    if (!is_erased && !is_mapping) return p;
    if (!is_erased && !fallback) fallback = p;
  }
  if (!fallback) throw ContractError("no retained concept left to compare against");
  return *fallback;
}

int cmd_eval(const Options& o) {
  Loaded l = load_base(o);
  const std::string& lora = single_lora(o);
  const Checkpoint adapter_ckpt = load_checkpoint(lora);
  DenoiserModel adapted = l.base;
  adapted.attach(unpack_adapter(adapter_ckpt));
  const std::vector<ConceptId> erased = erased_concepts(o, l, adapter_ckpt);
  const NoiseSchedule sched = make_schedule(l.cfg);
  const ToyDataset data = make_dataset(l.cfg, l.base.vocab());
  EvalConfig e = eval_config(l.cfg);
  if (o.eval_n) e.n_per_prompt = *o.eval_n;
  apply_probe_flags(o, e.probe);

  const fs::path dir = require(o.out, "--out");
  fs::create_directories(dir);
  const MetricsReport m = run_erasure_eval(l.base, adapted, data, erased, e, sched);
  write_file_atomic(dir / "metrics.csv", format_csv(metrics_table(m)));
  std::printf("acc_e=%.4f acc_s=%.4f acc_g=%.4f h_o=%.4f\n", m.acc_e, m.acc_s, m.acc_g, m.h_o);

  NormGrid grid;
  grid.steps = {e.probe.probe_steps};
  grid.repeats = {e.probe.trials};
  grid.seeds = {e.probe.seed};
  const auto rows = norm_table_report(l.base, adapted, erased.front(),
                                      default_retained(l.base.vocab(), erased), grid, e.probe,
                                      sched);
  write_file_atomic(dir / "norms.csv", format_csv(norms_table(rows)));
  spdlog::info("wrote {}/metrics.csv and {}/norms.csv", dir.string(), dir.string());
  return 0;
}

int cmd_mix(const Options& o) {
  if (o.loras.size() != 2) throw CLI::ValidationError("--lora", "mix needs exactly two adapters");
  if (!(o.mix_alpha >= 0.0 && o.mix_alpha <= 1.0)) {
    throw CLI::ValidationError("--alpha", "must lie in [0, 1]");
  }
  const Checkpoint first = load_checkpoint(o.loras[0]);
  const Adapter a = unpack_adapter(first);
  const Adapter b = load_adapter(o.loras[1]);
  const WeightDelta merged = merge_adapters(a, b, o.mix_alpha);
  save_checkpoint(require(o.out, "--out"), Adapter{merged}, first.config);
  spdlog::info("merged {} and {} at a={} into {}", o.loras[0], o.loras[1], o.mix_alpha, o.out);
  return 0;
}

int cmd_norm_table(const Options& o) {
  Loaded l = load_base(o);
  const std::string& lora = single_lora(o);
  const Checkpoint adapter_ckpt = load_checkpoint(lora);
  DenoiserModel adapted = l.base;
  adapted.attach(unpack_adapter(adapter_ckpt));
  Options with_concept = o;
  if (!o.concept_name.empty()) with_concept.erased = {o.concept_name};
  const std::vector<ConceptId> erased = erased_concepts(with_concept, l, adapter_ckpt);
  const ConceptId retained = o.retained.empty() ? default_retained(l.base.vocab(), erased)
                                                : l.base.vocab().resolve(o.retained);
  NormGrid grid{o.steps_grid, o.repeats_grid, o.seeds};
  ProbeConfig p = probe_config(l.cfg);
  apply_probe_flags(o, p);
  const auto rows =
      norm_table_report(l.base, adapted, erased.front(), retained, grid, p, make_schedule(l.cfg));
  write_or_print(o.out, format_csv(norms_table(rows)));
  return 0;
}

int cmd_plot(const Options& o) {
  emit_plot(require(o.input, "--in"), require(o.out, "--out"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UnGuide concept-unlearning lab on a 2-D toy diffusion model"};
  app.require_subcommand(1);
  Options o;

  auto shared = [&o](CLI::App* sub, bool base, bool lora) {
    sub->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--seed", o.seed, "master or sampling seed");
    if (base) sub->add_option("--base", o.base, "base model checkpoint")->check(CLI::ExistingFile);
    if (lora) {
      sub->add_option("--lora", o.loras, "adapter checkpoint")->check(CLI::ExistingFile);
    }
  };
  auto probe_flags = [&o](CLI::App* sub) {
    sub->add_option("--trials", o.trials, "probe trials N")->check(CLI::PositiveNumber);
    sub->add_option("--probe-steps", o.probe_steps, "inference steps before measuring");
    sub->add_option("--w-erase", o.w_erase, "guidance weight when erasing");
    sub->add_option("--w-retain", o.w_retain, "guidance weight when retaining");
  };

  auto* train_base_cmd = app.add_subcommand("train-base", "train the base denoiser");
  shared(train_base_cmd, false, false);

  auto* train_lora_cmd = app.add_subcommand("train-lora", "train an unlearning adapter");
  shared(train_lora_cmd, true, false);
  train_lora_cmd->add_option("--concept", o.concept_name, "concept to erase");
  train_lora_cmd->add_option("--mapping", o.mapping, "anchor concept");
  train_lora_cmd->add_option("--alpha", o.alpha, "guidance scale for training latents");
  train_lora_cmd->add_option("--gamma", o.gamma, "negative guidance strength");
  train_lora_cmd->add_option("--iters", o.iters, "iterations")->check(CLI::PositiveNumber);
  train_lora_cmd->add_option("--lr", o.lr, "learning rate");
  train_lora_cmd->add_option("--target-mode", o.target_mode, "adapted layers")
      ->check(CLI::IsMember({"cond", "noncond"}));

  auto* probe_cmd = app.add_subcommand("probe", "decide the guidance weight for a concept");
  shared(probe_cmd, true, true);
  probe_cmd->add_option("--concept", o.concept_name, "concept to probe")->required();
  probe_flags(probe_cmd);

  auto* sample_cmd = app.add_subcommand("sample", "draw samples for a concept");
  shared(sample_cmd, true, true);
  sample_cmd->add_option("--concept", o.concept_name, "concept to sample")->required();
  sample_cmd->add_option("--mode", o.mode, "base, lora, unguide or auto")
      ->check(CLI::IsMember({"base", "lora", "unguide", "auto"}));
  sample_cmd->add_option("--w", o.w, "forced guidance weight (mode unguide)");
  sample_cmd->add_option("--n", o.n, "number of samples")->check(CLI::PositiveNumber);
  probe_flags(sample_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "efficacy, specificity and generality report");
  shared(eval_cmd, true, true);
  eval_cmd->add_option("--concept", o.erased, "erased concept (repeatable)");
  eval_cmd->add_option("--n", o.eval_n, "samples per prompt")->check(CLI::PositiveNumber);
  probe_flags(eval_cmd);

  auto* mix_cmd = app.add_subcommand("mix", "weighted merge of two adapters");
  shared(mix_cmd, false, true);
  mix_cmd->add_option("--alpha", o.mix_alpha, "weight of the first adapter");

  auto* norm_cmd = app.add_subcommand("norm-table", "divergence norms over a step/trial grid");
  shared(norm_cmd, true, true);
  norm_cmd->add_option("--concept", o.concept_name, "erased concept");
  norm_cmd->add_option("--retained", o.retained, "retained concept to compare");
  norm_cmd->add_option("--steps-grid", o.steps_grid, "probe steps")->delimiter(',');
  norm_cmd->add_option("--repeats-grid", o.repeats_grid, "trial counts")->delimiter(',');
  norm_cmd->add_option("--seeds", o.seeds, "probe seeds")->delimiter(',');
  probe_flags(norm_cmd);

  auto* plot_cmd = app.add_subcommand("plot", "render samples.csv or norms.csv as SVG");
  plot_cmd->add_option("--in", o.input, "input CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", o.out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    setup_logging(app.got_subcommand(plot_cmd) ? std::string{} : sidecar_for(o.out));
    if (app.got_subcommand(train_base_cmd)) return cmd_train_base(o);
    if (app.got_subcommand(train_lora_cmd)) return cmd_train_lora(o);
    if (app.got_subcommand(probe_cmd)) return cmd_probe(o);
    if (app.got_subcommand(sample_cmd)) return cmd_sample(o);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(o);
    if (app.got_subcommand(mix_cmd)) return cmd_mix(o);
    if (app.got_subcommand(norm_cmd)) return cmd_norm_table(o);
    if (app.got_subcommand(plot_cmd)) return cmd_plot(o);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
