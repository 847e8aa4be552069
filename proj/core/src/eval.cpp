// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "unguide/diffusion.hpp"
#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

ConceptClassifier::ConceptClassifier(std::vector<std::vector<double>> centroids)
    : centroids_(std::move(centroids)) {
  if (centroids_.empty()) throw ContractError("classifier needs at least one centroid");
  for (const auto& c : centroids_) {
    if (c.size() != centroids_.front().size()) {
      throw ShapeError("classifier centroids differ in dimension");
    }
  }
}

ConceptClassifier::ConceptClassifier(const ToyDataset& data)
    : ConceptClassifier([&data] {
        std::vector<std::vector<double>> out;
        for (const Cluster& c : data.clusters()) out.push_back(c.mean);
        return out;
      }()) {}

std::vector<std::size_t> ConceptClassifier::classify(const Tensor& points) const {
  if (points.empty()) return {};
  const std::size_t dim = centroids_.front().size();
  if (points.rank() != 2 || points.cols() != dim) {
    throw ShapeError("classify: expected points with " + std::to_string(dim) + " columns");
  }
  std::vector<std::size_t> labels(points.rows());
  for (std::size_t r = 0; r < points.rows(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids_.size(); ++k) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points(r, d) - centroids_[k][d];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        labels[r] = k;
      }
    }
  }
  return labels;
}

double harmonic_ho(double acc_e, double acc_s, double acc_g) {
  for (double v : {acc_e, acc_s, acc_g}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("accuracies must lie in [0, 1]");
  }
  if (acc_e == 1.0 || acc_g == 1.0 || acc_s == 0.0) return 0.0;
  return 3.0 / (1.0 / (1.0 - acc_e) + 1.0 / acc_s + 1.0 / (1.0 - acc_g));
}

std::string_view to_string(PromptRole role) {
  switch (role) {
    case PromptRole::kErased:
      return "erased";
    case PromptRole::kRetained:
      return "retained";
    default:
      return "synonym";
  }
}

namespace {

double fraction_in(const std::vector<std::size_t>& labels, std::size_t cluster) {
  if (labels.empty()) return 0.0;
  const auto hits = std::count(labels.begin(), labels.end(), cluster);
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

MetricsReport run_erasure_eval(const DenoiserModel& base, const DenoiserModel& adapted,
                               const ToyDataset& data, const std::vector<ConceptId>& erased,
                               const EvalConfig& cfg, const NoiseSchedule& sched) {
  if (cfg.n_per_prompt == 0) throw ContractError("n_per_prompt must be positive");
  if (erased.empty()) throw ContractError("no erased concept given");
  const ConceptVocabulary& vocab = base.vocab();
  const ConceptClassifier clf(data);

  std::vector<std::pair<ConceptId, PromptRole>> prompts;
  for (ConceptId c : erased) {
    if (vocab.at(c).kind != ConceptKind::kPrimary) {
      throw ContractError("erased concept '" + vocab.at(c).name + "' is not a primary concept");
    }
    prompts.emplace_back(c, PromptRole::kErased);
  }
  for (ConceptId c : vocab.primaries()) {
    if (std::find(erased.begin(), erased.end(), c) == erased.end()) {
      prompts.emplace_back(c, PromptRole::kRetained);
    }
  }
  for (ConceptId c : erased) {
    for (ConceptId s : vocab.synonyms_of(c)) prompts.emplace_back(s, PromptRole::kSynonym);
  }

  MetricsReport report;
  double hits[3] = {0, 0, 0};
  double counts[3] = {0, 0, 0};
  for (const auto& [c, role] : prompts) {
    ProbeConfig pc = cfg.probe;
    pc.seed = derive_seed(cfg.seed, {c, 1});
    const UnguidedSamples out = generate_unguided(base, adapted, c, pc, cfg.sampler,
                                                  cfg.n_per_prompt,
                                                  derive_seed(cfg.seed, {c}), sched);
    const Concept& concept_value = vocab.at(c);
    const auto labels = clf.classify(out.samples);
    PromptResult row;
    row.concept_id = c;
    row.name = concept_value.name;
    row.role = role;
    row.n = labels.size();
    row.accuracy = fraction_in(labels, static_cast<std::size_t>(concept_value.cluster));
    if (out.decision) {
      row.route = out.decision->route;
      row.w = out.decision->w;
      row.mean_c = out.decision->mean_c;
      row.mean_c0 = out.decision->mean_c0;
    } else {
      row.w = *cfg.sampler.forced_w;
      row.route = row.w <= -1.0 ? Route::kErase : Route::kRetain;
    }
    const auto slot = static_cast<std::size_t>(role);
    hits[slot] += row.accuracy * static_cast<double>(row.n);
    counts[slot] += static_cast<double>(row.n);
    report.prompts.push_back(std::move(row));
  }
  auto pooled = [&](PromptRole r) {
    const auto slot = static_cast<std::size_t>(r);
    return counts[slot] > 0 ? hits[slot] / counts[slot] : 0.0;
  };
  report.acc_e = pooled(PromptRole::kErased);
  report.acc_s = counts[1] > 0 ? pooled(PromptRole::kRetained) : 1.0;
  report.acc_g = pooled(PromptRole::kSynonym);
  report.h_o = harmonic_ho(report.acc_e, report.acc_s, report.acc_g);
  return report;
}

double conditional_accuracy(const DenoiserModel& model, const ToyDataset& data, ConceptId c,
                            std::size_t n, const CfgParams& cfg, std::uint64_t seed,
                            const NoiseSchedule& sched) {
  const auto plan = sched.step_plan();
  const Tensor x = sample(model, c, plan, cfg, seed, n, data.dim(), sched);
  return fraction_in(ConceptClassifier(data).classify(x),
                     static_cast<std::size_t>(model.vocab().at(c).cluster));
}

std::vector<NormTableRow> norm_table_report(const DenoiserModel& base,
                                            const DenoiserModel& adapted, ConceptId erased,
                                            ConceptId retained, const NormGrid& grid,
                                            const ProbeConfig& base_cfg,
                                            const NoiseSchedule& sched) {
  if (grid.steps.empty() || grid.repeats.empty() || grid.seeds.empty()) {
    throw ContractError("norm table grid is empty");
  }
  std::vector<NormTableRow> rows;
  for (int k : grid.steps) {
    for (std::size_t n : grid.repeats) {
      for (std::uint64_t seed : grid.seeds) {
        ProbeConfig pc = base_cfg;
        pc.probe_steps = k;
        pc.trials = n;
        pc.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        NormTableRow row;
        row.steps = k;
        row.repeats = n;
        row.seed = seed;
        row.mean_erased = divergence_stats(base, adapted, erased, 0, pc, sched).mean;
        row.mean_neutral = divergence_stats(base, adapted, base.neutral(), 1, pc, sched).mean;
        row.mean_retained = divergence_stats(base, adapted, retained, 2, pc, sched).mean;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace unguide
