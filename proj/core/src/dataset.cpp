// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/dataset.hpp"

#include <cmath>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

ToyDataset::ToyDataset(std::vector<Cluster> clusters, const ConceptVocabulary& vocab)
    : clusters_(std::move(clusters)), cluster_index_(vocab.size(), -1) {
  if (clusters_.empty()) throw ContractError("dataset needs at least one cluster");
  dim_ = clusters_.front().mean.size();
  for (const Cluster& c : clusters_) {
    if (c.mean.size() != dim_ || dim_ == 0) {
      throw ShapeError("dataset: cluster means must share one positive dimension");
    }
    if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
      throw ContractError("dataset: cluster variance must be finite and nonnegative");
    }
  }
  std::vector<bool> owned(clusters_.size(), false);
  for (ConceptId id : vocab.primaries()) {
    const int k = vocab.at(id).cluster;
    if (k < 0 || static_cast<std::size_t>(k) >= clusters_.size()) {
      throw ContractError("concept '" + vocab.at(id).name + "' has no cluster in the dataset");
    }
    owned[k] = true;
    cluster_index_[id] = k;
    trainable_.push_back(id);
  }
  for (std::size_t k = 0; k < owned.size(); ++k) {
    if (!owned[k]) throw ContractError("cluster " + std::to_string(k) + " has no concept");
  }
}

ToyDataset ToyDataset::standard(const DatasetSpec& spec, const ConceptVocabulary& vocab) {
  if (spec.clusters < 1 || spec.clusters > 4) {
    throw ContractError("standard dataset supports 1 to 4 clusters");
  }
  const double s = spec.spread;
  const double corners[4][2] = {{-s, s}, {s, s}, {s, -s}, {-s, -s}};
  std::vector<Cluster> clusters;
  for (std::size_t k = 0; k < spec.clusters; ++k) {
    clusters.push_back(Cluster{{corners[k][0], corners[k][1]}, spec.variance});
  }
  return ToyDataset(std::move(clusters), vocab);
}

const Cluster& ToyDataset::cluster_of(ConceptId c) const {
  if (c >= cluster_index_.size() || cluster_index_[c] < 0) {
    throw LookupError("concept " + std::to_string(c) + " owns no cluster");
  }
  return clusters_[cluster_index_[c]];
}

Tensor ToyDataset::sample(ConceptId c, std::size_t n, std::uint64_t seed) const {
  const Cluster& cl = cluster_of(c);
  const double sd = std::sqrt(cl.variance);
  Tensor out(Shape{n, dim_});
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {i}));
    for (std::size_t d = 0; d < dim_; ++d) {
      out(i, d) = static_cast<float>(cl.mean[d] + sd * rng.normal());
    }
  }
  return out;
}

}  // namespace unguide
