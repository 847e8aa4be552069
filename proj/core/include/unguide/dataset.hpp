// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unguide/tensor.hpp"
#include "unguide/vocabulary.hpp"

namespace unguide {

/// Isotropic Gaussian component N(mean, variance * I).
struct Cluster {
  std::vector<double> mean;
  double variance = 0.25;
};

struct DatasetSpec {
  std::size_t clusters = 4;
  double spread = 3.0;  // centres at (+-spread, +-spread)
  double variance = 0.25;
  std::size_t synonyms_per_concept = 3;
  double synonym_offset_std = 0.1;

  bool operator==(const DatasetSpec&) const = default;
};

/// Labeled 2-D points: each primary concept owns one cluster.
class ToyDataset {
 public:
  ToyDataset(std::vector<Cluster> clusters, const ConceptVocabulary& vocab);

  /// Corners in the order (-s, s), (s, s), (s, -s), (-s, -s).
  static ToyDataset standard(const DatasetSpec& spec, const ConceptVocabulary& vocab);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
  const Cluster& cluster_of(ConceptId c) const;
  /// Concepts that own a cluster, in id order.
  const std::vector<ConceptId>& trainable() const noexcept { return trainable_; }

  /// n points from the cluster of c; row i seeded by derive_seed(seed, {i}).
  Tensor sample(ConceptId c, std::size_t n, std::uint64_t seed) const;

 private:
  std::vector<Cluster> clusters_;
  std::vector<ConceptId> trainable_;
  std::vector<int> cluster_index_;  // by concept id, -1 when none
  std::size_t dim_ = 0;
};

}  // namespace unguide
