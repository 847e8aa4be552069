// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unguide/diffusion.hpp"
#include "unguide/tensor.hpp"

namespace unguide {

enum class ConceptKind { kNeutral, kPrimary, kSynonym };

std::string_view to_string(ConceptKind kind);

struct Concept {
  ConceptId id = 0;
  std::string name;
  ConceptKind kind = ConceptKind::kPrimary;
  /// Data cluster this concept generates; -1 for the neutral concept.
  int cluster = -1;
  /// Primary concept of a synonym, the concept itself otherwise.
  ConceptId primary = 0;
  /// Row of the model's embedding table this concept reads.
  std::size_t table_row = 0;
  /// Fixed offset added to the table row (non-zero only for synonyms).
  Tensor offset{};
};

/// Concepts, the neutral concept, mapping concepts and synonym groups.
///
/// Neutral and primary concepts own a trainable embedding row. Synonyms
/// share their primary's row plus a fixed offset, so they are never trained
/// directly but track the primary's embedding.
class ConceptVocabulary {
 public:
  explicit ConceptVocabulary(std::size_t embed_dim = 16);

  ConceptId add_neutral(std::string name);
  ConceptId add_primary(std::string name, int cluster);
  ConceptId add_synonym(std::string name, ConceptId primary, Tensor offset);
  void set_mapping(ConceptId concept_id, ConceptId target);

  const Concept& at(ConceptId id) const;
  bool contains(ConceptId id) const noexcept { return id < concepts_.size(); }
  ConceptId find(std::string_view name) const;
  /// Accepts a concept name or a decimal id.
  ConceptId resolve(std::string_view name_or_id) const;

  ConceptId neutral() const;
  std::optional<ConceptId> mapping(ConceptId id) const;
  const std::map<ConceptId, ConceptId>& mappings() const noexcept { return mapping_; }
  std::vector<ConceptId> primaries() const;
  std::vector<ConceptId> synonyms_of(ConceptId primary) const;
  const std::vector<Concept>& concepts() const noexcept { return concepts_; }

  std::size_t size() const noexcept { return concepts_.size(); }
  std::size_t embed_dim() const noexcept { return embed_dim_; }
  /// Number of trainable embedding rows (neutral + primaries).
  std::size_t table_rows() const noexcept { return table_rows_; }
  /// Number of distinct data clusters.
  std::size_t cluster_count() const;

  /// Four concepts with three synonyms each (or fewer concepts when
  /// `clusters` < 4), a neutral concept, and the mapping i -> (i + 1) mod n.
  /// Synonym offsets are N(0, offset_std^2) drawn from `seed`.
  static ConceptVocabulary standard(std::size_t clusters, std::size_t embed_dim,
                                    std::size_t synonyms_per_concept,
                                    double offset_std, std::uint64_t seed);

 private:
  ConceptId push(Concept concept_value);

  std::size_t embed_dim_;
  std::size_t table_rows_ = 0;
  std::vector<Concept> concepts_;
  std::optional<ConceptId> neutral_;
  std::map<ConceptId, ConceptId> mapping_;
};

}  // namespace unguide
