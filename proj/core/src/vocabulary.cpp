// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kNeutral:
      return "neutral";
    case ConceptKind::kPrimary:
      return "primary";
    case ConceptKind::kSynonym:
      return "synonym";
  }
  return "unknown";
}

ConceptVocabulary::ConceptVocabulary(std::size_t embed_dim) : embed_dim_(embed_dim) {
  if (embed_dim == 0) throw ContractError("vocabulary: embed_dim must be positive");
}

ConceptId ConceptVocabulary::push(Concept c) {
  for (const Concept& existing : concepts_) {
    if (existing.name == c.name) throw ContractError("duplicate concept name '" + c.name + "'");
  }
  c.id = static_cast<ConceptId>(concepts_.size());
  if (c.kind == ConceptKind::kPrimary) c.primary = c.id;
  if (c.offset.empty()) c.offset = Tensor(Shape{embed_dim_});
  concepts_.push_back(std::move(c));
  return concepts_.back().id;
}

ConceptId ConceptVocabulary::add_neutral(std::string name) {
  if (neutral_) throw ContractError("vocabulary already has a neutral concept");
  Concept c{.name = std::move(name), .kind = ConceptKind::kNeutral, .cluster = -1};
  c.table_row = table_rows_++;
  const ConceptId id = push(std::move(c));
  concepts_.back().primary = id;
  neutral_ = id;
  return id;
}

ConceptId ConceptVocabulary::add_primary(std::string name, int cluster) {
  if (cluster < 0) throw ContractError("primary concepts need a cluster id >= 0");
  for (const Concept& c : concepts_) {
    if (c.kind == ConceptKind::kPrimary && c.cluster == cluster) {
      throw ContractError("cluster " + std::to_string(cluster) + " already owned by '" +
                          c.name + "'");
    }
  }
  Concept c{.name = std::move(name), .kind = ConceptKind::kPrimary, .cluster = cluster};
  c.table_row = table_rows_++;
  return push(std::move(c));
}

ConceptId ConceptVocabulary::add_synonym(std::string name, ConceptId primary,
                                         Tensor offset) {
  const Concept& p = at(primary);
  if (p.kind != ConceptKind::kPrimary) {
    throw ContractError("synonym '" + name + "' must refer to a primary concept");
  }
  if (offset.size() != embed_dim_) throw ShapeError("synonym offset has wrong length");
  if (squared_norm(offset) == 0.0) {
    throw ContractError("synonym '" + name + "' needs a non-zero embedding offset");
  }
  Concept c{.name = std::move(name),
            .kind = ConceptKind::kSynonym,
            .cluster = p.cluster,
            .primary = primary,
            .table_row = p.table_row,
            .offset = offset.reshaped(Shape{embed_dim_})};
  return push(std::move(c));
}

void ConceptVocabulary::set_mapping(ConceptId concept_id, ConceptId target) {
  at(concept_id);
  at(target);
  if (concept_id == target) throw ContractError("a concept cannot map to itself");
  mapping_[concept_id] = target;
}

const Concept& ConceptVocabulary::at(ConceptId id) const {
  if (!contains(id)) throw LookupError("unknown concept id " + std::to_string(id));
  return concepts_[id];
}

ConceptId ConceptVocabulary::find(std::string_view name) const {
  for (const Concept& c : concepts_) {
    if (c.name == name) return c.id;
  }
  throw LookupError("unknown concept '" + std::string(name) + "'");
}

ConceptId ConceptVocabulary::resolve(std::string_view name_or_id) const {
  ConceptId id = 0;
  const auto* end = name_or_id.data() + name_or_id.size();
  auto [ptr, ec] = std::from_chars(name_or_id.data(), end, id);
  if (ec == std::errc() && ptr == end && !name_or_id.empty()) {
    at(id);
    return id;
  }
  return find(name_or_id);
}

ConceptId ConceptVocabulary::neutral() const {
  if (!neutral_) throw LookupError("vocabulary has no neutral concept");
  return *neutral_;
}

std::optional<ConceptId> ConceptVocabulary::mapping(ConceptId id) const {
  at(id);
  auto it = mapping_.find(id);
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

std::vector<ConceptId> ConceptVocabulary::primaries() const {
  std::vector<ConceptId> out;
  for (const Concept& c : concepts_) {
    if (c.kind == ConceptKind::kPrimary) out.push_back(c.id);
  }
  return out;
}

std::vector<ConceptId> ConceptVocabulary::synonyms_of(ConceptId primary) const {
  at(primary);
  std::vector<ConceptId> out;
  for (const Concept& c : concepts_) {
    if (c.kind == ConceptKind::kSynonym && c.primary == primary) out.push_back(c.id);
  }
  return out;
}

std::size_t ConceptVocabulary::cluster_count() const {
  std::set<int> clusters;
  for (const Concept& c : concepts_) {
    if (c.cluster >= 0) clusters.insert(c.cluster);
  }
  return clusters.size();
}

ConceptVocabulary ConceptVocabulary::standard(std::size_t clusters, std::size_t embed_dim,
                                              std::size_t synonyms_per_concept,
                                              double offset_std, std::uint64_t seed) {
  struct Entry {
    const char* name;
    std::array<const char*, 3> synonyms;
  };
  static constexpr std::array<Entry, 4> kEntries{{
      {"cat", {"feline", "kitty", "housecat"}},
      {"dog", {"canine", "pooch", "hound"}},
      {"ship", {"vessel", "boat", "watercraft"}},
      {"truck", {"lorry", "rig", "hauler"}},
  }};
  if (clusters < 2 || clusters > kEntries.size()) {
    throw ContractError("standard vocabulary supports 2 to 4 clusters");
  }
  if (synonyms_per_concept > 3) {
    throw ContractError("standard vocabulary has at most 3 synonyms per concept");
  }
  ConceptVocabulary vocab(embed_dim);
  std::vector<ConceptId> prim;
  for (std::size_t i = 0; i < clusters; ++i) {
    prim.push_back(vocab.add_primary(kEntries[i].name, static_cast<int>(i)));
  }
  vocab.add_neutral("neutral");
  Rng rng(derive_seed(seed, {0x5F4E}));
  for (std::size_t i = 0; i < clusters; ++i) {
    for (std::size_t s = 0; s < synonyms_per_concept; ++s) {
      Tensor offset = randn(Shape{embed_dim}, rng, static_cast<float>(offset_std));
      vocab.add_synonym(kEntries[i].synonyms[s], prim[i], std::move(offset));
    }
  }
  for (std::size_t i = 0; i < clusters; ++i) {
    vocab.set_mapping(prim[i], prim[(i + 1) % clusters]);
  }
  return vocab;
}

}  // namespace unguide
