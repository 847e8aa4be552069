// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <vector>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "reference_model.hpp"
#include "unguide/denoiser.hpp"
#include "unguide/errors.hpp"
#include "unguide/lora.hpp"
#include "unguide/rng.hpp"
#include "unguide/vocabulary.hpp"

namespace unguide {
namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.hidden = 12;
  cfg.depth = 2;
  cfg.embed_dim = 8;
  cfg.time_dim = 6;
  return cfg;
}

DenoiserModel small_model(std::uint64_t seed = 3) {
  const ModelConfig cfg = small_config();
  return DenoiserModel(cfg, ConceptVocabulary::standard(4, cfg.embed_dim, 3, 0.1, 5), seed);
}

// Adapter on every layer with random non-zero factors.
LoraAdapter dense_random_adapter(const DenoiserModel& m, std::uint64_t seed, float scale = 8.0F) {
  Rng rng(seed);
  LoraAdapter a;
  a.rank = 1;
  a.scale = scale;
  for (std::size_t id = 0; id < m.layer_count(); ++id) {
    const Tensor& w = m.layer(id).weight;
    a.factors.push_back({id, randn({w.rows(), 1}, rng, 0.1F), randn({1, w.cols()}, rng, 0.1F)});
  }
  return a;
}

struct Batch {
  Tensor z;
  std::vector<int> t;
  std::vector<ConceptId> c;
};

Batch random_batch(std::uint64_t seed) {
  Rng rng(seed);
  return {randn({4, 2}, rng), {1, 250, 640, 1000}, {0, 4, 2, 6}};
}

TEST(Vocabulary, StandardLayout) {
  const ConceptVocabulary v = ConceptVocabulary::standard(4, 16, 3, 0.1, 1);
  EXPECT_EQ(v.primaries(), (std::vector<ConceptId>{0, 1, 2, 3}));
  EXPECT_EQ(v.at(v.neutral()).kind, ConceptKind::kNeutral);
  EXPECT_EQ(v.find("cat"), 0U);
  EXPECT_EQ(v.resolve("2"), 2U);
  EXPECT_EQ(v.mapping(0), std::optional<ConceptId>(1));
  EXPECT_EQ(v.mapping(3), std::optional<ConceptId>(0));
  for (ConceptId p : v.primaries()) {
    const auto syn = v.synonyms_of(p);
    ASSERT_EQ(syn.size(), 3U);
    for (ConceptId s : syn) {
      EXPECT_EQ(v.at(s).cluster, v.at(p).cluster);
      EXPECT_EQ(v.at(s).table_row, v.at(p).table_row);
      EXPECT_GT(squared_norm(v.at(s).offset), 0.0);
    }
  }
  EXPECT_THROW(v.find("unicorn"), LookupError);
  EXPECT_THROW(v.at(99), LookupError);
}

TEST(Denoiser, LayerLayoutAndTargets) {
  const DenoiserModel m = small_model();
  ASSERT_EQ(m.layer_count(), 7U);
  EXPECT_EQ(m.role(0), LayerRole::kMain);
  EXPECT_EQ(m.role(1), LayerRole::kTime);
  EXPECT_EQ(m.role(2), LayerRole::kCond);
  EXPECT_EQ(m.role(6), LayerRole::kOutput);
  EXPECT_EQ(m.cond_pathway_ids(), (std::vector<std::size_t>{2, 5}));
  EXPECT_EQ(m.target_layers(TargetMode::kCond), (std::vector<std::size_t>{2, 5}));
  auto noncond = m.target_layers(TargetMode::kNonCond);
  std::sort(noncond.begin(), noncond.end());
  EXPECT_EQ(noncond, (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_EQ(m.layer(6).weight.shape(), (Shape{2, 12}));
}

TEST(Denoiser, PredictionShapeAndLookup) {
  const DenoiserModel m = small_model();
  const Batch b = random_batch(1);
  EXPECT_EQ(m.predict_eps(b.z, 10, 0).shape(), b.z.shape());
  EXPECT_THROW(m.predict_eps(b.z, 10, 42), LookupError);
  EXPECT_THROW(m.predict_eps(Tensor({3, 5}), 10, 0), ShapeError);
}

TEST(Denoiser, SynonymsDifferFromTheirPrimary) {
  const DenoiserModel m = small_model();
  const Batch b = random_batch(2);
  EXPECT_FALSE(bit_equal(m.embedding_of(0), m.embedding_of(5)));
  EXPECT_FALSE(bit_equal(m.predict_eps(b.z, 300, 0), m.predict_eps(b.z, 300, 5)));
}

TEST(Adapter, ZeroBAndZeroScaleAreIdentities) {
  DenoiserModel m = small_model();
  const Batch b = random_batch(3);
  const Tensor base = m.predict_eps(b.z, 400, 1);
  m.attach(make_lora_adapter(m, TargetMode::kCond, 1, 8.0F, 0.5F, 1));
  EXPECT_TRUE(bit_equal(m.predict_eps(b.z, 400, 1), base));
  m.attach(dense_random_adapter(m, 4, 0.0F));
  EXPECT_TRUE(bit_equal(m.predict_eps(b.z, 400, 1), base));
}

TEST(Adapter, AttachedMatchesMaterializedWeights) {
  DenoiserModel m = small_model();
  const LoraAdapter a = dense_random_adapter(m, 5);
  const Batch b = random_batch(4);
  DenoiserModel merged = m;
  for (const LoraFactor& f : a.factors) {
    // W' = W + scale * B A, computed independently of materialize().
    Tensor& w = merged.layer(f.layer).weight;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        w(r, c) = static_cast<float>(w(r, c) + 8.0 * f.b(r, 0) * f.a(0, c));
      }
    }
  }
  m.attach(a);
  const Tensor got = m.predict_eps(b.z, 700, 2);
  const Tensor want = merged.predict_eps(b.z, 700, 2);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
}

TEST(Adapter, AttachDetachAndReplace) {
  DenoiserModel m = small_model();
  const Batch b = random_batch(5);
  const Tensor base = m.predict_eps(b.z, 123, 3);
  const std::uint32_t checksum = m.base_checksum();
  m.detach();
  EXPECT_TRUE(bit_equal(m.predict_eps(b.z, 123, 3), base));

  const LoraAdapter first = dense_random_adapter(m, 6);
  const LoraAdapter second = dense_random_adapter(m, 7);
  m.attach(first);
  EXPECT_FALSE(bit_equal(m.predict_eps(b.z, 123, 3), base));
  m.attach(second);
  DenoiserModel fresh = small_model();
  fresh.attach(second);
  EXPECT_TRUE(bit_equal(m.predict_eps(b.z, 123, 3), fresh.predict_eps(b.z, 123, 3)));
  m.detach();
  EXPECT_TRUE(bit_equal(m.predict_eps(b.z, 123, 3), base));
  EXPECT_EQ(m.base_checksum(), checksum);
}

TEST(Adapter, RejectsUnknownOrMisshapenLayers) {
  DenoiserModel m = small_model();
  LoraAdapter a = dense_random_adapter(m, 8);
  a.factors[0].layer = 99;
  EXPECT_THROW(m.attach(a), ContractError);
  LoraAdapter wrong = dense_random_adapter(m, 8);
  wrong.factors[0].a = Tensor({1, 7});
  EXPECT_THROW(m.attach(wrong), ShapeError);
  EXPECT_THROW(make_lora_adapter(m, TargetMode::kCond, 0, 8.0F, 0.1F, 1), ContractError);
  EXPECT_THROW(make_lora_adapter(m, TargetMode::kCond, 8, 8.0F, 0.1F, 1), ContractError);
}

TEST(Adapter, MaterializedUpdateHasRankOne) {
  const DenoiserModel m = small_model();
  const LoraAdapter a = dense_random_adapter(m, 9);
  const WeightDelta d = materialize(Adapter{a});
  for (const auto& [id, delta] : d.deltas) {
    Eigen::MatrixXd mat(delta.rows(), delta.cols());
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      for (std::size_t c = 0; c < delta.cols(); ++c) mat(r, c) = delta(r, c);
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(mat).singularValues();
    ASSERT_GT(sv(0), 0.0);
    for (Eigen::Index i = 1; i < sv.size(); ++i) EXPECT_LT(sv(i), 1e-5 * sv(0)) << "layer " << id;
  }
}

TEST(Merge, EndpointsCancellationAndRange) {
  const DenoiserModel m = small_model();
  const LoraAdapter a1 = dense_random_adapter(m, 10);
  LoraAdapter a2 = make_lora_adapter(m, TargetMode::kCond, 1, 8.0F, 0.1F, 11);
  a2.factors[0].b = Tensor({a2.factors[0].b.rows(), 1}, 0.3F);
  const WeightDelta d1 = materialize(Adapter{a1});
  const WeightDelta d2 = materialize(Adapter{a2});

  const WeightDelta at1 = merge_adapters(a1, a2, 1.0);
  const WeightDelta at0 = merge_adapters(a1, a2, 0.0);
  for (const auto& [id, delta] : d1.deltas) {
    EXPECT_TRUE(bit_equal(*at1.find(id), delta)) << id;
    if (const Tensor* other = d2.find(id)) {
      EXPECT_TRUE(bit_equal(*at0.find(id), *other)) << id;
    } else {
      for (float v : at0.find(id)->values()) EXPECT_EQ(v, 0.0F);
    }
  }

  LoraAdapter neg = a1;
  for (LoraFactor& f : neg.factors) f.b = scale(f.b, -1.0F);
  const WeightDelta cancel = merge_adapters(a1, neg, 0.5);
  for (const auto& [id, delta] : cancel.deltas) {
    for (float v : delta.values()) EXPECT_EQ(v, 0.0F);
  }
  DenoiserModel merged = m;
  merged.attach(cancel);
  const Batch b = random_batch(6);
  const Tensor want = m.predict_eps(b.z, 77, 0);
  const Tensor got = merged.predict_eps(b.z, 77, 0);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);

  EXPECT_THROW(merge_adapters(a1, a2, 1.5), ContractError);
  EXPECT_THROW(merge_adapters(a1, a2, -0.1), ContractError);
}

// Weight update is linear in a; the prediction need not be.
TEST(Merge, LinearAtWeightLevel) {
  const DenoiserModel m = small_model();
  const LoraAdapter a1 = dense_random_adapter(m, 12);
  const LoraAdapter a2 = dense_random_adapter(m, 13);
  const WeightDelta d1 = materialize(Adapter{a1});
  const WeightDelta d2 = materialize(Adapter{a2});
  for (double a : {0.25, 0.5, 0.9}) {
    const WeightDelta mix = merge_adapters(a1, a2, a);
    for (const auto& [id, delta] : mix.deltas) {
      for (std::size_t i = 0; i < delta.size(); ++i) {
        const double want = a * d1.find(id)->values()[i] + (1.0 - a) * d2.find(id)->values()[i];
        EXPECT_NEAR(delta[i], want, 1e-6);
      }
    }
  }
}

TEST(Gradients, ReferenceForwardAgrees) {
  DenoiserModel m = small_model();
  m.attach(dense_random_adapter(m, 14));
  const Batch b = random_batch(7);
  const Tensor out = m.predict_eps(b.z, b.t, b.c);
  testing::RefModel ref(m);
  EXPECT_NEAR(ref.loss(b.z, b.t, b.c, Tensor(b.z.shape())), squared_norm(out),
              1e-5 * (1.0 + squared_norm(out)));
}

void check_gradients(DenoiserModel& m, Trainable trainable) {
  const Batch b = random_batch(8);
  Rng rng(15);
  const Tensor target = randn(b.z.shape(), rng);
  Tape tape;
  const Var out = m.forward(tape, tape.borrow(b.z), b.t, b.c, trainable);
  const Var loss = tape.sum_squares(tape.sub(out, tape.borrow(target)));
  const Gradients g = tape.backward(loss);

  testing::RefModel ref(m);
  const auto params = ref.params(m, trainable == Trainable::kAdapter);
  // The double reference allows a small step; at h = 1e-3 truncation error
  // alone reaches 2e-4 on the LoRA factors.
  const auto res =
      testing::finite_difference_check(ref, params, g, b.z, b.t, b.c, target, 1e-4);
  EXPECT_GT(res.checked, params.size() / 2);
  EXPECT_LT(res.worst_rel, 1e-4) << "worst " << res.worst_name;
}

TEST(Gradients, BaseParametersMatchFiniteDifferences) {
  DenoiserModel m = small_model();
  check_gradients(m, Trainable::kBase);
}

TEST(Gradients, AdapterFactorsMatchFiniteDifferences) {
  DenoiserModel m = small_model();
  m.attach(dense_random_adapter(m, 16));
  const std::uint32_t before = m.base_checksum();
  check_gradients(m, Trainable::kAdapter);
  EXPECT_EQ(m.base_checksum(), before);
}

TEST(Gradients, AdapterTrainingLeavesBaseOffTheTape) {
  DenoiserModel m = small_model();
  m.attach(dense_random_adapter(m, 17));
  const Batch b = random_batch(9);
  Tape tape;
  const Gradients g =
      tape.backward(tape.sum_squares(m.forward(tape, tape.borrow(b.z), b.t, b.c,
                                               Trainable::kAdapter)));
  for (Tensor* p : m.base_parameters()) EXPECT_FALSE(g.contains(*p));
  EXPECT_EQ(g.size(), 2 * m.layer_count());
}

}  // namespace
}  // namespace unguide
