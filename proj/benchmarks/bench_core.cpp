// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "unguide/base_trainer.hpp"
#include "unguide/checkpoint.hpp"
#include "unguide/config.hpp"
#include "unguide/diffusion.hpp"
#include "unguide/rng.hpp"
#include "unguide/tape.hpp"
#include "unguide/unguidance.hpp"

namespace unguide {
namespace {

struct Setup {
  RunConfig cfg;
  ConceptVocabulary vocab = make_vocabulary(cfg);
  ToyDataset data = make_dataset(cfg, vocab);
  NoiseSchedule sched = make_schedule(cfg);
  DenoiserModel model = [this] {
    DenoiserModel m = make_model(cfg, vocab);
    m.set_trained_steps(1);
    return m;
  }();

  LoraAdapter adapter() const {
    Rng rng(3);
    LoraAdapter a;
    for (std::size_t id : model.target_layers(TargetMode::kCond)) {
      const Tensor& w = model.layer(id).weight;
      a.factors.push_back({id, randn({w.rows(), 1}, rng, 0.05F), randn({1, w.cols()}, rng, 0.05F)});
    }
    return a;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = randn({n, n}, rng);
  const Tensor b = randn({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_PredictEps(benchmark::State& state) {
  const Setup& s = setup();
  Rng rng(2);
  const Tensor z = randn({static_cast<std::size_t>(state.range(0)), 2}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(s.model.predict_eps(z, 500, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictEps)->Arg(1)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  DenoiserModel m = setup().model;
  Rng rng(4);
  const Tensor z = randn({128, 2}, rng);
  const Tensor target = randn({128, 2}, rng);
  const std::vector<int> t(128, 400);
  const std::vector<ConceptId> c(128, 1);
  for (auto _ : state) {
    Tape tape;
    const Var out = m.forward(tape, tape.borrow(z), t, c, Trainable::kBase);
    benchmark::DoNotOptimize(tape.backward(tape.sum_squares(tape.sub(out, tape.borrow(target)))));
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_BaseTrainSteps(benchmark::State& state) {
  const Setup& s = setup();
  BaseTrainConfig bc = base_train_config(s.cfg);
  bc.steps = 10;
  bc.loss_threshold = 0.0;
  for (auto _ : state) {
    DenoiserModel m = make_model(s.cfg, s.vocab);
    benchmark::DoNotOptimize(train_base(m, s.data, s.sched, bc));
  }
}
BENCHMARK(BM_BaseTrainSteps)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const Setup& s = setup();
  const auto plan = s.sched.step_plan();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(s.model, 0, plan, CfgParams{7.5F}, 1, 200, 2, s.sched));
  }
}
BENCHMARK(BM_Sample)->Unit(benchmark::kMillisecond);

void BM_Probe(benchmark::State& state) {
  const Setup& s = setup();
  DenoiserModel adapted = s.model;
  adapted.attach(s.adapter());
  ProbeConfig pc = probe_config(s.cfg);
  pc.probe_steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(probe(s.model, adapted, 0, pc, s.sched));
}
BENCHMARK(BM_Probe)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_CheckpointRoundTrip(benchmark::State& state) {
  const Setup& s = setup();
  const Checkpoint ckpt = pack(s.model, to_json(s.cfg));
  for (auto _ : state) {
    const std::string bytes = encode_checkpoint(ckpt);
    benchmark::DoNotOptimize(decode_checkpoint(bytes));
  }
}
BENCHMARK(BM_CheckpointRoundTrip);

}  // namespace
}  // namespace unguide

BENCHMARK_MAIN();
