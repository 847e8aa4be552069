// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gaussian_oracle.hpp"
#include "unguide/diffusion.hpp"
#include "unguide/errors.hpp"
#include "unguide/rng.hpp"
#include "unguide/schedule.hpp"

namespace unguide {
namespace {

using testing::GaussianOracle;
using testing::moments;

TEST(Schedule, AlphaBarIsCumulativeProductAndDecreasing) {
  const NoiseSchedule sched;
  double prod = 1.0;
  EXPECT_EQ(sched.alpha_bar(0), 1.0);
  for (int t = 1; t <= sched.total_steps(); ++t) {
    const double beta = 1e-4 + (2e-2 - 1e-4) * (t - 1) / (sched.total_steps() - 1);
    EXPECT_NEAR(sched.beta(t), beta, 1e-15);
    prod *= 1.0 - beta;
    EXPECT_NEAR(sched.alpha_bar(t), prod, 1e-12);
    EXPECT_LT(sched.alpha_bar(t), sched.alpha_bar(t - 1));
    EXPECT_GT(sched.alpha_bar(t), 0.0);
  }
}

TEST(Schedule, StepPlanIsEvenAndStrictlyDecreasing) {
  const NoiseSchedule sched;
  const std::vector<int> plan = sched.step_plan();
  ASSERT_EQ(plan.size(), 51U);
  EXPECT_EQ(plan.front(), 1000);
  EXPECT_EQ(plan[1], 980);
  EXPECT_EQ(plan.back(), 0);
  EXPECT_NO_THROW(require_valid_plan(plan, sched));
  EXPECT_EQ(sched.timestep_after(25), 500);
}

TEST(Schedule, RejectsBadConfig) {
  EXPECT_THROW(NoiseSchedule(ScheduleConfig{0, 1e-4, 2e-2, 1}), ContractError);
  EXPECT_THROW(NoiseSchedule(ScheduleConfig{10, 1e-4, 2e-2, 11}), ContractError);
  EXPECT_THROW(NoiseSchedule(ScheduleConfig{10, 0.2, 0.1, 5}), ContractError);
}

TEST(ForwardNoise, IdentityZeroNoiseAndInversion) {
  const NoiseSchedule sched;
  Rng rng(1);
  const Tensor x0 = randn({8, 2}, rng);
  const Tensor eps = randn({8, 2}, rng);
  EXPECT_TRUE(bit_equal(forward_noise(x0, 0, eps, sched).z, x0));

  const LatentState quiet = forward_noise(x0, 300, Tensor({8, 2}), sched);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    EXPECT_FLOAT_EQ(quiet.z[i], static_cast<float>(std::sqrt(sched.alpha_bar(300)) * x0[i]));
  }

  for (int t : {1, 50, 500, 1000}) {
    const LatentState s = forward_noise(x0, t, eps, sched);
    const double ab = sched.alpha_bar(t);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      const double recovered = (s.z[i] - std::sqrt(ab) * x0[i]) / std::sqrt(1.0 - ab);
      EXPECT_NEAR(recovered, eps[i], 1e-6 / std::sqrt(1.0 - ab) + 1e-6);
    }
  }
  EXPECT_THROW(forward_noise(x0, 10, Tensor({8, 3}), sched), ShapeError);
}

TEST(Cfg, AffineIdentities) {
  Rng rng(2);
  const Tensor u = randn({5, 2}, rng);
  const Tensor c = randn({5, 2}, rng);
  EXPECT_TRUE(bit_equal(cfg_predict(u, c, CfgParams{1.0F}), c));
  EXPECT_TRUE(bit_equal(cfg_predict(u, c, CfgParams{0.0F}), u));
  EXPECT_TRUE(bit_equal(cfg_predict(c, c, CfgParams{7.5F}), c));
  EXPECT_EQ(cfg_predict(Tensor({1}, 0.0F), Tensor({1}, 1.0F), CfgParams{9.0F})[0], 9.0F);
  EXPECT_THROW(cfg_predict(u, Tensor({5, 3}), CfgParams{}), ShapeError);
}

TEST(Ddim, ExactNoiseRecoversCleanSample) {
  const NoiseSchedule sched;
  Rng rng(3);
  const Tensor x0 = randn({6, 2}, rng);
  const Tensor eps = randn({6, 2}, rng);
  const LatentState s = forward_noise(x0, 700, eps, sched);
  const LatentState back = ddim_step(s, eps, 0, sched);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(back.z[i], x0[i], 1e-5);
  EXPECT_EQ(back.t, 0);
  EXPECT_THROW(ddim_step(s, eps, 700, sched), ContractError);
  EXPECT_THROW(ddim_step(s, eps, 800, sched), ContractError);
}

TEST(Ddim, TwoStepsWithConstantNoiseEqualOne) {
  const NoiseSchedule sched;
  Rng rng(4);
  const LatentState s{randn({4, 2}, rng), 900};
  const Tensor e = randn({4, 2}, rng);
  const LatentState two = ddim_step(ddim_step(s, e, 400, sched), e, 100, sched);
  const LatentState one = ddim_step(s, e, 100, sched);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(two.z[i], one.z[i], 1e-5);
}

TEST(Sample, GaussianOracleRecoversMoments) {
  const NoiseSchedule sched;
  const double mu = 1.5;
  const double sigma = 0.5;
  const GaussianOracle oracle(mu, sigma, sched);
  const Tensor x = sample(oracle, 0, sched.full_plan(), CfgParams{1.0F}, 11, 10000, 1, sched);
  const auto m = moments(x);
  EXPECT_NEAR(m.mean, mu, 0.05 * sigma);
  EXPECT_NEAR(m.variance, sigma * sigma, 0.05 * sigma * sigma);
}

TEST(Sample, DeterministicAndPlanChecked) {
  const NoiseSchedule sched;
  const GaussianOracle oracle(0.0, 1.0, sched);
  const auto plan = sched.step_plan();
  EXPECT_TRUE(bit_equal(sample(oracle, 0, plan, CfgParams{}, 5, 16, 2, sched),
                        sample(oracle, 0, plan, CfgParams{}, 5, 16, 2, sched)));
  const std::vector<int> bad{1000, 500, 600, 0};
  EXPECT_THROW(sample(oracle, 0, bad, CfgParams{}, 5, 4, 2, sched), ContractError);
  const std::vector<int> open_end{1000, 500, 10};
  EXPECT_THROW(sample(oracle, 0, open_end, CfgParams{}, 5, 4, 2, sched), ContractError);
}

// Class-conditional predictor: concept 1 is N(2, 0.25), the neutral concept 0
// is N(-1, 1).
class TwoClassOracle : public NoisePredictor {
 public:
  explicit TwoClassOracle(const NoiseSchedule& sched)
      : cond_(2.0, 0.5, sched), uncond_(-1.0, 1.0, sched) {}
  Tensor predict_eps(const Tensor& z, int t, ConceptId c) const override {
    return c == 0 ? uncond_.predict_eps(z, t, c) : cond_.predict_eps(z, t, c);
  }
  ConceptId neutral() const override { return 0; }

 private:
  GaussianOracle cond_;
  GaussianOracle uncond_;
};

TEST(Sample, ZeroGuidanceEqualsUnconditional) {
  const NoiseSchedule sched;
  const TwoClassOracle model(sched);
  const auto plan = sched.step_plan();
  EXPECT_TRUE(bit_equal(sample(model, 1, plan, CfgParams{0.0F}, 9, 32, 2, sched),
                        sample(model, 0, plan, CfgParams{1.0F}, 9, 32, 2, sched)));
}

TEST(PartialDenoise, FullLengthEqualsSample) {
  const NoiseSchedule sched;
  const TwoClassOracle model(sched);
  const LatentState full = partial_denoise(model, 1, 50, CfgParams{3.0F}, 4, 20, 2, sched);
  EXPECT_EQ(full.t, 0);
  EXPECT_TRUE(bit_equal(full.z,
                        sample(model, 1, sched.step_plan(), CfgParams{3.0F}, 4, 20, 2, sched)));
  const LatentState a = partial_denoise(model, 1, 10, CfgParams{3.0F}, 4, 20, 2, sched);
  EXPECT_TRUE(bit_equal(a.z, partial_denoise(model, 1, 10, CfgParams{3.0F}, 4, 20, 2, sched).z));
  EXPECT_EQ(a.t, 800);
  EXPECT_THROW(partial_denoise(model, 1, 0, CfgParams{}, 4, 2, 2, sched), ContractError);
  EXPECT_THROW(partial_denoise(model, 1, 51, CfgParams{}, 4, 2, 2, sched), ContractError);
}

TEST(PartialDenoise, EarlyLatentKeepsResidualNoise) {
  const NoiseSchedule sched;
  const double sigma = 0.5;
  const GaussianOracle oracle(0.0, sigma, sched);
  const LatentState s = partial_denoise(oracle, 0, 10, CfgParams{1.0F}, 8, 1000, 2, sched);
  const auto m = moments(s.z);
  EXPECT_GT(m.variance, sigma * sigma);
}

}  // namespace
}  // namespace unguide
