// Copyright 2026 The dropo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dropo/fit.h"

#include <gtest/gtest.h>

namespace dropo {
namespace {

class FitTest : public ::testing::Test {
 protected:
  void SetUp() override {
    DataGenConfig gen;
    gen.ground_truth = DynamicsSample{truth_};
    gen.transitions = 100;
    gen.seed = 3;
    data_ = ExtractTransitions(GenerateDataset(sim_, gen).trajectories[0], 1);
    cfg_.likelihood.samples = 10;
    cfg_.likelihood.epsilon = VectorXd::Constant(1, 1e-6);
    cfg_.budget = 240;
    cfg_.seed = 5;
  }

  MassSpringDamper sim_;
  Eigen::Vector3d truth_{1.5, 12.0, 0.4};
  TransitionDataset data_;
  FitConfig cfg_;
};

TEST_F(FitTest, DroidRecoversNoiselessMeans) {
  cfg_.kind = ObjectiveKind::kDroid;
  cfg_.budget = 3000;
  const FitResult r = Fit(data_, sim_, cfg_);
  EXPECT_EQ(r.kind, ObjectiveKind::kDroid);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.phi_star.mean[i] / truth_[i], 1.0, 1e-4) << i;
    EXPECT_LT(r.phi_star.std[i], 1e-3);
  }
  EXPECT_LT(r.mse, 1e-10);
  EXPECT_EQ(r.mse_trace, r.objective_trace);
}

TEST_F(FitTest, DropoIsDeterministicAndWorkerIndependent) {
  const FitResult a = FitDropo(data_, sim_, cfg_);
  const FitResult b = FitDropo(data_, sim_, cfg_);
  cfg_.workers = 3;
  const FitResult c = FitDropo(data_, sim_, cfg_);
  EXPECT_EQ(a.phi_star.mean, b.phi_star.mean);
  EXPECT_EQ(a.phi_star.std, b.phi_star.std);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.mse_trace, c.mse_trace);
  EXPECT_EQ(a.phi_star.mean, c.phi_star.mean);
  EXPECT_EQ(a.mse, c.mse);
  cfg_.seed = 6;
  EXPECT_NE(FitDropo(data_, sim_, cfg_).objective_trace, a.objective_trace);
}

TEST_F(FitTest, DropoResultIsValidAndTraced) {
  const FitResult r = FitDropo(data_, sim_, cfg_);
  EXPECT_FALSE(ValidateDistribution(r.phi_star).has_value());
  EXPECT_TRUE(
      (r.phi_star.mean.array() >= sim_.param_space().lower.array()).all());
  EXPECT_TRUE(
      (r.phi_star.std.array() <= sim_.param_space().std_max.array()).all());
  EXPECT_EQ(r.objective_trace.size(), static_cast<std::size_t>(r.generations));
  EXPECT_EQ(r.mse_trace.size(), r.objective_trace.size());
  EXPECT_LE(r.evaluations, cfg_.budget);
  // the search improves on the default starting point
  EXPECT_LT(r.objective_trace.back(), r.objective_trace.front());
  EXPECT_DOUBLE_EQ(r.mse_per_transition, r.mse / data_.size());
}

TEST_F(FitTest, BestSoFarSelectionReportsTracedCandidate) {
  cfg_.selection = FitSelection::kBestSoFar;
  const FitResult r = FitDropo(data_, sim_, cfg_);
  LikelihoodConfig lik = cfg_.likelihood;
  lik.seed = cfg_.seed;
  EXPECT_FALSE(ValidateDistribution(r.phi_star).has_value());
  EXPECT_LE(r.objective_trace.back(), r.objective_trace.front());
}

TEST_F(FitTest, TuneEpsilonSelectsSmallestUnderThreshold) {
  cfg_.budget = 120;
  const TuneResult none = TuneEpsilon(data_, sim_, cfg_, {1e-4}, 0.0);
  EXPECT_FALSE(none.reachable());
  ASSERT_EQ(none.table.size(), 1u);
  EXPECT_EQ(none.table[0].epsilon, 1e-4);

  const TuneResult all = TuneEpsilon(data_, sim_, cfg_, {1e-2, 1e-4}, 1e300);
  ASSERT_TRUE(all.reachable());
  EXPECT_EQ(all.epsilon(), 1e-4);
  EXPECT_EQ(&all.best(), &all.fits[1]);
  EXPECT_EQ(all.table[1].total_variance, all.fits[1].phi_star.TotalVariance());
  EXPECT_EQ(all.table[1].mse, all.fits[1].mse);
}

TEST_F(FitTest, InvalidConfigurationsAreRejected) {
  cfg_.budget = 0;
  EXPECT_THROW(FitDropo(data_, sim_, cfg_), InvalidArgument);
  cfg_.budget = 100;
  cfg_.likelihood.samples = 1;
  EXPECT_THROW(FitDropo(data_, sim_, cfg_), InvalidArgument);
  cfg_.likelihood.samples = 10;
  EXPECT_THROW(TuneEpsilon(data_, sim_, cfg_, {}, 1.0), InvalidArgument);
  EXPECT_THROW(TuneEpsilon(data_, sim_, cfg_, {1e-3}, -1.0), InvalidArgument);
  MassChain3 chain;
  EXPECT_THROW(FitDropo(data_, chain, cfg_), InvalidArgument);
}

TEST_F(FitTest, CustomInitialDistributionIsUsed) {
  DynamicsDistribution init =
      DynamicsDistribution::PointMass(sim_.param_space(), truth_);
  init.std.setConstant(1e-3);
  cfg_.phi_init = init;
  cfg_.sigma0 = 0.05;
  const FitResult r = FitDropo(data_, sim_, cfg_);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(r.phi_star.mean[i] / truth_[i], 1.0, 0.05);
}

}  // namespace
}  // namespace dropo
