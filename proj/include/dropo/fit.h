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

#ifndef DROPO_FIT_H_
#define DROPO_FIT_H_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "dropo/core.h"
#include "dropo/likelihood.h"
#include "dropo/sim.h"

namespace dropo {

// which point of the search the fit reports
enum class FitSelection {
  kBestSoFar,  // best evaluated candidate
  kFinalMean,  // final CMA-ES mean, robust to Monte Carlo noise
};

struct FitConfig {
  ObjectiveKind kind = ObjectiveKind::kDropo;
  int budget = 2000;  // objective evaluations
  int stagnation_window = 20;
  double stagnation_tol = 1e-8;
  int population = 0;  // 0 = CMA-ES default
  double sigma0 = 1.0;
  LikelihoodConfig likelihood;  // its seed is replaced by `seed`
  std::optional<DynamicsDistribution> phi_init;  // default: DefaultInit
  FitSelection selection = FitSelection::kFinalMean;
  std::uint64_t seed = 0;
  int workers = 1;  // concurrent candidate evaluations

  void Validate() const;
};

// maximizes the Monte Carlo dataset log-likelihood over (means, stds) in the
// normalized box
FitResult FitDropo(const TransitionDataset& dataset, const Simulator& sim,
                   const FitConfig& cfg);

// mean-only search minimizing the squared replay error at the mean; the
// reported stds are the final CMA-ES marginal stds in physical units and may
// lie below std_min
FitResult FitDroidBaseline(const TransitionDataset& dataset,
                           const Simulator& sim, const FitConfig& cfg);

// dispatches on cfg.kind
FitResult Fit(const TransitionDataset& dataset, const Simulator& sim,
              const FitConfig& cfg);

struct EpsilonSweepRow {
  double epsilon = 0.0;
  double total_variance = 0.0;
  double mse = 0.0;
};

struct TuneResult {
  std::vector<EpsilonSweepRow> table;  // in candidate order
  std::vector<FitResult> fits;
  std::optional<int> selected;  // index into candidates, empty if tau unmet

  bool reachable() const { return selected.has_value(); }
  double epsilon() const { return table.at(*selected).epsilon; }
  const FitResult& best() const { return fits.at(*selected); }
};

// one DROPO fit per scalar epsilon (broadcast over state dimensions); selects
// the smallest epsilon whose fitted d_D is below tau
TuneResult TuneEpsilon(const TransitionDataset& dataset, const Simulator& sim,
                       const FitConfig& cfg,
                       const std::vector<double>& candidates, double tau);

}  // namespace dropo

#endif  // DROPO_FIT_H_
