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

#ifndef DROPO_CMAES_H_
#define DROPO_CMAES_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dropo/core.h"
#include "dropo/random.h"

namespace dropo {

// box constraint handled by resampling, then clamping with a penalty
struct Bounds {
  VectorXd lower;
  VectorXd upper;
};

// (mu/mu_w, lambda)-CMA-ES with weighted recombination, rank-one and rank-mu
// covariance updates and cumulative step-size adaptation, using the default
// strategy parameters of Hansen's tutorial.
class Cmaes {
 public:
  Cmaes(const VectorXd& x0, double sigma0, int population = 0);

  int dim() const { return static_cast<int>(mean_.size()); }
  int population() const { return lambda_; }
  int parents() const { return mu_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const VectorXd& mean() const { return mean_; }
  const MatrixXd& covariance() const { return cov_; }
  const VectorXd& weights() const { return weights_; }

  // sigma * sqrt(diag C)
  VectorXd MarginalStd() const;
  // sigma * sqrt(largest eigenvalue of C)
  double MaxAxis() const { return sigma_ * scales_.maxCoeff(); }
  // ratio of the largest to the smallest eigenvalue of C
  double ConditionNumber() const {
    return (scales_.maxCoeff() / scales_.minCoeff()) *
           (scales_.maxCoeff() / scales_.minCoeff());
  }

  // one candidate per column
  MatrixXd Ask(Rng& rng, const std::optional<Bounds>& bounds = std::nullopt,
               int max_resample = 100);

  // fitness[i] scores column i of candidates (lower is better); non-finite
  // values rank last
  void Tell(const MatrixXd& candidates, const std::vector<double>& fitness);

 private:
  void Decompose();

  // strategy parameters
  int lambda_;
  int mu_;
  VectorXd weights_;
  double mu_eff_;
  double c_sigma_, d_sigma_, c_c_, c_1_, c_mu_, chi_n_;

  // state
  VectorXd mean_;
  double sigma_;
  MatrixXd cov_;
  MatrixXd basis_;   // eigenvectors of C
  VectorXd scales_;  // sqrt of eigenvalues of C
  VectorXd path_sigma_;
  VectorXd path_c_;
  int generation_ = 0;
};

struct CmaesOptions {
  double sigma0 = 1.0;
  int budget = 1000;             // max objective evaluations
  int population = 0;            // 0 = 4 + floor(3 ln n)
  int stagnation_window = 20;    // generations
  double stagnation_tol = 1e-8;  // minimal best-so-far improvement, <= 0 off
  double min_step = 1e-14;      // stop once sigma * sqrt(max eig C) drops below
  double max_condition = 1e14;  // stop once cond(C) exceeds
  std::optional<Bounds> bounds;
  int max_resample = 100;
  double penalty_weight = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;  // concurrent evaluations within one generation
};

// x, evaluation index -> value to minimize. The index is unique per call and
// equals generation * population + candidate, so results never depend on
// evaluation order. Must be safe to call concurrently when workers > 1.
using IndexedObjective = std::function<double(const VectorXd&, std::uint64_t)>;

struct CmaesResult {
  VectorXd best_x;
  double best_f = 0.0;
  std::uint64_t best_index = 0;
  VectorXd mean;                           // final search-distribution mean
  VectorXd marginal_std;                   // final sigma * sqrt(diag C)
  std::vector<double> trace;               // best-so-far per generation
  std::vector<std::uint64_t> trace_index;  // evaluation holding that value
  int evaluations = 0;
  int generations = 0;
  std::string stop_reason;
};

CmaesResult CmaesMinimize(const IndexedObjective& objective, const VectorXd& x0,
                          const CmaesOptions& options);

}  // namespace dropo

#endif  // DROPO_CMAES_H_
