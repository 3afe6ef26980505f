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

#ifndef DROPO_LIKELIHOOD_H_
#define DROPO_LIKELIHOOD_H_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "dropo/core.h"
#include "dropo/random.h"
#include "dropo/sim.h"

namespace dropo {

// Gaussian summary of the replayed next states of one transition
template <typename Scalar>
struct NextStateStats {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector mean;
  Matrix cov;  // unbiased sample covariance + diag(epsilon)
  int sample_count = 0;
};

// samples holds one replayed state per column. epsilon has one entry per
// state dimension, or a single entry that is broadcast.
template <typename Scalar>
NextStateStats<Scalar> ComputeNextStateStats(
    const Eigen::Ref<
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& samples,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& epsilon) {
  using Vector = typename NextStateStats<Scalar>::Vector;
  using Matrix = typename NextStateStats<Scalar>::Matrix;
  const Eigen::Index dim = samples.rows();
  const Eigen::Index count = samples.cols();
  if (count < 2) {
    throw InvalidArgument("next-state statistics need at least 2 samples");
  }
  if (epsilon.size() != dim && epsilon.size() != 1) {
    throw InvalidArgument("epsilon dimension does not match state dimension");
  }

  // sequential column sums keep +a/-a pairs cancelling exactly
  Vector mean = Vector::Zero(dim);
  for (Eigen::Index k = 0; k < count; ++k) mean += samples.col(k);
  mean /= static_cast<Scalar>(count);

  Matrix centered = samples.colwise() - mean;
  Matrix cov =
      (centered * centered.transpose()) / static_cast<Scalar>(count - 1);
  cov = Scalar(0.5) * (cov + cov.transpose());
  if (epsilon.size() == 1) {
    cov.diagonal().array() += epsilon[0];
  } else {
    cov.diagonal() += epsilon;
  }
  return {std::move(mean), std::move(cov), static_cast<int>(count)};
}

// -1/2 (log det cov + (mean - real)^T cov^-1 (mean - real)), the Gaussian
// log-density without its constant term
template <typename Scalar>
Scalar TransitionLogLikelihood(
    const NextStateStats<Scalar>& stats,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& real) {
  const Eigen::Index dim = stats.mean.size();
  if (real.size() != dim || stats.cov.rows() != dim ||
      stats.cov.cols() != dim) {
    throw InvalidArgument("log-likelihood: dimension mismatch");
  }
  Eigen::LLT<typename NextStateStats<Scalar>::Matrix> llt(stats.cov);
  const auto& factor = llt.matrixLLT();
  bool ok = llt.info() == Eigen::Success;
  for (Eigen::Index i = 0; ok && i < dim; ++i) {
    ok = std::isfinite(static_cast<double>(factor(i, i))) && factor(i, i) > 0;
  }
  if (!ok) {
    const auto diag = stats.cov.diagonal();
    std::ostringstream os;
    os << "covariance is not positive definite (dim " << dim
       << ", diagonal min " << diag.minCoeff() << ", max " << diag.maxCoeff()
       << ", samples " << stats.sample_count
       << "); a positive epsilon regularizes it";
    throw NumericalError(os.str());
  }
  Scalar log_det = 0;
  for (Eigen::Index i = 0; i < dim; ++i) log_det += std::log(factor(i, i));
  log_det *= 2;
  const auto residual = (stats.mean - real).eval();
  const auto whitened =
      llt.matrixL().solve(residual).eval();  // L^-1 (mean - real)
  return Scalar(-0.5) * (log_det + whitened.squaredNorm());
}

// quaternion blocks (w, x, y, z) inside the raw state that are scored through
// their angular residual instead of component-wise
struct OrientationSlots {
  std::vector<int> quaternion_offsets;

  bool empty() const { return quaternion_offsets.empty(); }
  // state dimension after each quaternion collapses to one angle
  int ReducedDim(int state_dim) const {
    return state_dim - 3 * static_cast<int>(quaternion_offsets.size());
  }
};

struct LikelihoodConfig {
  int samples = 100;  // K
  VectorXd epsilon = VectorXd::Constant(1, 1.0e-5);
  int lambda = 1;
  std::uint64_t seed = 0;
  OrientationSlots orientation;
  int workers = 1;

  void Validate() const;
};

// K draws of an uncorrelated normal truncated to mean +- 2 std; draws at or
// below the validity floor are redrawn
std::vector<DynamicsSample> SampleDynamics(const DynamicsDistribution& phi,
                                           int count, Rng& rng);

struct DatasetEvaluation {
  double log_likelihood = 0.0;  // sum of L_t in transition order
  double mse = 0.0;             // d_D: sum of squared replay-mean errors
  std::vector<double> transition_log_likelihood;
  std::vector<double> transition_squared_error;
};

// Monte Carlo estimate of the dataset log-likelihood under phi. The K
// dynamics samples are drawn once from the stream keyed by
// (cfg.seed, evaluation_index) and shared by every transition.
DatasetEvaluation EvaluateDataset(const DynamicsDistribution& phi,
                                  const TransitionDataset& dataset,
                                  const Simulator& sim,
                                  const LikelihoodConfig& cfg,
                                  std::uint64_t evaluation_index = 0);

double DatasetLogLikelihood(const DynamicsDistribution& phi,
                            const TransitionDataset& dataset,
                            const Simulator& sim, const LikelihoodConfig& cfg,
                            std::uint64_t evaluation_index = 0);

struct MseReport {
  double total = 0.0;  // d_D
  double per_transition = 0.0;
  std::vector<double> transition_squared_error;
  MatrixXd dimension_squared_error;  // state_dim x transitions
};

// d_D under the K-sample replay mean
MseReport DatasetMse(const DynamicsDistribution& phi,
                     const TransitionDataset& dataset, const Simulator& sim,
                     const LikelihoodConfig& cfg,
                     std::uint64_t evaluation_index = 0);

// d_D for a single deterministic parameter vector
MseReport PointReplayMse(const DynamicsSample& params,
                         const TransitionDataset& dataset, const Simulator& sim,
                         const OrientationSlots& orientation = {},
                         int workers = 1);

}  // namespace dropo

#endif  // DROPO_LIKELIHOOD_H_
