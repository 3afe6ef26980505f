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

#include "dropo/cmaes.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dropo/parallel.h"

namespace dropo {
namespace {

bool Inside(const VectorXd& x, const Bounds& b) {
  return (x.array() >= b.lower.array()).all() &&
         (x.array() <= b.upper.array()).all();
}

}  // namespace

Cmaes::Cmaes(const VectorXd& x0, double sigma0, int population) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw InvalidArgument("cmaes: dimension must be >= 1");
  if (!(sigma0 > 0.0)) throw InvalidArgument("cmaes: sigma0 must be positive");
  if (!x0.allFinite()) throw InvalidArgument("cmaes: x0 must be finite");

  lambda_ = population > 0
                ? population
                : 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  if (lambda_ < 2) throw InvalidArgument("cmaes: population must be >= 2");
  mu_ = lambda_ / 2;

  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) {
    weights_[i] = std::log((lambda_ + 1) / 2.0) - std::log(i + 1.0);
  }
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  const double dn = n;
  c_sigma_ = (mu_eff_ + 2.0) / (dn + mu_eff_ + 5.0);
  d_sigma_ =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (dn + 1.0)) - 1.0) +
      c_sigma_;
  c_c_ = (4.0 + mu_eff_ / dn) / (dn + 4.0 + 2.0 * mu_eff_ / dn);
  c_1_ = 2.0 / ((dn + 1.3) * (dn + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                   ((dn + 2.0) * (dn + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

  mean_ = x0;
  sigma_ = sigma0;
  cov_ = MatrixXd::Identity(n, n);
  basis_ = MatrixXd::Identity(n, n);
  scales_ = VectorXd::Ones(n);
  path_sigma_ = VectorXd::Zero(n);
  path_c_ = VectorXd::Zero(n);
}

VectorXd Cmaes::MarginalStd() const {
  return sigma_ * cov_.diagonal().array().sqrt().matrix();
}

MatrixXd Cmaes::Ask(Rng& rng, const std::optional<Bounds>& bounds,
                    int max_resample) {
  const int n = dim();
  if (bounds && (bounds->lower.size() != n || bounds->upper.size() != n)) {
    throw InvalidArgument("cmaes: bounds dimension mismatch");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd candidates(n, lambda_);
  VectorXd z(n);
  for (int k = 0; k < lambda_; ++k) {
    VectorXd x;
    for (int attempt = 0;; ++attempt) {
      for (int i = 0; i < n; ++i) z[i] = gauss(rng);
      x = mean_ + sigma_ * (basis_ * scales_.cwiseProduct(z));
      if (!bounds || Inside(x, *bounds) || attempt + 1 >= max_resample) break;
    }
    candidates.col(k) = x;
  }
  return candidates;
}

void Cmaes::Tell(const MatrixXd& candidates,
                 const std::vector<double>& fitness) {
  const int n = dim();
  if (candidates.cols() != lambda_ || candidates.rows() != n ||
      static_cast<int>(fitness.size()) != lambda_) {
    throw InvalidArgument("cmaes: tell expects one fitness per candidate");
  }

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    return std::isfinite(fitness[i]) ? fitness[i]
                                     : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key(a) < key(b); });

  const VectorXd old_mean = mean_;
  MatrixXd steps(n, mu_);  // y_i = (x_i:lambda - m) / sigma
  for (int i = 0; i < mu_; ++i) {
    steps.col(i) = (candidates.col(order[i]) - old_mean) / sigma_;
  }
  const VectorXd y_w = steps * weights_;
  mean_ = old_mean + sigma_ * y_w;

  // C^-1/2 y_w = B D^-1 B^T y_w
  const VectorXd whitened =
      basis_ * (basis_.transpose() * y_w).cwiseQuotient(scales_);
  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;

  ++generation_;
  const double ps_norm = path_sigma_.norm();
  const double decay = 1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_);
  const bool h_sigma =
      ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * chi_n_;

  path_c_ = (1.0 - c_c_) * path_c_ +
            (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_w;

  const double delta_h = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
  MatrixXd rank_mu = steps * weights_.asDiagonal() * steps.transpose();
  cov_ = (1.0 - c_1_ - c_mu_) * cov_ +
         c_1_ * (path_c_ * path_c_.transpose() + delta_h * cov_) +
         c_mu_ * rank_mu;
  cov_ = 0.5 * (cov_ + cov_.transpose());

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
  Decompose();
}

void Cmaes::Decompose() {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov_);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("cmaes: eigendecomposition of C failed");
  }
  const VectorXd& values = eig.eigenvalues();
  if (!(values.minCoeff() > 0.0) || !values.allFinite()) {
    std::ostringstream os;
    os << "cmaes: covariance lost positive definiteness at generation "
       << generation_ << " (eigenvalues in [" << values.minCoeff() << ", "
       << values.maxCoeff() << "])";
    throw NumericalError(os.str());
  }
  basis_ = eig.eigenvectors();
  scales_ = values.array().sqrt();
}

CmaesResult CmaesMinimize(const IndexedObjective& objective, const VectorXd& x0,
                          const CmaesOptions& options) {
  Cmaes es(x0, options.sigma0, options.population);
  const int lambda = es.population();
  if (options.budget < lambda) {
    std::ostringstream os;
    os << "cmaes: budget " << options.budget
       << " is smaller than the population " << lambda;
    throw InvalidArgument(os.str());
  }
  if (options.bounds) {
    const Bounds& b = *options.bounds;
    if (b.lower.size() != x0.size() || b.upper.size() != x0.size() ||
        !(b.lower.array() < b.upper.array()).all()) {
      throw InvalidArgument("cmaes: invalid bounds");
    }
  }

  Rng rng = MakeRng(options.seed, Stream::kCmaes);
  CmaesResult result;
  result.best_f = std::numeric_limits<double>::infinity();
  result.stop_reason = "budget";

  std::vector<double> fitness(lambda);
  while (result.evaluations + lambda <= options.budget) {
    const MatrixXd candidates =
        es.Ask(rng, options.bounds, options.max_resample);
    const std::uint64_t base =
        static_cast<std::uint64_t>(es.generation()) * lambda;

    ParallelFor(lambda, options.workers, [&](int k) {
      VectorXd x = candidates.col(k);
      double penalty = 0.0;
      if (options.bounds) {
        const VectorXd clamped =
            x.cwiseMax(options.bounds->lower).cwiseMin(options.bounds->upper);
        penalty = options.penalty_weight * (x - clamped).squaredNorm();
        x = clamped;
      }
      fitness[k] = objective(x, base + k) + penalty;
    });
    result.evaluations += lambda;

    bool any_finite = false;
    for (int k = 0; k < lambda; ++k) {
      if (!std::isfinite(fitness[k])) continue;
      any_finite = true;
      if (fitness[k] < result.best_f) {
        result.best_f = fitness[k];
        result.best_index = base + k;
        result.best_x = candidates.col(k);
        if (options.bounds) {
          result.best_x = result.best_x.cwiseMax(options.bounds->lower)
                              .cwiseMin(options.bounds->upper);
        }
      }
    }
    if (!any_finite) {
      std::ostringstream os;
      os << "cmaes: every candidate of generation " << es.generation()
         << " returned a non-finite objective (sigma " << es.sigma()
         << ", mean norm " << es.mean().norm() << ")";
      throw NumericalError(os.str());
    }

    es.Tell(candidates, fitness);
    result.trace.push_back(result.best_f);
    result.trace_index.push_back(result.best_index);

    const int g = static_cast<int>(result.trace.size());
    const int window = options.stagnation_window;
    if (options.stagnation_tol > 0.0 && window > 0 && g > window &&
        result.trace[g - 1 - window] - result.trace[g - 1] <
            options.stagnation_tol) {
      result.stop_reason = "stagnation";
      break;
    }
    if (es.MaxAxis() < options.min_step) {
      result.stop_reason = "min_step";
      break;
    }
    if (es.ConditionNumber() > options.max_condition) {
      result.stop_reason = "condition";
      break;
    }
  }

  result.mean = es.mean();
  if (options.bounds) {
    result.mean = result.mean.cwiseMax(options.bounds->lower)
                      .cwiseMin(options.bounds->upper);
  }
  result.marginal_std = es.MarginalStd();
  result.generations = es.generation();
  return result;
}

}  // namespace dropo
