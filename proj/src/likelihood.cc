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

#include "dropo/likelihood.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "dropo/parallel.h"
#include "dropo/preprocess.h"

namespace dropo {
namespace {

constexpr double kTruncation = 2.0;
constexpr int kMaxRedraws = 1000;

// maps raw states onto the scored layout in which every quaternion block
// collapses to a single angle slot
class StateReducer {
 public:
  StateReducer(int state_dim, const OrientationSlots& slots) {
    std::vector<int> offsets = slots.quaternion_offsets;
    std::sort(offsets.begin(), offsets.end());
    int prev_end = 0;
    for (int o : offsets) {
      if (o < prev_end || o + 4 > state_dim) {
        throw InvalidArgument("quaternion slots overlap or exceed the state");
      }
      prev_end = o + 4;
    }
    int out = 0;
    for (int i = 0; i < state_dim;) {
      if (std::find(offsets.begin(), offsets.end(), i) != offsets.end()) {
        quaternions_.push_back({i, out});
        slots_.push_back(out++);
        i += 4;
      } else {
        scalars_.push_back({i, out++});
        ++i;
      }
    }
    reduced_dim_ = out;
  }

  bool identity() const { return quaternions_.empty(); }
  int reduced_dim() const { return reduced_dim_; }
  const std::vector<int>& slots() const { return slots_; }

  // simulated state scored against the real one
  VectorXd Reduce(const VectorXd& sim, const VectorXd& real) const {
    if (identity()) return sim;
    VectorXd out(reduced_dim_);
    for (auto [src, dst] : scalars_) out[dst] = sim[src];
    for (auto [src, dst] : quaternions_) {
      out[dst] =
          QuaternionAngleResidual(real.segment<4>(src), sim.segment<4>(src));
    }
    return out;
  }

  // the real state itself has zero residual in every angle slot
  VectorXd ReduceReal(const VectorXd& real) const {
    if (identity()) return real;
    VectorXd out(reduced_dim_);
    for (auto [src, dst] : scalars_) out[dst] = real[src];
    for (auto [src, dst] : quaternions_) {
      (void)src;
      out[dst] = 0.0;
    }
    return out;
  }

 private:
  struct Map {
    int src;
    int dst;
  };
  int reduced_dim_ = 0;
  std::vector<Map> scalars_;
  std::vector<Map> quaternions_;
  std::vector<int> slots_;
};

void CheckCompatible(const TransitionDataset& dataset, const Simulator& sim) {
  if (dataset.empty()) throw InvalidArgument("dataset has no transitions");
  if (dataset.state_dim != sim.state_dim() ||
      dataset.action_dim != sim.action_dim()) {
    std::ostringstream os;
    os << "dataset dimensions (state " << dataset.state_dim << ", action "
       << dataset.action_dim << ") do not match simulator '" << sim.id()
       << "' (state " << sim.state_dim() << ", action " << sim.action_dim()
       << ")";
    throw InvalidArgument(os.str());
  }
}

std::string TransitionContext(const TransitionDataset& dataset, int i) {
  const Transition& tr = dataset.transitions[i];
  std::ostringstream os;
  os << "transition " << i << " (trajectory " << tr.trajectory
     << ", t=" << tr.start << "): ";
  return os.str();
}

// runs fn(i) for every transition, attaching the transition to any error
template <typename Fn>
void ForEachTransition(const TransitionDataset& dataset, int workers, Fn&& fn) {
  ParallelFor(dataset.size(), workers, [&](int i) {
    try {
      fn(i);
    } catch (const NumericalError& e) {
      throw NumericalError(TransitionContext(dataset, i) + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(TransitionContext(dataset, i) + e.what());
    }
  });
}

struct SampleEvaluation {
  std::vector<double> log_likelihood;
  MatrixXd squared_error;  // reduced_dim x transitions
};

SampleEvaluation EvaluateSamples(const std::vector<DynamicsSample>& xis,
                                 const TransitionDataset& dataset,
                                 const Simulator& sim,
                                 const LikelihoodConfig& cfg,
                                 bool with_likelihood) {
  const StateReducer reducer(dataset.state_dim, cfg.orientation);
  if (with_likelihood && cfg.epsilon.size() != 1 &&
      cfg.epsilon.size() != reducer.reduced_dim()) {
    std::ostringstream os;
    os << "epsilon has " << cfg.epsilon.size() << " entries, expected 1 or "
       << reducer.reduced_dim();
    throw InvalidArgument(os.str());
  }
  const int count = static_cast<int>(xis.size());
  SampleEvaluation out;
  out.log_likelihood.assign(dataset.size(), 0.0);
  out.squared_error.resize(reducer.reduced_dim(), dataset.size());

  ForEachTransition(dataset, cfg.workers, [&](int i) {
    const Transition& tr = dataset.transitions[i];
    MatrixXd replayed(reducer.reduced_dim(), count);
    for (int k = 0; k < count; ++k) {
      replayed.col(k) = reducer.Reduce(
          Replay(sim, tr.state, tr.actions, xis[k]), tr.next_state);
    }
    if (!reducer.identity()) {
      replayed = SymmetrizeOrientationSamples(replayed, reducer.slots());
    }
    const VectorXd real = reducer.ReduceReal(tr.next_state);
    if (with_likelihood) {
      const auto stats = ComputeNextStateStats<double>(replayed, cfg.epsilon);
      out.log_likelihood[i] = TransitionLogLikelihood(stats, real);
      out.squared_error.col(i) = (stats.mean - real).array().square();
    } else {
      VectorXd mean = VectorXd::Zero(replayed.rows());
      for (Eigen::Index k = 0; k < replayed.cols(); ++k)
        mean += replayed.col(k);
      mean /= static_cast<double>(replayed.cols());
      out.squared_error.col(i) = (mean - real).array().square();
    }
  });
  return out;
}

MseReport MakeReport(MatrixXd squared_error) {
  MseReport report;
  report.transition_squared_error.resize(squared_error.cols());
  for (Eigen::Index i = 0; i < squared_error.cols(); ++i) {
    report.transition_squared_error[i] = squared_error.col(i).sum();
    report.total += report.transition_squared_error[i];
  }
  report.per_transition =
      report.total / static_cast<double>(squared_error.cols());
  report.dimension_squared_error = std::move(squared_error);
  return report;
}

std::vector<DynamicsSample> DrawForEvaluation(const DynamicsDistribution& phi,
                                              const LikelihoodConfig& cfg,
                                              std::uint64_t evaluation_index) {
  if (auto violation = ValidateDistribution(phi)) {
    throw InvalidArgument("invalid dynamics distribution: " + *violation);
  }
  Rng rng = MakeRng(cfg.seed, Stream::kLikelihood, evaluation_index);
  return SampleDynamics(phi, cfg.samples, rng);
}

}  // namespace

void LikelihoodConfig::Validate() const {
  if (samples < 2) throw InvalidArgument("likelihood needs K >= 2 samples");
  if (lambda < 1) throw InvalidArgument("lambda must be >= 1");
  if (epsilon.size() == 0) throw InvalidArgument("epsilon is empty");
  if (!(epsilon.array() >= 0.0).all() || !epsilon.allFinite()) {
    throw InvalidArgument("epsilon must be finite and non-negative");
  }
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

std::vector<DynamicsSample> SampleDynamics(const DynamicsDistribution& phi,
                                           int count, Rng& rng) {
  const Eigen::Index d = phi.space.dim();
  if (count < 1) throw InvalidArgument("sample count must be >= 1");
  if (phi.mean.size() != d || phi.std.size() != d) {
    throw InvalidArgument("distribution dimension mismatch");
  }
  if (!(phi.std.array() >= 0.0).all()) {
    throw InvalidArgument("distribution std must be non-negative");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (phi.mean[i] + kTruncation * phi.std[i] <= phi.space.validity_lower[i]) {
      std::ostringstream os;
      os << "truncation region of '" << phi.space.names[i] << "' (mean "
         << phi.mean[i] << " + 2 std " << phi.std[i]
         << ") lies entirely at or below its validity floor "
         << phi.space.validity_lower[i];
      throw InvalidArgument(os.str());
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  auto truncated = [&]() {
    double z;
    do {
      z = gauss(rng);
    } while (std::abs(z) > kTruncation);
    return z;
  };

  std::vector<DynamicsSample> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    DynamicsSample xi;
    xi.values.resize(d);
    int attempts = 0;
    for (;;) {
      for (Eigen::Index i = 0; i < d; ++i) {
        xi.values[i] = phi.mean[i] + phi.std[i] * truncated();
      }
      if ((xi.values.array() > phi.space.validity_lower.array()).all()) break;
      if (++attempts >= kMaxRedraws) {
        throw NumericalError(
            "could not draw a feasible dynamics sample after 1000 attempts");
      }
    }
    out.push_back(std::move(xi));
  }
  return out;
}

DatasetEvaluation EvaluateDataset(const DynamicsDistribution& phi,
                                  const TransitionDataset& dataset,
                                  const Simulator& sim,
                                  const LikelihoodConfig& cfg,
                                  std::uint64_t evaluation_index) {
  cfg.Validate();
  CheckCompatible(dataset, sim);
  if (dataset.lambda != cfg.lambda) {
    throw InvalidArgument("dataset lambda differs from likelihood lambda");
  }
  const auto xis = DrawForEvaluation(phi, cfg, evaluation_index);
  SampleEvaluation eval = EvaluateSamples(xis, dataset, sim, cfg, true);

  DatasetEvaluation out;
  out.transition_log_likelihood = std::move(eval.log_likelihood);
  out.transition_squared_error.resize(dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    out.log_likelihood += out.transition_log_likelihood[i];
    out.transition_squared_error[i] = eval.squared_error.col(i).sum();
    out.mse += out.transition_squared_error[i];
  }
  return out;
}

double DatasetLogLikelihood(const DynamicsDistribution& phi,
                            const TransitionDataset& dataset,
                            const Simulator& sim, const LikelihoodConfig& cfg,
                            std::uint64_t evaluation_index) {
  return EvaluateDataset(phi, dataset, sim, cfg, evaluation_index)
      .log_likelihood;
}

MseReport DatasetMse(const DynamicsDistribution& phi,
                     const TransitionDataset& dataset, const Simulator& sim,
                     const LikelihoodConfig& cfg,
                     std::uint64_t evaluation_index) {
  cfg.Validate();
  CheckCompatible(dataset, sim);
  const auto xis = DrawForEvaluation(phi, cfg, evaluation_index);
  return MakeReport(
      EvaluateSamples(xis, dataset, sim, cfg, false).squared_error);
}

MseReport PointReplayMse(const DynamicsSample& params,
                         const TransitionDataset& dataset, const Simulator& sim,
                         const OrientationSlots& orientation, int workers) {
  CheckCompatible(dataset, sim);
  const StateReducer reducer(dataset.state_dim, orientation);
  MatrixXd squared_error(reducer.reduced_dim(), dataset.size());
  ForEachTransition(dataset, workers, [&](int i) {
    const Transition& tr = dataset.transitions[i];
    const VectorXd sim_next = reducer.Reduce(
        Replay(sim, tr.state, tr.actions, params), tr.next_state);
    squared_error.col(i) =
        (sim_next - reducer.ReduceReal(tr.next_state)).array().square();
  });
  return MakeReport(std::move(squared_error));
}

}  // namespace dropo
