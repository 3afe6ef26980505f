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

#include <cmath>
#include <sstream>

#include "dropo/cmaes.h"
#include "dropo/normalize.h"
#include "dropo/random.h"

namespace dropo {
namespace {

CmaesOptions MakeOptions(const FitConfig& cfg, int dim) {
  CmaesOptions options;
  options.sigma0 = cfg.sigma0;
  options.budget = cfg.budget;
  options.population = cfg.population;
  options.stagnation_window = cfg.stagnation_window;
  options.stagnation_tol = cfg.stagnation_tol;
  options.bounds =
      Bounds{VectorXd::Zero(dim), VectorXd::Constant(dim, kNormalizedMax)};
  options.seed = cfg.seed;
  options.workers = cfg.workers;
  return options;
}

DynamicsDistribution InitialPhi(const FitConfig& cfg, const Simulator& sim) {
  DynamicsDistribution phi =
      cfg.phi_init ? *cfg.phi_init
                   : DynamicsDistribution::DefaultInit(sim.param_space());
  if (phi.space.names != sim.param_space().names) {
    throw InvalidArgument(
        "initial distribution does not match the simulator's parameters");
  }
  if (auto violation = ValidateDistribution(phi)) {
    throw InvalidArgument("invalid initial distribution: " + *violation);
  }
  return phi;
}

std::string CandidateContext(std::uint64_t index, int population) {
  std::ostringstream os;
  os << "candidate " << index % population << " of generation "
     << index / population << ": ";
  return os.str();
}

std::vector<double> ResolveTrace(const CmaesResult& run,
                                 const std::vector<double>& by_index) {
  std::vector<double> out;
  out.reserve(run.trace_index.size());
  for (std::uint64_t i : run.trace_index) out.push_back(by_index[i]);
  return out;
}

int PopulationFor(const FitConfig& cfg, int dim) {
  return cfg.population > 0
             ? cfg.population
             : 4 + static_cast<int>(std::floor(3.0 * std::log(dim)));
}

}  // namespace

void FitConfig::Validate() const {
  if (budget <= 0) throw InvalidArgument("budget must be positive");
  if (!(sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (population < 0) throw InvalidArgument("population must be >= 0");
  likelihood.Validate();
}

FitResult FitDropo(const TransitionDataset& dataset, const Simulator& sim,
                   const FitConfig& cfg) {
  cfg.Validate();
  const ParameterSpace& space = sim.param_space();
  const int d = space.dim();
  const VectorXd z0 = NormalizePhi(InitialPhi(cfg, sim)).z;

  LikelihoodConfig lik = cfg.likelihood;
  lik.seed = cfg.seed;
  lik.workers = 1;
  const int population = PopulationFor(cfg, 2 * d);

  std::vector<double> mse_by_index(cfg.budget, 0.0);
  auto objective = [&](const VectorXd& z, std::uint64_t index) {
    const DynamicsDistribution phi = DenormalizePhi({z}, space);
    try {
      const DatasetEvaluation eval =
          EvaluateDataset(phi, dataset, sim, lik, index);
      mse_by_index[index] = eval.mse;
      return -eval.log_likelihood;
    } catch (const NumericalError& e) {
      throw NumericalError(CandidateContext(index, population) + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(CandidateContext(index, population) + e.what());
    }
  };
  const CmaesResult run = CmaesMinimize(objective, z0, MakeOptions(cfg, 2 * d));

  FitResult result;
  result.kind = ObjectiveKind::kDropo;
  const VectorXd& z_star =
      cfg.selection == FitSelection::kFinalMean ? run.mean : run.best_x;
  result.phi_star = DenormalizePhi({z_star}, space);
  result.objective_trace = run.trace;
  result.mse_trace = ResolveTrace(run, mse_by_index);
  result.epsilon = lik.epsilon;
  result.evaluations = run.evaluations;
  result.generations = run.generations;
  result.seed = cfg.seed;
  result.stop_reason = run.stop_reason;

  LikelihoodConfig report = lik;
  report.seed = DeriveSeed(cfg.seed, Stream::kReport);
  report.workers = cfg.workers;
  const MseReport mse = DatasetMse(result.phi_star, dataset, sim, report);
  result.mse = mse.total;
  result.mse_per_transition = mse.per_transition;
  return result;
}

FitResult FitDroidBaseline(const TransitionDataset& dataset,
                           const Simulator& sim, const FitConfig& cfg) {
  cfg.Validate();
  const ParameterSpace& space = sim.param_space();
  const int d = space.dim();
  const VectorXd z0 = NormalizeMeans(InitialPhi(cfg, sim).mean, space);
  const OrientationSlots& orientation = cfg.likelihood.orientation;
  const int population = PopulationFor(cfg, d);

  auto objective = [&](const VectorXd& z, std::uint64_t index) {
    try {
      return PointReplayMse({DenormalizeMeans(z, space)}, dataset, sim,
                            orientation)
          .total;
    } catch (const NumericalError& e) {
      throw NumericalError(CandidateContext(index, population) + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(CandidateContext(index, population) + e.what());
    }
  };
  const CmaesResult run = CmaesMinimize(objective, z0, MakeOptions(cfg, d));

  FitResult result;
  result.kind = ObjectiveKind::kDroid;
  result.phi_star.space = space;
  result.phi_star.mean = DenormalizeMeans(run.best_x, space);
  result.phi_star.std = run.marginal_std.cwiseProduct(MeanScale(space));
  result.objective_trace = run.trace;
  result.mse_trace = run.trace;
  result.epsilon = cfg.likelihood.epsilon;
  result.evaluations = run.evaluations;
  result.generations = run.generations;
  result.seed = cfg.seed;
  result.stop_reason = run.stop_reason;

  const MseReport mse = PointReplayMse({result.phi_star.mean}, dataset, sim,
                                       orientation, cfg.workers);
  result.mse = mse.total;
  result.mse_per_transition = mse.per_transition;
  return result;
}

FitResult Fit(const TransitionDataset& dataset, const Simulator& sim,
              const FitConfig& cfg) {
  return cfg.kind == ObjectiveKind::kDropo
             ? FitDropo(dataset, sim, cfg)
             : FitDroidBaseline(dataset, sim, cfg);
}

TuneResult TuneEpsilon(const TransitionDataset& dataset, const Simulator& sim,
                       const FitConfig& cfg,
                       const std::vector<double>& candidates, double tau) {
  if (candidates.empty()) throw InvalidArgument("no epsilon candidates");
  for (double e : candidates) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw InvalidArgument("epsilon candidates must be finite and >= 0");
    }
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("tau must be finite and >= 0");
  }
  TuneResult out;
  for (double e : candidates) {
    FitConfig run = cfg;
    run.kind = ObjectiveKind::kDropo;
    run.likelihood.epsilon = VectorXd::Constant(1, e);
    FitResult fit = FitDropo(dataset, sim, run);
    out.table.push_back({e, fit.phi_star.TotalVariance(), fit.mse});
    out.fits.push_back(std::move(fit));
  }
  for (int i = 0; i < static_cast<int>(out.table.size()); ++i) {
    if (out.table[i].mse < tau &&
        (!out.selected ||
         out.table[i].epsilon < out.table[*out.selected].epsilon)) {
      out.selected = i;
    }
  }
  return out;
}

}  // namespace dropo
