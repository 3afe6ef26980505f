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

#ifndef DROPO_CONFIG_H_
#define DROPO_CONFIG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dropo/fit.h"
#include "dropo/io.h"
#include "dropo/likelihood.h"
#include "dropo/sim.h"

namespace dropo {

// malformed or inconsistent run configuration
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct SimulatorSection {
  std::string id;
  double dt = kDefaultTimestep;
  std::map<std::string, double> fixed;  // parameters frozen at a value
};

struct ParameterSection {
  std::vector<std::string> names;  // must match the simulator when given
  std::optional<VectorXd> lower, upper, validity_lower, std_max;
  std::optional<double> std_min;
};

struct GenerationSection {
  std::optional<VectorXd> values;  // fixed ground truth
  std::optional<VectorXd> mean;    // or a distribution
  std::optional<VectorXd> std;
  int resample_every = 0;
  VectorXd noise_std = VectorXd::Zero(1);
  int transitions = 200;
  int trajectories = 1;
  ExcitationKind excitation = ExcitationKind::kAuto;
  double amplitude = 0.0;
  VectorXd initial_state;
  std::uint64_t seed = 0;
};

struct OptimizerSection {
  ObjectiveKind objective = ObjectiveKind::kDropo;
  int budget = 2000;
  int stagnation_window = 20;
  double stagnation_tol = 1e-8;
  int population = 0;
  double sigma0 = 1.0;
  FitSelection selection = FitSelection::kFinalMean;
  std::optional<VectorXd> init_mean;
  std::optional<VectorXd> init_std;
};

struct PreprocessSection {
  double dt = kDefaultTimestep;
  std::map<std::string, double> offsets;
  std::vector<ChannelSpec> channels;
};

struct TuningSection {
  std::vector<double> candidates;
  double tau = 0.0;
};

struct RunConfig {
  SimulatorSection simulator;
  std::optional<ParameterSection> parameters;
  std::optional<GenerationSection> generation;
  LikelihoodConfig likelihood;
  OptimizerSection optimizer;
  std::optional<PreprocessSection> preprocess;
  std::optional<TuningSection> tuning;
  std::string echo;  // canonical JSON of the parsed document
};

// strict: unknown keys, wrong types and out-of-range values are errors that
// name the offending key path
RunConfig ParseRunConfig(const std::string& text,
                         const std::string& source = "<config>");
RunConfig LoadRunConfig(const std::string& path);

// the configured simulator with frozen parameters and search-space overrides
std::unique_ptr<Simulator> BuildSimulator(const RunConfig& config);

DataGenConfig BuildDataGenConfig(const RunConfig& config, const Simulator& sim);
FitConfig BuildFitConfig(const RunConfig& config, const Simulator& sim);

}  // namespace dropo

#endif  // DROPO_CONFIG_H_
