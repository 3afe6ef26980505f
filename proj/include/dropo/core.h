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

#ifndef DROPO_CORE_H_
#define DROPO_CORE_H_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dropo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// base class for all errors raised by the library
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// malformed inputs, violated preconditions
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// factorization failures, non-finite objectives
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kDefaultStdMin = 1.0e-5;

// search box and standard-deviation limits for the randomized parameters
struct ParameterSpace {
  std::vector<std::string> names;
  VectorXd lower;           // search minimum per parameter
  VectorXd upper;           // search maximum per parameter
  VectorXd validity_lower;  // hard physical floor, samples must exceed it
  double std_min = kDefaultStdMin;
  VectorXd std_max;

  // std_max defaults to a quarter of the search width
  static ParameterSpace Make(std::vector<std::string> names, VectorXd lower,
                             VectorXd upper, VectorXd validity_lower,
                             double std_min = kDefaultStdMin);

  int dim() const { return static_cast<int>(names.size()); }

  // index of the named parameter, -1 if absent
  int IndexOf(const std::string& name) const;

  // throws InvalidArgument on the first broken invariant
  void Validate() const;
};

// uncorrelated (truncated) normal over the dynamics parameters
struct DynamicsDistribution {
  ParameterSpace space;
  VectorXd mean;
  VectorXd std;

  int dim() const { return static_cast<int>(mean.size()); }
  VectorXd Variance() const { return std.array().square().matrix(); }
  double TotalVariance() const { return std.squaredNorm(); }

  // means at the search midpoint, stds at the geometric mean of the limits
  static DynamicsDistribution DefaultInit(const ParameterSpace& space);

  // a distribution whose spread sits at the std floor
  static DynamicsDistribution PointMass(const ParameterSpace& space,
                                        const VectorXd& values);
};

// one physical parameter vector
struct DynamicsSample {
  VectorXd values;
};

// returns the first violated invariant, or nullopt when phi is valid
std::optional<std::string> ValidateDistribution(
    const DynamicsDistribution& phi);

// states has one column per timestep, actions one column per step between
// consecutive states
struct Trajectory {
  VectorXd times;
  MatrixXd states;
  MatrixXd actions;

  int length() const { return static_cast<int>(actions.cols()); }
  int state_dim() const { return static_cast<int>(states.rows()); }
  int action_dim() const { return static_cast<int>(actions.rows()); }

  void Validate() const;
};

struct Transition {
  int trajectory = 0;   // source trajectory index
  int start = 0;        // index t of the starting state
  VectorXd state;       // s_t
  MatrixXd actions;     // a_t .. a_{t+lambda-1}, one per column
  VectorXd next_state;  // s_{t+lambda}
};

struct TransitionDataset {
  int lambda = 1;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Transition> transitions;

  int size() const { return static_cast<int>(transitions.size()); }
  bool empty() const { return transitions.empty(); }
};

// all windows of lambda consecutive actions inside one trajectory
TransitionDataset ExtractTransitions(const Trajectory& trajectory, int lambda);

// concatenation of the per-trajectory lists, never crossing boundaries
TransitionDataset ExtractTransitions(std::span<const Trajectory> trajectories,
                                     int lambda);

enum class ObjectiveKind { kDropo, kDroid };

const char* ObjectiveName(ObjectiveKind kind);

struct FitResult {
  ObjectiveKind kind = ObjectiveKind::kDropo;
  DynamicsDistribution phi_star;
  std::vector<double> objective_trace;  // best-so-far minimized objective
  std::vector<double> mse_trace;        // d_D of the best-so-far candidate
  double mse = 0.0;                     // d_D(phi*), a sum over transitions
  double mse_per_transition = 0.0;
  VectorXd epsilon;
  int evaluations = 0;
  int generations = 0;
  std::uint64_t seed = 0;
  std::string stop_reason;
};

}  // namespace dropo

#endif  // DROPO_CORE_H_
