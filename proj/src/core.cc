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

#include "dropo/core.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace dropo {

ParameterSpace ParameterSpace::Make(std::vector<std::string> names,
                                    VectorXd lower, VectorXd upper,
                                    VectorXd validity_lower, double std_min) {
  ParameterSpace space;
  space.names = std::move(names);
  space.lower = std::move(lower);
  space.upper = std::move(upper);
  space.validity_lower = std::move(validity_lower);
  space.std_min = std_min;
  if (space.upper.size() == space.lower.size()) {
    space.std_max = 0.25 * (space.upper - space.lower);
  }
  space.Validate();
  return space;
}

int ParameterSpace::IndexOf(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

void ParameterSpace::Validate() const {
  const Eigen::Index d = dim();
  if (d == 0) throw InvalidArgument("parameter space is empty");
  if (lower.size() != d || upper.size() != d || validity_lower.size() != d ||
      std_max.size() != d) {
    throw InvalidArgument("parameter space: dimension mismatch");
  }
  if (!(std_min > 0.0)) {
    throw InvalidArgument("parameter space: std_min must be positive");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::string& n = names[i];
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) ||
        !(lower[i] < upper[i])) {
      throw InvalidArgument("parameter space: lower < upper violated for '" +
                            n + "'");
    }
    if (!(validity_lower[i] <= lower[i])) {
      throw InvalidArgument(
          "parameter space: validity floor above search minimum for '" + n +
          "'");
    }
    if (!(std_min < std_max[i])) {
      throw InvalidArgument("parameter space: std_min >= std_max for '" + n +
                            "'");
    }
  }
}

DynamicsDistribution DynamicsDistribution::DefaultInit(
    const ParameterSpace& space) {
  space.Validate();
  DynamicsDistribution phi;
  phi.space = space;
  phi.mean = 0.5 * (space.lower + space.upper);
  phi.std = (space.std_max.array() * space.std_min).sqrt().matrix();
  return phi;
}

DynamicsDistribution DynamicsDistribution::PointMass(
    const ParameterSpace& space, const VectorXd& values) {
  DynamicsDistribution phi;
  phi.space = space;
  phi.mean = values;
  phi.std = VectorXd::Constant(values.size(), space.std_min);
  return phi;
}

std::optional<std::string> ValidateDistribution(
    const DynamicsDistribution& phi) {
  const Eigen::Index d = phi.space.dim();
  if (phi.mean.size() != phi.std.size() || phi.mean.size() != d) {
    std::ostringstream os;
    os << "dimension mismatch: mean " << phi.mean.size() << ", std "
       << phi.std.size() << ", space " << d;
    return os.str();
  }
  try {
    phi.space.Validate();
  } catch (const InvalidArgument& e) {
    return std::string(e.what());
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!std::isfinite(phi.mean[i]) || !std::isfinite(phi.std[i])) {
      return "non-finite entry for '" + phi.space.names[i] + "'";
    }
    if (phi.std[i] < phi.space.std_min) {
      std::ostringstream os;
      os << "std below floor for '" << phi.space.names[i] << "': " << phi.std[i]
         << " < " << phi.space.std_min;
      return os.str();
    }
  }
  return std::nullopt;
}

void Trajectory::Validate() const {
  if (states.cols() != actions.cols() + 1) {
    throw InvalidArgument(
        "trajectory: need exactly one more state than actions");
  }
  if (times.size() != states.cols()) {
    throw InvalidArgument("trajectory: one timestamp per state required");
  }
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      std::ostringstream os;
      os << "trajectory: times not strictly increasing at index " << i;
      throw InvalidArgument(os.str());
    }
  }
}

TransitionDataset ExtractTransitions(const Trajectory& trajectory, int lambda) {
  const Trajectory* one = &trajectory;
  return ExtractTransitions(std::span<const Trajectory>(one, 1), lambda);
}

TransitionDataset ExtractTransitions(std::span<const Trajectory> trajectories,
                                     int lambda) {
  if (lambda < 1) throw InvalidArgument("lambda must be >= 1");
  if (trajectories.empty()) throw InvalidArgument("no trajectories given");

  TransitionDataset dataset;
  dataset.lambda = lambda;
  dataset.state_dim = trajectories.front().state_dim();
  dataset.action_dim = trajectories.front().action_dim();

  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    const Trajectory& traj = trajectories[j];
    traj.Validate();
    if (traj.state_dim() != dataset.state_dim ||
        traj.action_dim() != dataset.action_dim) {
      throw InvalidArgument("trajectories disagree on state/action dimension");
    }
    if (traj.states.cols() < lambda + 1) {
      std::ostringstream os;
      os << "trajectory " << j << " has " << traj.states.cols()
         << " states, lambda=" << lambda << " needs at least " << lambda + 1;
      throw InvalidArgument(os.str());
    }
    for (int t = 0; t + lambda <= traj.length(); ++t) {
      Transition tr;
      tr.trajectory = static_cast<int>(j);
      tr.start = t;
      tr.state = traj.states.col(t);
      tr.actions = traj.actions.middleCols(t, lambda);
      tr.next_state = traj.states.col(t + lambda);
      dataset.transitions.push_back(std::move(tr));
    }
  }
  return dataset;
}

const char* ObjectiveName(ObjectiveKind kind) {
  return kind == ObjectiveKind::kDropo ? "dropo" : "droid";
}

}  // namespace dropo
