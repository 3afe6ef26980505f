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

#include "dropo/sim.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "dropo/likelihood.h"

namespace dropo {
namespace {

void RequirePositive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << what << " must be positive, got " << value;
    throw InvalidArgument(os.str());
  }
}

void RequireNonNegative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << what << " must be non-negative, got " << value;
    throw InvalidArgument(os.str());
  }
}

ParameterSpace Space(std::vector<std::string> names,
                     std::initializer_list<double> lower,
                     std::initializer_list<double> upper) {
  const auto d = static_cast<Eigen::Index>(names.size());
  VectorXd lo(d), hi(d);
  std::copy(lower.begin(), lower.end(), lo.data());
  std::copy(upper.begin(), upper.end(), hi.data());
  return ParameterSpace::Make(std::move(names), lo, hi, VectorXd::Zero(d));
}

// velocity-projected Coulomb friction on one axis: the friction impulse
// opposes the would-be velocity and cannot reverse it
double FrictionAxis(double velocity, double force, double mass, double mu,
                    double dt) {
  const double free = velocity + dt * force / mass;
  const double impulse = dt * mu * kGravity;
  if (std::abs(free) <= impulse) return 0.0;
  const double next = free - std::copysign(impulse, free);
  return std::abs(next) < SlidingPuck2D::kDeadband ? 0.0 : next;
}

}  // namespace

Simulator::Simulator(double dt, ParameterSpace space)
    : dt_(dt), space_(std::move(space)) {
  RequirePositive(dt, "timestep");
}

void Simulator::set_param_space(ParameterSpace space) {
  if (space.names != space_.names) {
    throw InvalidArgument("parameter names do not match simulator '" + id() +
                          "'");
  }
  ResetSpace(std::move(space));
}

void Simulator::ResetSpace(ParameterSpace space) {
  space.Validate();
  space_ = std::move(space);
}

void Simulator::CheckDims(const VectorXd& state, const VectorXd& action,
                          const DynamicsSample& params) const {
  if (state.size() != state_dim() || action.size() != action_dim() ||
      params.values.size() != space_.dim()) {
    std::ostringstream os;
    os << id() << ": expected state " << state_dim() << ", action "
       << action_dim() << ", params " << space_.dim() << "; got "
       << state.size() << ", " << action.size() << ", " << params.values.size();
    throw InvalidArgument(os.str());
  }
}

MassSpringDamper::MassSpringDamper(double dt)
    : Simulator(dt,
                Space({"m", "k", "c"}, {0.25, 1.0, 0.05}, {4.0, 40.0, 2.0})) {}

VectorXd MassSpringDamper::Step(const VectorXd& state, const VectorXd& action,
                                const DynamicsSample& params) const {
  CheckDims(state, action, params);
  const double m = params.values[0];
  const double k = params.values[1];
  const double c = params.values[2];
  RequirePositive(m, "mass m");
  RequireNonNegative(k, "stiffness k");
  RequireNonNegative(c, "damping c");

  const double x = state[0];
  const double v = state[1];
  const double accel = (action[0] - k * x - c * v) / m;
  VectorXd next(2);
  next[1] = v + dt() * accel;
  next[0] = x + dt() * next[1];
  return next;
}

SlidingPuck2D::SlidingPuck2D(double dt)
    : Simulator(
          dt, Space({"m", "fx", "fy"}, {0.05, 0.01, 0.01}, {1.0, 0.5, 0.5})) {}

VectorXd SlidingPuck2D::Step(const VectorXd& state, const VectorXd& action,
                             const DynamicsSample& params) const {
  CheckDims(state, action, params);
  const double m = params.values[0];
  RequirePositive(m, "mass m");
  RequireNonNegative(params.values[1], "friction fx");
  RequireNonNegative(params.values[2], "friction fy");

  VectorXd next(4);
  for (int axis = 0; axis < 2; ++axis) {
    const double v =
        std::abs(state[2 + axis]) < kDeadband ? 0.0 : state[2 + axis];
    next[2 + axis] =
        FrictionAxis(v, action[axis], m, params.values[1 + axis], dt());
    next[axis] = state[axis] + dt() * next[2 + axis];
  }
  return next;
}

MassChain3::MassChain3(double dt)
    : Simulator(dt, Space({"m1", "m2", "m3", "k"}, {0.5, 0.5, 0.5, 5.0},
                          {4.0, 4.0, 4.0, 80.0})) {}

Eigen::Vector4d MassChain3::FullParameters(const DynamicsSample& params) const {
  Eigen::Vector4d full;
  if (!fixed_) {
    full = params.values;
    return full;
  }
  int src = 0;
  for (int i = 0; i < 4; ++i) {
    full[i] = (i == fixed_->index) ? fixed_->value : params.values[src++];
  }
  return full;
}

VectorXd MassChain3::Step(const VectorXd& state, const VectorXd& action,
                          const DynamicsSample& params) const {
  CheckDims(state, action, params);
  const Eigen::Vector4d p = FullParameters(params);
  RequirePositive(p[0], "mass m1");
  RequirePositive(p[1], "mass m2");
  RequirePositive(p[2], "mass m3");
  RequireNonNegative(p[3], "stiffness k");

  const double k = p[3];
  const double x1 = state[0], x2 = state[1], x3 = state[2];
  Eigen::Vector3d accel;
  accel[0] = (action[0] - k * x1 - k * (x1 - x2)) / p[0];
  accel[1] = (k * (x1 - x2) - k * (x2 - x3)) / p[1];
  accel[2] = (k * (x2 - x3)) / p[2];

  VectorXd next(6);
  next.tail<3>() = state.tail<3>() + dt() * accel;
  next.head<3>() = state.head<3>() + dt() * next.tail<3>();
  return next;
}

MassChain3 InjectMisspecification(const MassChain3& sim, int index,
                                  double wrong_value) {
  if (sim.fixed_) throw InvalidArgument("mass chain already has a fixed mass");
  if (index < 0 || index > 2) {
    std::ostringstream os;
    os << "misspecified mass index " << index << " out of range [0, 2]";
    throw InvalidArgument(os.str());
  }
  RequirePositive(wrong_value, "frozen mass");

  const ParameterSpace& full = sim.param_space();
  ParameterSpace reduced;
  reduced.std_min = full.std_min;
  const Eigen::Index d = full.dim() - 1;
  reduced.lower.resize(d);
  reduced.upper.resize(d);
  reduced.validity_lower.resize(d);
  reduced.std_max.resize(d);
  Eigen::Index dst = 0;
  for (Eigen::Index i = 0; i < full.dim(); ++i) {
    if (i == index) continue;
    reduced.names.push_back(full.names[i]);
    reduced.lower[dst] = full.lower[i];
    reduced.upper[dst] = full.upper[i];
    reduced.validity_lower[dst] = full.validity_lower[i];
    reduced.std_max[dst] = full.std_max[i];
    ++dst;
  }
  reduced.Validate();

  MassChain3 out(sim.dt());
  out.fixed_ = MassChain3::FixedMass{index, wrong_value};
  // names differ from the built-in set, bypass set_param_space
  out.ResetSpace(std::move(reduced));
  return out;
}

std::unique_ptr<Simulator> MakeSimulator(const std::string& id, double dt) {
  if (id == "mass_spring_damper") return std::make_unique<MassSpringDamper>(dt);
  if (id == "sliding_puck") return std::make_unique<SlidingPuck2D>(dt);
  if (id == "mass_chain3") return std::make_unique<MassChain3>(dt);
  throw InvalidArgument("unknown simulator id '" + id +
                        "' (expected mass_spring_damper, sliding_puck or "
                        "mass_chain3)");
}

VectorXd Replay(const Simulator& sim, const VectorXd& state,
                const Eigen::Ref<const MatrixXd>& actions,
                const DynamicsSample& params) {
  if (actions.cols() < 1) throw InvalidArgument("replay needs >= 1 action");
  VectorXd current = state;
  for (Eigen::Index t = 0; t < actions.cols(); ++t) {
    current = sim.Step(current, actions.col(t), params);
  }
  return current;
}

MatrixXd MakeExcitation(const Simulator& sim, ExcitationKind kind,
                        double amplitude, int steps, Rng& rng) {
  if (kind == ExcitationKind::kAuto) {
    kind = sim.id() == "sliding_puck" ? ExcitationKind::kPulses
                                      : ExcitationKind::kChirp;
  }
  if (amplitude <= 0.0) amplitude = sim.id() == "sliding_puck" ? 2.0 : 10.0;

  const int m = sim.action_dim();
  MatrixXd actions = MatrixXd::Zero(m, steps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  if (kind == ExcitationKind::kChirp) {
    const double duration = steps * sim.dt();
    for (int a = 0; a < m; ++a) {
      const double peak = amplitude * (0.7 + 0.3 * unit(rng));
      const double f0 = 0.2 + 0.4 * unit(rng);
      const double f1 = 2.0 + 2.0 * unit(rng);
      const double phase = 2.0 * std::numbers::pi * unit(rng);
      for (int t = 0; t < steps; ++t) {
        const double time = t * sim.dt();
        const double cycles =
            f0 * time + 0.5 * (f1 - f0) * time * time / duration;
        actions(a, t) =
            peak * std::sin(phase + 2.0 * std::numbers::pi * cycles);
      }
    }
    return actions;
  }

  std::uniform_int_distribution<int> duration(10, 40);
  int t = 0;
  while (t < steps) {
    const int len = std::min(duration(rng), steps - t);
    const bool coast = unit(rng) < 0.4;
    for (int a = 0; a < m; ++a) {
      const double force = coast ? 0.0 : amplitude * (2.0 * unit(rng) - 1.0);
      actions.block(a, t, 1, len).setConstant(force);
    }
    t += len;
  }
  return actions;
}

void DataGenConfig::Validate(const Simulator& sim) const {
  const int d = sim.param_space().dim();
  if (const auto* fixed = std::get_if<DynamicsSample>(&ground_truth)) {
    if (fixed->values.size() != d) {
      throw InvalidArgument("ground truth has wrong parameter dimension");
    }
  } else {
    const auto& phi = std::get<DynamicsDistribution>(ground_truth);
    if (phi.mean.size() != d || phi.std.size() != d) {
      throw InvalidArgument("ground-truth distribution has wrong dimension");
    }
    if ((phi.std.array() < 0.0).any()) {
      throw InvalidArgument("ground-truth std must be non-negative");
    }
  }
  if (resample_every < 0) throw InvalidArgument("resample_every must be >= 0");
  if (noise_std.size() != 0 && noise_std.size() != 1 &&
      noise_std.size() != sim.state_dim()) {
    throw InvalidArgument("noise_std needs 1 or state_dim entries");
  }
  if ((noise_std.array() < 0.0).any()) {
    throw InvalidArgument("noise_std must be non-negative");
  }
  if (transitions < 1) throw InvalidArgument("transitions must be >= 1");
  if (trajectories < 1) throw InvalidArgument("trajectories must be >= 1");
  if (initial_state.size() != 0 && initial_state.size() != sim.state_dim()) {
    throw InvalidArgument("initial_state has wrong dimension");
  }
}

GeneratedData GenerateDataset(const Simulator& sim, const DataGenConfig& cfg) {
  cfg.Validate(sim);
  const int n = sim.state_dim();
  const int steps = cfg.transitions;

  VectorXd noise_std = VectorXd::Zero(n);
  if (cfg.noise_std.size() == 1) noise_std.setConstant(cfg.noise_std[0]);
  if (cfg.noise_std.size() == n) noise_std = cfg.noise_std;
  const VectorXd start =
      cfg.initial_state.size() == n ? cfg.initial_state : VectorXd::Zero(n);

  const auto* fixed = std::get_if<DynamicsSample>(&cfg.ground_truth);
  const auto* dist = std::get_if<DynamicsDistribution>(&cfg.ground_truth);

  GeneratedData out;
  for (int j = 0; j < cfg.trajectories; ++j) {
    Rng policy_rng = MakeRng(cfg.seed, Stream::kPolicy, j);
    Rng truth_rng = MakeRng(cfg.seed, Stream::kGroundTruth, j);
    Rng noise_rng = MakeRng(cfg.seed, Stream::kNoise, j);

    Trajectory clean;
    clean.actions =
        MakeExcitation(sim, cfg.excitation, cfg.amplitude, steps, policy_rng);
    clean.states.resize(n, steps + 1);
    clean.times.resize(steps + 1);
    for (int t = 0; t <= steps; ++t) clean.times[t] = t * sim.dt();
    clean.states.col(0) = start;

    DynamicsSample xi;
    for (int t = 0; t < steps; ++t) {
      const bool redraw = t == 0 || (dist && cfg.resample_every > 0 &&
                                     t % cfg.resample_every == 0);
      if (redraw) {
        xi = fixed ? *fixed : SampleDynamics(*dist, 1, truth_rng).front();
        out.draws.push_back({j, t, xi.values});
      }
      clean.states.col(t + 1) =
          sim.Step(clean.states.col(t), clean.actions.col(t), xi);
    }

    Trajectory noisy = clean;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t <= steps; ++t) {
      for (int i = 0; i < n; ++i) {
        const double e = gauss(noise_rng);
        if (noise_std[i] > 0.0) noisy.states(i, t) += noise_std[i] * e;
      }
    }
    out.trajectories.push_back(std::move(noisy));
    out.clean.push_back(std::move(clean));
  }
  return out;
}

}  // namespace dropo
