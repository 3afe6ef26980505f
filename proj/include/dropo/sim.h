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

#ifndef DROPO_SIM_H_
#define DROPO_SIM_H_

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dropo/core.h"
#include "dropo/random.h"

namespace dropo {

inline constexpr double kDefaultTimestep = 0.01;
inline constexpr double kGravity = 9.81;

// deterministic, parameterized forward model whose state can be set exactly.
// implementations are immutable value objects and safe to share across
// threads.
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual std::string id() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;

  // one integration step of length dt(); throws InvalidArgument on invalid
  // params or dimension mismatch
  virtual VectorXd Step(const VectorXd& state, const VectorXd& action,
                        const DynamicsSample& params) const = 0;

  virtual std::unique_ptr<Simulator> Clone() const = 0;

  double dt() const { return dt_; }
  const ParameterSpace& param_space() const { return space_; }

  // replaces search bounds; names must match the built-in ones
  void set_param_space(ParameterSpace space);

 protected:
  Simulator(double dt, ParameterSpace space);
  Simulator(const Simulator&) = default;
  Simulator& operator=(const Simulator&) = default;

  void ResetSpace(ParameterSpace space);

  void CheckDims(const VectorXd& state, const VectorXd& action,
                 const DynamicsSample& params) const;

 private:
  double dt_;
  ParameterSpace space_;
};

// x'' = (F - k x - c x') / m
class MassSpringDamper final : public Simulator {
 public:
  explicit MassSpringDamper(double dt = kDefaultTimestep);

  std::string id() const override { return "mass_spring_damper"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  VectorXd Step(const VectorXd& state, const VectorXd& action,
                const DynamicsSample& params) const override;
  std::unique_ptr<Simulator> Clone() const override {
    return std::make_unique<MassSpringDamper>(*this);
  }
};

// planar puck with anisotropic Coulomb friction, state (x, y, vx, vy)
class SlidingPuck2D final : public Simulator {
 public:
  static constexpr double kDeadband = 1.0e-6;

  explicit SlidingPuck2D(double dt = kDefaultTimestep);

  std::string id() const override { return "sliding_puck"; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  VectorXd Step(const VectorXd& state, const VectorXd& action,
                const DynamicsSample& params) const override;
  std::unique_ptr<Simulator> Clone() const override {
    return std::make_unique<SlidingPuck2D>(*this);
  }
};

// three masses on a line joined by springs of stiffness k, the first one
// anchored to a wall by the same spring; force acts on mass 1.
// state (x1, x2, x3, v1, v2, v3)
class MassChain3 final : public Simulator {
 public:
  struct FixedMass {
    int index;     // 0, 1 or 2
    double value;  // frozen mass, kg
  };

  explicit MassChain3(double dt = kDefaultTimestep);

  std::string id() const override { return "mass_chain3"; }
  int state_dim() const override { return 6; }
  int action_dim() const override { return 1; }
  VectorXd Step(const VectorXd& state, const VectorXd& action,
                const DynamicsSample& params) const override;
  std::unique_ptr<Simulator> Clone() const override {
    return std::make_unique<MassChain3>(*this);
  }

  const std::optional<FixedMass>& fixed_mass() const { return fixed_; }

  // full (m1, m2, m3, k) vector from the optimizable parameters
  Eigen::Vector4d FullParameters(const DynamicsSample& params) const;

 private:
  friend MassChain3 InjectMisspecification(const MassChain3& sim, int index,
                                           double wrong_value);
  std::optional<FixedMass> fixed_;
};

// freezes mass `index` at `wrong_value` and drops it from the search space
MassChain3 InjectMisspecification(const MassChain3& sim, int index,
                                  double wrong_value);

// builds a built-in simulator from its id
std::unique_ptr<Simulator> MakeSimulator(const std::string& id,
                                         double dt = kDefaultTimestep);

// lambda-fold composition of Step starting exactly from `state`; actions
// holds one action per column
VectorXd Replay(const Simulator& sim, const VectorXd& state,
                const Eigen::Ref<const MatrixXd>& actions,
                const DynamicsSample& params);

enum class ExcitationKind {
  kAuto,    // chirp for force-driven chains, pulses for the puck
  kChirp,   // swept-frequency sinusoid on every action channel
  kPulses,  // seeded piecewise-constant pulses with coasting gaps
};

struct DataGenConfig {
  // either one fixed parameter vector or a distribution to draw from
  std::variant<DynamicsSample, DynamicsDistribution> ground_truth;
  int resample_every = 0;  // redraw every N transitions, 0 = never
  ExcitationKind excitation = ExcitationKind::kAuto;
  double amplitude = 0.0;  // peak force, 0 picks a simulator default
  VectorXd noise_std;      // per state dimension; size 1 broadcasts
  int transitions = 200;   // per trajectory
  int trajectories = 1;
  VectorXd initial_state;  // empty = zeros
  std::uint64_t seed = 0;

  void Validate(const Simulator& sim) const;
};

struct GroundTruthDraw {
  int trajectory = 0;
  int start = 0;  // first transition that uses this draw
  VectorXd values;
};

struct GeneratedData {
  std::vector<Trajectory> trajectories;  // noisy recordings
  std::vector<Trajectory> clean;         // noise-free states, same actions
  std::vector<GroundTruthDraw> draws;
};

GeneratedData GenerateDataset(const Simulator& sim, const DataGenConfig& cfg);

// scripted excitation, one action per column
MatrixXd MakeExcitation(const Simulator& sim, ExcitationKind kind,
                        double amplitude, int steps, Rng& rng);

}  // namespace dropo

#endif  // DROPO_SIM_H_
