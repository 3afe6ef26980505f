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

#ifndef DROPO_PREPROCESS_H_
#define DROPO_PREPROCESS_H_

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dropo/akima.h"
#include "dropo/core.h"

namespace dropo {

enum class ChannelRole {
  kPosition,    // interpolated into the state; may also yield a velocity
  kVelocity,    // measured velocity, interpolated into the velocity block
  kQuaternion,  // (w, x, y, z) orientation, renormalized after interpolation
  kAction,      // zero-order hold onto the grid
};

ChannelRole ParseChannelRole(const std::string& name);
const char* ChannelRoleName(ChannelRole role);

// one sensor stream with its own clock. values holds one sample per column.
// the time offset is kept separate from the raw stamps so that shifting by
// o and then by -o restores the original stamps exactly.
struct SensorChannel {
  std::string name;
  ChannelRole role = ChannelRole::kPosition;
  bool derive_velocity = false;  // position channels only
  VectorXd raw_times;
  MatrixXd values;
  double time_offset = 0.0;

  VectorXd times() const { return raw_times.array() + time_offset; }
};

struct SensorLog {
  std::vector<SensorChannel> channels;

  const SensorChannel& channel(const std::string& name) const;
  // per-channel stamps strictly increasing, quaternions unit within 1e-6
  void Validate() const;
};

// shifts each named channel's clock; unnamed channels are untouched
SensorLog Synchronize(const SensorLog& log,
                      const std::map<std::string, double>& offsets);

// uniform grid over the common window of all channels. the state is laid out
// as [position channels] [quaternion channels] [velocities of position
// channels flagged derive_velocity] [velocity channels], each group in
// channel order. actions are zero-order held.
Trajectory ResampleToTimestep(const SensorLog& log, double dt);

// heuristic: the shift of `moving` (added to its stamps) that maximizes the
// normalized cross-correlation of both channels' first components over
// [-max_shift, max_shift] in steps of `resolution`
double EstimateOffset(const SensorChannel& reference,
                      const SensorChannel& moving, double max_shift,
                      double resolution);

// rotation angle between two unit quaternions (w, x, y, z), in [0, pi];
// q and -q describe the same rotation
double QuaternionAngleResidual(const Eigen::Vector4d& q_real,
                               const Eigen::Vector4d& q_sim);

// duplicates every replayed sample (one per column), once with +alpha and
// once with -alpha in each listed orientation slot; the copies are adjacent
MatrixXd SymmetrizeOrientationSamples(const Eigen::Ref<const MatrixXd>& samples,
                                      std::span<const int> slots);

}  // namespace dropo

#endif  // DROPO_PREPROCESS_H_
