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

#include "dropo/preprocess.h"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dropo {
namespace {

constexpr double kUnitTolerance = 1.0e-6;

Eigen::Quaterniond CheckedUnit(const Eigen::Vector4d& q, const char* what) {
  const double norm = q.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw InvalidArgument(std::string(what) + " quaternion has zero norm");
  }
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    std::ostringstream os;
    os << what << " quaternion is not unit (norm " << norm << ")";
    throw InvalidArgument(os.str());
  }
  return Eigen::Quaterniond(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
}

using Spline = AkimaSpline<double>;

std::vector<Spline> FitComponents(const SensorChannel& channel) {
  const VectorXd t = channel.times();
  std::vector<Spline> splines;
  for (Eigen::Index r = 0; r < channel.values.rows(); ++r) {
    splines.push_back(Spline::Fit(t, channel.values.row(r).transpose()));
  }
  return splines;
}

}  // namespace

ChannelRole ParseChannelRole(const std::string& name) {
  if (name == "position") return ChannelRole::kPosition;
  if (name == "velocity") return ChannelRole::kVelocity;
  if (name == "quaternion") return ChannelRole::kQuaternion;
  if (name == "action") return ChannelRole::kAction;
  throw InvalidArgument("unknown channel role '" + name +
                        "' (expected position, velocity, quaternion, action)");
}

const char* ChannelRoleName(ChannelRole role) {
  switch (role) {
    case ChannelRole::kPosition:
      return "position";
    case ChannelRole::kVelocity:
      return "velocity";
    case ChannelRole::kQuaternion:
      return "quaternion";
    case ChannelRole::kAction:
      return "action";
  }
  return "?";
}

const SensorChannel& SensorLog::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("no channel named '" + name + "'");
}

void SensorLog::Validate() const {
  if (channels.empty()) throw InvalidArgument("sensor log has no channels");
  for (const auto& c : channels) {
    if (c.raw_times.size() == 0 || c.raw_times.size() != c.values.cols()) {
      throw InvalidArgument("channel '" + c.name +
                            "': one value column per timestamp required");
    }
    for (Eigen::Index i = 1; i < c.raw_times.size(); ++i) {
      if (!(c.raw_times[i] > c.raw_times[i - 1])) {
        std::ostringstream os;
        os << "channel '" << c.name
           << "': timestamps not strictly increasing at sample " << i;
        throw InvalidArgument(os.str());
      }
    }
    if (c.role == ChannelRole::kQuaternion) {
      if (c.values.rows() != 4) {
        throw InvalidArgument("channel '" + c.name +
                              "': quaternions need 4 values");
      }
      for (Eigen::Index i = 0; i < c.values.cols(); ++i) {
        if (std::abs(c.values.col(i).norm() - 1.0) > kUnitTolerance) {
          std::ostringstream os;
          os << "channel '" << c.name << "': quaternion sample " << i
             << " is not unit norm";
          throw InvalidArgument(os.str());
        }
      }
    }
    if (c.derive_velocity && c.role != ChannelRole::kPosition) {
      throw InvalidArgument("channel '" + c.name +
                            "': only position channels can derive velocity");
    }
  }
}

SensorLog Synchronize(const SensorLog& log,
                      const std::map<std::string, double>& offsets) {
  SensorLog out = log;
  for (const auto& [name, offset] : offsets) {
    if (!std::isfinite(offset)) {
      throw InvalidArgument("offset for '" + name + "' is not finite");
    }
    auto it =
        std::find_if(out.channels.begin(), out.channels.end(),
                     [&](const SensorChannel& c) { return c.name == name; });
    if (it == out.channels.end()) {
      throw InvalidArgument("offset given for unknown channel '" + name + "'");
    }
    it->time_offset += offset;
  }
  return out;
}

Trajectory ResampleToTimestep(const SensorLog& log, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("resample timestep must be positive");
  log.Validate();

  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
  for (const auto& c : log.channels) {
    const VectorXd t = c.times();
    start = std::max(start, t[0]);
    end = std::min(end, t[t.size() - 1]);
  }
  if (!(end > start)) {
    std::ostringstream os;
    os << "no common window: channels overlap on [" << start << ", " << end
       << "]";
    throw InvalidArgument(os.str());
  }
  const auto count =
      static_cast<Eigen::Index>(std::floor((end - start) / dt + 1e-9)) + 1;
  if (count < 3) {
    std::ostringstream os;
    os << "no common window: overlap " << end - start
       << " s is shorter than two timesteps of " << dt << " s";
    throw InvalidArgument(os.str());
  }
  VectorXd grid(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    grid[k] = std::min(start + static_cast<double>(k) * dt, end);
  }

  std::vector<VectorXd> positions, quaternions, velocities, measured, actions;
  for (const auto& c : log.channels) {
    if (c.role == ChannelRole::kAction) {
      const VectorXd t = c.times();
      MatrixXd held(c.values.rows(), count - 1);
      for (Eigen::Index k = 0; k + 1 < count; ++k) {
        const auto idx =
            std::upper_bound(t.data(), t.data() + t.size(), grid[k]) - t.data();
        held.col(k) = c.values.col(std::max<Eigen::Index>(idx - 1, 0));
      }
      for (Eigen::Index r = 0; r < held.rows(); ++r)
        actions.push_back(held.row(r));
      continue;
    }
    const auto splines = FitComponents(c);
    if (c.role == ChannelRole::kQuaternion) {
      MatrixXd q(4, count);
      for (Eigen::Index k = 0; k < count; ++k) {
        for (int r = 0; r < 4; ++r) q(r, k) = splines[r](grid[k]);
        q.col(k).normalize();
      }
      for (int r = 0; r < 4; ++r) quaternions.push_back(q.row(r));
      continue;
    }
    for (const auto& s : splines) {
      VectorXd value(count);
      for (Eigen::Index k = 0; k < count; ++k) value[k] = s(grid[k]);
      if (c.role == ChannelRole::kVelocity) {
        measured.push_back(value);
        continue;
      }
      positions.push_back(value);
      if (c.derive_velocity) {
        VectorXd rate(count);
        for (Eigen::Index k = 0; k < count; ++k)
          rate[k] = s.Derivative(grid[k]);
        velocities.push_back(rate);
      }
    }
  }

  std::vector<VectorXd> rows;
  for (auto* group : {&positions, &quaternions, &velocities, &measured}) {
    rows.insert(rows.end(), group->begin(), group->end());
  }
  if (rows.empty()) throw InvalidArgument("sensor log has no state channels");

  Trajectory traj;
  traj.times = grid;
  traj.states.resize(static_cast<Eigen::Index>(rows.size()), count);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    traj.states.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  traj.actions.resize(static_cast<Eigen::Index>(actions.size()), count - 1);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    traj.actions.row(static_cast<Eigen::Index>(r)) = actions[r].transpose();
  }
  return traj;
}

double EstimateOffset(const SensorChannel& reference,
                      const SensorChannel& moving, double max_shift,
                      double resolution) {
  if (!(max_shift >= 0.0) || !(resolution > 0.0)) {
    throw InvalidArgument("offset search needs max_shift >= 0, resolution > 0");
  }
  const Spline ref = FitComponents(reference).front();
  const VectorXd mov_t = moving.times();
  const Spline mov = Spline::Fit(mov_t, moving.values.row(0).transpose());

  constexpr int kSamples = 256;
  double best_shift = 0.0;
  double best_corr = -std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::floor(max_shift / resolution + 1e-9));
  for (int s = -steps; s <= steps; ++s) {
    const double shift = s * resolution;
    const double lo = std::max(ref.x_min(), mov.x_min() + shift);
    const double hi = std::min(ref.x_max(), mov.x_max() + shift);
    if (!(hi > lo)) continue;
    VectorXd a(kSamples), b(kSamples);
    for (int k = 0; k < kSamples; ++k) {
      const double t = lo + (hi - lo) * k / (kSamples - 1);
      a[k] = ref(t);
      b[k] = mov(std::clamp(t - shift, mov.x_min(), mov.x_max()));
    }
    a.array() -= a.mean();
    b.array() -= b.mean();
    const double denom = a.norm() * b.norm();
    if (denom == 0.0) continue;
    const double corr = a.dot(b) / denom;
    if (corr > best_corr) {
      best_corr = corr;
      best_shift = shift;
    }
  }
  return best_shift;
}

double QuaternionAngleResidual(const Eigen::Vector4d& q_real,
                               const Eigen::Vector4d& q_sim) {
  const Eigen::Quaterniond a = CheckedUnit(q_real, "real");
  const Eigen::Quaterniond b = CheckedUnit(q_sim, "simulated");
  // 2 acos(|<a, b>|), evaluated through atan2 for accuracy near zero
  const Eigen::Quaterniond rel = a.conjugate() * b;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

MatrixXd SymmetrizeOrientationSamples(const Eigen::Ref<const MatrixXd>& samples,
                                      std::span<const int> slots) {
  for (int slot : slots) {
    if (slot < 0 || slot >= samples.rows()) {
      throw InvalidArgument("orientation slot outside the state vector");
    }
  }
  MatrixXd out(samples.rows(), 2 * samples.cols());
  for (Eigen::Index k = 0; k < samples.cols(); ++k) {
    out.col(2 * k) = samples.col(k);
    out.col(2 * k + 1) = samples.col(k);
    for (int slot : slots) out(slot, 2 * k + 1) = -samples(slot, k);
  }
  return out;
}

}  // namespace dropo
