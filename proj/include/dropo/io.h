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

#ifndef DROPO_IO_H_
#define DROPO_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "dropo/core.h"
#include "dropo/fit.h"
#include "dropo/preprocess.h"

namespace dropo {

// unreadable or unwritable files, malformed file contents
class IoError : public Error {
 public:
  using Error::Error;
};

// shortest decimal text that parses back to the same double
std::string FormatDouble(double value);

// columnar text: a header `t,s_0,..,s_{n-1},a_0,..,a_{m-1}`, one row per
// timestep, empty action fields on the final row, '#' starts a comment line
void WriteTrajectory(std::ostream& out, const Trajectory& trajectory);
Trajectory ReadTrajectory(std::istream& in,
                          const std::string& source = "<stream>");

void SaveTrajectory(const std::string& path, const Trajectory& trajectory);
Trajectory LoadTrajectory(const std::string& path);

// `path` itself for a single trajectory, otherwise `stem.i.ext`
std::vector<std::string> TrajectoryFileNames(const std::string& path,
                                             int count);

// `stem.suffix` next to `path`, replacing its extension
std::string SiblingPath(const std::string& path, const std::string& suffix);

struct ChannelSpec {
  std::string name;
  ChannelRole role = ChannelRole::kPosition;
  bool derive_velocity = false;
};

// long format, one sample per line: `channel,t,v_0,..,v_{k-1}`. an optional
// header line starting with `channel` and '#' comments are skipped. every
// logged channel must be declared and every declared channel logged.
SensorLog ReadSensorLog(std::istream& in, const std::vector<ChannelSpec>& specs,
                        const std::string& source = "<stream>");
SensorLog LoadSensorLog(const std::string& path,
                        const std::vector<ChannelSpec>& specs);

// `generation,best_log_likelihood,mse` for DROPO, `generation,best_l2,mse`
// for the baseline
void WriteTrace(std::ostream& out, const FitResult& result);

// `epsilon,total_variance,mse`
void WriteSweep(std::ostream& out, const std::vector<EpsilonSweepRow>& table);

// writes text atomically enough for our purposes: whole file or IoError
void WriteTextFile(const std::string& path, const std::string& text);
std::string ReadTextFile(const std::string& path);

}  // namespace dropo

#endif  // DROPO_IO_H_
