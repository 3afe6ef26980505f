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

#include "dropo/io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace dropo {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool Blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

bool Comment(std::string_view line) {
  const std::size_t i = line.find_first_not_of(" \t");
  return i != std::string_view::npos && line[i] == '#';
}

[[noreturn]] void RowError(const std::string& source, int line,
                           const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  throw IoError(os.str());
}

double ParseNumber(std::string_view field, const std::string& source, int line,
                   int column) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end ||
      !std::isfinite(value)) {
    std::ostringstream os;
    os << "column " << column + 1 << ": expected a finite number, got '"
       << field << "'";
    RowError(source, line, os.str());
  }
  return value;
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw IoError("could not format number");
  return std::string(buffer, ptr);
}

void WriteTrajectory(std::ostream& out, const Trajectory& trajectory) {
  trajectory.Validate();
  const int n = trajectory.state_dim();
  const int m = trajectory.action_dim();
  out << "t";
  for (int i = 0; i < n; ++i) out << ",s_" << i;
  for (int i = 0; i < m; ++i) out << ",a_" << i;
  out << "\n";
  const int steps = static_cast<int>(trajectory.states.cols());
  for (int t = 0; t < steps; ++t) {
    out << FormatDouble(trajectory.times[t]);
    for (int i = 0; i < n; ++i)
      out << ',' << FormatDouble(trajectory.states(i, t));
    for (int i = 0; i < m; ++i) {
      out << ',';
      if (t < trajectory.length())
        out << FormatDouble(trajectory.actions(i, t));
    }
    out << "\n";
  }
}

Trajectory ReadTrajectory(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  int n = -1, m = -1;
  std::vector<double> times;
  std::vector<std::vector<double>> states, actions;
  bool ended = false;  // saw the row with empty actions
  while (std::getline(in, line)) {
    ++line_no;
    if (Blank(line) || Comment(line)) continue;
    const auto fields = SplitFields(line);
    if (n < 0) {
      if (fields.empty() || fields[0] != "t") {
        RowError(source, line_no, "header must start with 't'");
      }
      n = m = 0;
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const std::string expect_s = "s_" + std::to_string(n);
        const std::string expect_a = "a_" + std::to_string(m);
        if (m == 0 && fields[c] == expect_s) {
          ++n;
        } else if (fields[c] == expect_a) {
          ++m;
        } else {
          RowError(source, line_no,
                   "unexpected column '" + std::string(fields[c]) + "'");
        }
      }
      if (n == 0) RowError(source, line_no, "no state columns");
      continue;
    }
    if (ended)
      RowError(source, line_no, "row after the final (action-less) row");
    if (static_cast<int>(fields.size()) != 1 + n + m) {
      std::ostringstream os;
      os << "expected " << 1 + n + m << " fields, got " << fields.size();
      RowError(source, line_no, os.str());
    }
    const double t = ParseNumber(fields[0], source, line_no, 0);
    if (!times.empty() && !(t > times.back())) {
      RowError(source, line_no, "time not strictly increasing");
    }
    times.push_back(t);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i)
      s[i] = ParseNumber(fields[1 + i], source, line_no, 1 + i);
    states.push_back(std::move(s));
    bool empty_actions = m > 0;
    for (int i = 0; i < m; ++i)
      empty_actions = empty_actions && fields[1 + n + i].empty();
    if (m > 0 && empty_actions) {
      ended = true;
      continue;
    }
    std::vector<double> a(m);
    for (int i = 0; i < m; ++i) {
      a[i] = ParseNumber(fields[1 + n + i], source, line_no, 1 + n + i);
    }
    actions.push_back(std::move(a));
  }
  if (n < 0) throw IoError(source + ": missing header");
  if (m > 0 && !ended)
    throw IoError(source + ": final row must have empty action fields");
  if (states.size() < 2) throw IoError(source + ": need at least two rows");
  if (m == 0)
    actions.pop_back();  // no action columns: every row but the last is a step

  Trajectory traj;
  const auto rows = static_cast<Eigen::Index>(states.size());
  traj.times = Eigen::Map<const VectorXd>(times.data(), rows);
  traj.states.resize(n, rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (int i = 0; i < n; ++i) traj.states(i, t) = states[t][i];
  }
  traj.actions.resize(m, rows - 1);
  for (Eigen::Index t = 0; t + 1 < rows; ++t) {
    for (int i = 0; i < m; ++i) traj.actions(i, t) = actions[t][i];
  }
  return traj;
}

void SaveTrajectory(const std::string& path, const Trajectory& trajectory) {
  std::ostringstream os;
  WriteTrajectory(os, trajectory);
  WriteTextFile(path, os.str());
}

Trajectory LoadTrajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  return ReadTrajectory(in, path);
}

std::vector<std::string> TrajectoryFileNames(const std::string& path,
                                             int count) {
  if (count == 1) return {path};
  const std::filesystem::path p(path);
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) {
    std::filesystem::path q = p;
    q.replace_filename(p.stem().string() + "." + std::to_string(i) +
                       p.extension().string());
    names.push_back(q.string());
  }
  return names;
}

std::string SiblingPath(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_filename(p.stem().string() + "." + suffix);
  return p.string();
}

SensorLog ReadSensorLog(std::istream& in, const std::vector<ChannelSpec>& specs,
                        const std::string& source) {
  std::map<std::string, int> index;
  for (const auto& spec : specs) {
    if (!index.emplace(spec.name, static_cast<int>(index.size())).second) {
      throw IoError("channel '" + spec.name + "' declared twice");
    }
  }
  std::vector<std::vector<double>> times(specs.size());
  std::vector<std::vector<std::vector<double>>> values(specs.size());

  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (Blank(line) || Comment(line)) continue;
    const auto fields = SplitFields(line);
    if (first && fields[0] == "channel") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 3)
      RowError(source, line_no, "expected channel,t,value...");
    auto it = index.find(std::string(fields[0]));
    if (it == index.end()) {
      RowError(source, line_no,
               "channel '" + std::string(fields[0]) +
                   "' is not declared in the config");
    }
    const int c = it->second;
    const double t = ParseNumber(fields[1], source, line_no, 1);
    std::vector<double> v;
    for (std::size_t k = 2; k < fields.size(); ++k) {
      v.push_back(ParseNumber(fields[k], source, line_no, static_cast<int>(k)));
    }
    if (!values[c].empty() && v.size() != values[c].front().size()) {
      RowError(
          source, line_no,
          "value count differs from earlier rows of '" + specs[c].name + "'");
    }
    times[c].push_back(t);
    values[c].push_back(std::move(v));
  }

  SensorLog log;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (times[c].empty()) {
      throw IoError(source + ": declared channel '" + specs[c].name +
                    "' has no samples");
    }
    SensorChannel channel;
    channel.name = specs[c].name;
    channel.role = specs[c].role;
    channel.derive_velocity = specs[c].derive_velocity;
    const auto count = static_cast<Eigen::Index>(times[c].size());
    channel.raw_times = Eigen::Map<const VectorXd>(times[c].data(), count);
    const auto dim = static_cast<Eigen::Index>(values[c].front().size());
    channel.values.resize(dim, count);
    for (Eigen::Index k = 0; k < count; ++k) {
      for (Eigen::Index r = 0; r < dim; ++r)
        channel.values(r, k) = values[c][k][r];
    }
    log.channels.push_back(std::move(channel));
  }
  try {
    log.Validate();
  } catch (const InvalidArgument& e) {
    throw IoError(source + ": " + e.what());
  }
  return log;
}

SensorLog LoadSensorLog(const std::string& path,
                        const std::vector<ChannelSpec>& specs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raw log '" + path + "'");
  return ReadSensorLog(in, specs, path);
}

void WriteTrace(std::ostream& out, const FitResult& result) {
  out << "generation,"
      << (result.kind == ObjectiveKind::kDropo ? "best_log_likelihood"
                                               : "best_l2")
      << ",mse\n";
  for (std::size_t g = 0; g < result.objective_trace.size(); ++g) {
    const double value = result.kind == ObjectiveKind::kDropo
                             ? -result.objective_trace[g]
                             : result.objective_trace[g];
    out << g << ',' << FormatDouble(value) << ','
        << FormatDouble(result.mse_trace[g]) << "\n";
  }
}

void WriteSweep(std::ostream& out, const std::vector<EpsilonSweepRow>& table) {
  out << "epsilon,total_variance,mse\n";
  for (const auto& row : table) {
    out << FormatDouble(row.epsilon) << ',' << FormatDouble(row.total_variance)
        << ',' << FormatDouble(row.mse) << "\n";
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace dropo
