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

#include "dropo/cli.h"

#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dropo/config.h"
#include "dropo/fit.h"
#include "dropo/io.h"
#include "dropo/likelihood.h"
#include "dropo/preprocess.h"
#include "dropo/sim.h"
#include "json.hpp"

namespace dropo {
namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> data;
  std::string raw;
  std::string params;
  std::string breakdown;
  std::string objective;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int workers = 1;
};

Json VectorJson(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json Header(const std::string& command) {
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  return j;
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

RunConfig LoadConfig(const Options& opt) {
  RunConfig config = LoadRunConfig(opt.config);
  if (opt.has_seed) {
    config.likelihood.seed = opt.seed;
    if (config.generation) config.generation->seed = opt.seed;
  }
  return config;
}

TransitionDataset LoadDataset(const Options& opt, const RunConfig& config,
                              const Simulator& sim) {
  std::vector<Trajectory> trajectories;
  for (const auto& path : opt.data)
    trajectories.push_back(LoadTrajectory(path));
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    if (t.state_dim() != sim.state_dim() ||
        t.action_dim() != sim.action_dim()) {
      std::ostringstream os;
      os << opt.data[i] << ": dimension mismatch, file has " << t.state_dim()
         << " state and " << t.action_dim() << " action columns, simulator '"
         << sim.id() << "' expects " << sim.state_dim() << " and "
         << sim.action_dim();
      throw InvalidArgument(os.str());
    }
  }
  return ExtractTransitions(std::span<const Trajectory>(trajectories),
                            config.likelihood.lambda);
}

Json FitJson(const FitResult& fit) {
  Json j;
  j["objective"] = ObjectiveName(fit.kind);
  j["seed"] = fit.seed;
  j["epsilon"] = VectorJson(fit.epsilon);
  j["mse"] = fit.mse;
  j["mse_per_transition"] = fit.mse_per_transition;
  j["evaluations"] = fit.evaluations;
  j["generations"] = fit.generations;
  j["stop_reason"] = fit.stop_reason;
  Json params = Json::array();
  const auto& phi = fit.phi_star;
  for (int i = 0; i < phi.dim(); ++i) {
    Json p;
    p["name"] = phi.space.names[i];
    p["mean"] = phi.mean[i];
    p["std"] = phi.std[i];
    params.push_back(p);
  }
  j["parameters"] = params;
  return j;
}

void PrintFit(std::ostream& out, const FitResult& fit) {
  const auto& phi = fit.phi_star;
  for (int i = 0; i < phi.dim(); ++i) {
    out << phi.space.names[i] << " mean " << FormatDouble(phi.mean[i])
        << " std " << FormatDouble(phi.std[i]) << "\n";
  }
  out << "mse " << FormatDouble(fit.mse) << " (" << fit.evaluations
      << " evaluations, stop: " << fit.stop_reason << ")\n";
}

int Gen(const Options& opt, std::ostream& out) {
  const RunConfig config = LoadConfig(opt);
  const auto sim = BuildSimulator(config);
  const DataGenConfig gen = BuildDataGenConfig(config, *sim);
  const GeneratedData data = GenerateDataset(*sim, gen);

  const auto names = TrajectoryFileNames(opt.out, gen.trajectories);
  for (std::size_t i = 0; i < names.size(); ++i) {
    SaveTrajectory(names[i], data.trajectories[i]);
  }
  Json truth = Header("gen");
  truth["simulator"] = sim->id();
  truth["seed"] = gen.seed;
  truth["parameters"] = sim->param_space().names;
  truth["noise_std"] = VectorJson(gen.noise_std);
  truth["files"] = names;
  Json draws = Json::array();
  for (const auto& d : data.draws) {
    Json entry;
    entry["trajectory"] = d.trajectory;
    entry["start"] = d.start;
    entry["values"] = VectorJson(d.values);
    draws.push_back(entry);
  }
  truth["draws"] = draws;
  truth["config"] = Json::parse(config.echo);
  WriteTextFile(opt.out + ".truth.json", Dump(truth));
  for (const auto& n : names) out << "wrote " << n << "\n";
  return kExitOk;
}

int Preprocess(const Options& opt, std::ostream& out) {
  const RunConfig config = LoadConfig(opt);
  if (!config.preprocess) throw ConfigError("config key 'preprocess': missing");
  const PreprocessSection& p = *config.preprocess;
  const SensorLog log = LoadSensorLog(opt.raw, p.channels);
  const Trajectory traj = ResampleToTimestep(Synchronize(log, p.offsets), p.dt);
  SaveTrajectory(opt.out, traj);
  out << "wrote " << opt.out << " (" << traj.states.cols() << " steps, "
      << traj.state_dim() << " state and " << traj.action_dim()
      << " action dimensions)\n";
  return kExitOk;
}

FitConfig MakeFitConfig(const Options& opt, const RunConfig& config,
                        const Simulator& sim) {
  FitConfig cfg = BuildFitConfig(config, sim);
  cfg.workers = opt.workers;
  if (!opt.objective.empty()) {
    cfg.kind = opt.objective == "droid" ? ObjectiveKind::kDroid
                                        : ObjectiveKind::kDropo;
  }
  return cfg;
}

int FitCommand(const Options& opt, std::ostream& out) {
  const RunConfig config = LoadConfig(opt);
  const auto sim = BuildSimulator(config);
  const TransitionDataset dataset = LoadDataset(opt, config, *sim);
  const FitConfig cfg = MakeFitConfig(opt, config, *sim);
  const FitResult fit = Fit(dataset, *sim, cfg);

  const std::string trace_path = SiblingPath(opt.out, "trace.csv");
  std::ostringstream trace;
  WriteTrace(trace, fit);
  WriteTextFile(trace_path, trace.str());

  Json result = Header("fit");
  result.update(FitJson(fit));
  result["trace"] = trace_path;
  result["config"] = Json::parse(config.echo);
  WriteTextFile(opt.out, Dump(result));
  PrintFit(out, fit);
  return kExitOk;
}

int TuneCommand(const Options& opt, std::ostream& out) {
  const RunConfig config = LoadConfig(opt);
  if (!config.tuning) throw ConfigError("config key 'tuning': missing");
  const auto sim = BuildSimulator(config);
  const TransitionDataset dataset = LoadDataset(opt, config, *sim);
  const FitConfig cfg = MakeFitConfig(opt, config, *sim);
  const TuneResult tune = TuneEpsilon(
      dataset, *sim, cfg, config.tuning->candidates, config.tuning->tau);

  const std::string sweep_path = SiblingPath(opt.out, "sweep.csv");
  std::ostringstream sweep;
  WriteSweep(sweep, tune.table);
  WriteTextFile(sweep_path, sweep.str());

  Json result = Header("tune-epsilon");
  result["tau"] = config.tuning->tau;
  result["threshold_reachable"] = tune.reachable();
  result["sweep"] = sweep_path;
  if (tune.reachable()) {
    result["selected_epsilon"] = tune.epsilon();
    result.update(FitJson(tune.best()));
    const std::string trace_path = SiblingPath(opt.out, "trace.csv");
    std::ostringstream trace;
    WriteTrace(trace, tune.best());
    WriteTextFile(trace_path, trace.str());
    result["trace"] = trace_path;
  } else {
    result["selected_epsilon"] = nullptr;
  }
  result["config"] = Json::parse(config.echo);
  WriteTextFile(opt.out, Dump(result));

  out << "epsilon,total_variance,mse\n";
  for (const auto& row : tune.table) {
    out << FormatDouble(row.epsilon) << ',' << FormatDouble(row.total_variance)
        << ',' << FormatDouble(row.mse) << "\n";
  }
  if (!tune.reachable()) {
    out << "threshold unreachable: no candidate reached mse < tau "
        << FormatDouble(config.tuning->tau) << "\n";
    return kExitUnreachable;
  }
  out << "selected epsilon " << FormatDouble(tune.epsilon()) << "\n";
  return kExitOk;
}

// parameter vector from a result file, a ground-truth sidecar or {"values"}
VectorXd LoadParams(const std::string& path, const Simulator& sim) {
  const std::string text = ReadTextFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": invalid JSON (" + e.what() + ")");
  }
  const ParameterSpace& space = sim.param_space();
  VectorXd values(space.dim());
  try {
    if (j.contains("parameters") && j["parameters"].is_array() &&
        !j["parameters"].empty() && j["parameters"][0].is_object()) {
      const auto& p = j["parameters"];
      if (static_cast<int>(p.size()) != space.dim()) {
        throw IoError(path + ": parameter count does not match the simulator");
      }
      for (int i = 0; i < space.dim(); ++i) {
        if (p[i].at("name").get<std::string>() != space.names[i]) {
          throw IoError(path + ": parameter '" +
                        p[i].at("name").get<std::string>() + "' where '" +
                        space.names[i] + "' was expected");
        }
        values[i] = p[i].at("mean").get<double>();
      }
    } else if (j.contains("draws")) {
      const auto& draws = j["draws"];
      if (draws.empty()) throw IoError(path + ": no ground-truth draws");
      const auto first = draws[0].at("values").get<std::vector<double>>();
      for (const auto& d : draws) {
        if (d.at("values").get<std::vector<double>>() != first) {
          throw IoError(
              path +
              ": several different ground-truth draws, replay needs one "
              "parameter vector");
        }
      }
      if (static_cast<int>(first.size()) != space.dim()) {
        throw IoError(path + ": parameter count does not match the simulator");
      }
      values = Eigen::Map<const VectorXd>(first.data(), space.dim());
    } else if (j.contains("values")) {
      const auto v = j["values"].get<std::vector<double>>();
      if (static_cast<int>(v.size()) != space.dim()) {
        throw IoError(path + ": parameter count does not match the simulator");
      }
      values = Eigen::Map<const VectorXd>(v.data(), space.dim());
    } else {
      throw IoError(path + ": expected 'parameters', 'draws' or 'values'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  for (int i = 0; i < space.dim(); ++i) {
    if (!(values[i] > space.validity_lower[i])) {
      throw InvalidArgument(path + ": '" + space.names[i] +
                            "' is at or below its validity floor");
    }
  }
  return values;
}

int ReplayCommand(const Options& opt, std::ostream& out) {
  const RunConfig config = LoadConfig(opt);
  const auto sim = BuildSimulator(config);
  const VectorXd params = LoadParams(opt.params, *sim);
  const TransitionDataset dataset = LoadDataset(opt, config, *sim);
  const MseReport report = PointReplayMse(
      {params}, dataset, *sim, config.likelihood.orientation, opt.workers);

  std::ostringstream text;
  text << "transition,trajectory,start,squared_error\n";
  for (int i = 0; i < dataset.size(); ++i) {
    const Transition& tr = dataset.transitions[i];
    text << i << ',' << tr.trajectory << ',' << tr.start << ','
         << FormatDouble(report.transition_squared_error[i]) << "\n";
  }
  text << "# total " << FormatDouble(report.total) << " per_transition "
       << FormatDouble(report.per_transition) << " transitions "
       << dataset.size() << "\n";
  if (!opt.out.empty()) WriteTextFile(opt.out, text.str());
  out << text.str();

  if (!opt.breakdown.empty()) {
    std::ostringstream csv;
    csv << "transition";
    for (Eigen::Index d = 0; d < report.dimension_squared_error.rows(); ++d) {
      csv << ",dim_" << d;
    }
    csv << "\n";
    for (Eigen::Index i = 0; i < report.dimension_squared_error.cols(); ++i) {
      csv << i;
      for (Eigen::Index d = 0; d < report.dimension_squared_error.rows(); ++d) {
        csv << ',' << FormatDouble(report.dimension_squared_error(d, i));
      }
      csv << "\n";
    }
    WriteTextFile(opt.breakdown, csv.str());
  }
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Fit domain-randomization distributions to offline trajectories",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* cmd, bool seeded) {
    cmd->add_option("--config", opt.config, "run configuration (JSON)")
        ->required();
    if (seeded) {
      cmd->add_option("--seed", opt.seed, "master seed, overrides the config")
          ->each([&](const std::string&) { opt.has_seed = true; });
    }
    cmd->add_option("--workers", opt.workers, "concurrent evaluations")
        ->check(CLI::Range(1, 1024));
  };

  CLI::App* gen = app.add_subcommand("gen", "simulate a dataset");
  common(gen, true);
  gen->add_option("--out", opt.out, "trajectory file to write")->required();

  CLI::App* pre =
      app.add_subcommand("preprocess", "synchronize and resample a raw log");
  common(pre, false);
  pre->add_option("raw", opt.raw, "raw sensor log")->required();
  pre->add_option("--out", opt.out, "trajectory file to write")->required();

  CLI::App* fit = app.add_subcommand("fit", "fit a dynamics distribution");
  common(fit, true);
  fit->add_option("data", opt.data, "trajectory files")->required();
  fit->add_option("--out", opt.out, "result file to write")->required();
  fit->add_option("--objective", opt.objective, "dropo or droid")
      ->check(CLI::IsMember({"dropo", "droid"}));

  CLI::App* tune =
      app.add_subcommand("tune-epsilon", "select epsilon against tau");
  common(tune, true);
  tune->add_option("data", opt.data, "trajectory files")->required();
  tune->add_option("--out", opt.out, "result file to write")->required();

  CLI::App* replay = app.add_subcommand("replay", "replay a parameter vector");
  common(replay, false);
  replay->add_option("data", opt.data, "trajectory files")->required();
  replay
      ->add_option("--params", opt.params,
                   "result file, ground-truth sidecar or {\"values\": [...]}")
      ->required();
  replay->add_option("--breakdown", opt.breakdown, "per-dimension error CSV");
  replay->add_option("--out", opt.out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return Gen(opt, out);
    if (*pre) return Preprocess(opt, out);
    if (*fit) return FitCommand(opt, out);
    if (*tune) return TuneCommand(opt, out);
    if (*replay) return ReplayCommand(opt, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dropo
