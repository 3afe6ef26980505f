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

#include "dropo/config.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dropo {
namespace {

using Json = nlohmann::json;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw ConfigError("config key '" + path + "': " + what);
}

// typed access to one JSON object that remembers which keys were read, so
// anything left over is reported as unknown
class Section {
 public:
  Section(const Json& json, std::string path)
      : json_(json), path_(std::move(path)) {
    if (!json_.is_object())
      Fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& item : json_.items()) {
      if (!seen_.count(item.key())) Fail(Key(item.key()), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return json_.contains(key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return json_.at(key);
  }

  std::string Key(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  Section sub(const std::string& key) { return Section(raw(key), Key(key)); }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) Fail(Key(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) Fail(Key(key), "must be finite");
    return x;
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) Fail(Key(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  int integer(const std::string& key, int fallback, int minimum) {
    if (!has(key)) return fallback;
    const std::int64_t x = integer(key);
    if (x < minimum || x > 1'000'000'000) {
      Fail(Key(key), "must be >= " + std::to_string(minimum));
    }
    return static_cast<int>(x);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer() ||
        (v.is_number_integer() && !v.is_number_unsigned() &&
         v.get<std::int64_t>() < 0)) {
      Fail(Key(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) Fail(Key(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) Fail(Key(key), "expected true or false");
    return v.get<bool>();
  }

  VectorXd vector(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.empty())
      Fail(Key(key), "expected a non-empty array of numbers");
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        Fail(Key(key), "expected a non-empty array of numbers");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
      if (!std::isfinite(out[static_cast<Eigen::Index>(i)]))
        Fail(Key(key), "must be finite");
    }
    return out;
  }

  // a scalar is read as a one-element vector
  VectorXd scalar_or_vector(const std::string& key) {
    if (raw(key).is_number()) return VectorXd::Constant(1, number(key));
    return vector(key);
  }

  std::vector<std::string> strings(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) Fail(Key(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) Fail(Key(key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) Fail(Key(key), "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer())
        Fail(Key(key), "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::map<std::string, double> number_map(const std::string& key) {
    Section s = sub(key);
    std::map<std::string, double> out;
    for (const auto& item : s.json_.items())
      out[item.key()] = s.number(item.key());
    return out;
  }

  const Json& json() const { return json_; }
  const std::string& path() const { return path_; }

 private:
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

void RequirePositive(const std::string& key, double value) {
  if (!(value > 0.0)) Fail(key, "must be positive");
}

ObjectiveKind ParseObjective(const std::string& key, const std::string& name) {
  if (name == "dropo") return ObjectiveKind::kDropo;
  if (name == "droid") return ObjectiveKind::kDroid;
  Fail(key, "expected 'dropo' or 'droid', got '" + name + "'");
}

ExcitationKind ParseExcitation(const std::string& key,
                               const std::string& name) {
  if (name == "auto") return ExcitationKind::kAuto;
  if (name == "chirp") return ExcitationKind::kChirp;
  if (name == "pulses") return ExcitationKind::kPulses;
  Fail(key, "expected 'auto', 'chirp' or 'pulses', got '" + name + "'");
}

SimulatorSection ParseSimulator(Section s) {
  SimulatorSection out;
  out.id = s.string("id");
  out.dt = s.number("dt", kDefaultTimestep);
  RequirePositive(s.Key("dt"), out.dt);
  if (s.has("fixed")) out.fixed = s.number_map("fixed");
  return out;
}

ParameterSection ParseParameters(Section s) {
  ParameterSection out;
  if (s.has("names")) out.names = s.strings("names");
  if (s.has("lower")) out.lower = s.vector("lower");
  if (s.has("upper")) out.upper = s.vector("upper");
  if (s.has("validity_lower")) out.validity_lower = s.vector("validity_lower");
  if (s.has("std_max")) out.std_max = s.vector("std_max");
  if (s.has("std_min")) {
    out.std_min = s.number("std_min");
    RequirePositive(s.Key("std_min"), *out.std_min);
  }
  return out;
}

GenerationSection ParseGeneration(Section s) {
  GenerationSection out;
  if (s.has("ground_truth")) {
    Section gt = s.sub("ground_truth");
    if (gt.has("values")) out.values = gt.vector("values");
    if (gt.has("mean")) out.mean = gt.vector("mean");
    if (gt.has("std")) out.std = gt.vector("std");
    if (out.values.has_value() ==
            (out.mean.has_value() || out.std.has_value()) ||
        out.mean.has_value() != out.std.has_value()) {
      Fail(gt.path(), "give either 'values' or both 'mean' and 'std'");
    }
  } else {
    Fail(s.Key("ground_truth"), "missing");
  }
  out.resample_every = s.integer("resample_every", 0, 0);
  if (s.has("noise_std")) out.noise_std = s.scalar_or_vector("noise_std");
  out.transitions = s.integer("transitions", 200, 1);
  out.trajectories = s.integer("trajectories", 1, 1);
  if (s.has("excitation")) {
    out.excitation =
        ParseExcitation(s.Key("excitation"), s.string("excitation"));
  }
  out.amplitude = s.number("amplitude", 0.0);
  if (s.has("initial_state")) out.initial_state = s.vector("initial_state");
  out.seed = s.seed("seed", 0);
  return out;
}

LikelihoodConfig ParseLikelihood(Section s) {
  LikelihoodConfig out;
  out.samples = s.integer("samples", out.samples, 2);
  out.lambda = s.integer("lambda", out.lambda, 1);
  if (s.has("epsilon")) {
    out.epsilon = s.scalar_or_vector("epsilon");
    if ((out.epsilon.array() < 0.0).any())
      Fail(s.Key("epsilon"), "must be >= 0");
  }
  out.seed = s.seed("seed", 0);
  if (s.has("quaternion_offsets")) {
    out.orientation.quaternion_offsets = s.integers("quaternion_offsets");
  }
  return out;
}

OptimizerSection ParseOptimizer(Section s) {
  OptimizerSection out;
  if (s.has("objective"))
    out.objective = ParseObjective(s.Key("objective"), s.string("objective"));
  out.budget = s.integer("budget", out.budget, 1);
  out.stagnation_window =
      s.integer("stagnation_window", out.stagnation_window, 1);
  out.stagnation_tol = s.number("stagnation_tol", out.stagnation_tol);
  out.population = s.integer("population", 0, 0);
  if (out.population == 1)
    Fail(s.Key("population"), "must be 0 (default) or >= 2");
  out.sigma0 = s.number("sigma0", 1.0);
  RequirePositive(s.Key("sigma0"), out.sigma0);
  if (s.has("selection")) {
    const std::string sel = s.string("selection");
    if (sel == "mean") {
      out.selection = FitSelection::kFinalMean;
    } else if (sel == "best") {
      out.selection = FitSelection::kBestSoFar;
    } else {
      Fail(s.Key("selection"), "expected 'mean' or 'best'");
    }
  }
  if (s.has("phi_init")) {
    Section init = s.sub("phi_init");
    if (init.has("mean")) out.init_mean = init.vector("mean");
    if (init.has("std")) out.init_std = init.vector("std");
  }
  return out;
}

PreprocessSection ParsePreprocess(Section s) {
  PreprocessSection out;
  out.dt = s.number("dt", kDefaultTimestep);
  RequirePositive(s.Key("dt"), out.dt);
  if (s.has("offsets")) out.offsets = s.number_map("offsets");
  const Json& channels = s.raw("channels");
  if (!channels.is_array() || channels.empty()) {
    Fail(s.Key("channels"), "expected a non-empty array");
  }
  for (std::size_t i = 0; i < channels.size(); ++i) {
    Section c(channels[i], s.Key("channels") + "[" + std::to_string(i) + "]");
    ChannelSpec spec;
    spec.name = c.string("name");
    try {
      spec.role = ParseChannelRole(c.string("role"));
    } catch (const InvalidArgument& e) {
      Fail(c.Key("role"), e.what());
    }
    spec.derive_velocity = c.boolean("velocity", false);
    if (spec.derive_velocity && spec.role != ChannelRole::kPosition) {
      Fail(c.Key("velocity"), "only position channels can derive a velocity");
    }
    out.channels.push_back(spec);
  }
  for (const auto& [name, offset] : out.offsets) {
    (void)offset;
    const bool known =
        std::any_of(out.channels.begin(), out.channels.end(),
                    [&](const ChannelSpec& c) { return c.name == name; });
    if (!known) Fail(s.Key("offsets." + name), "no such channel");
  }
  return out;
}

TuningSection ParseTuning(Section s) {
  TuningSection out;
  const VectorXd c = s.vector("candidates");
  out.candidates.assign(c.data(), c.data() + c.size());
  if ((c.array() < 0.0).any()) Fail(s.Key("candidates"), "must be >= 0");
  out.tau = s.number("tau");
  if (out.tau < 0.0) Fail(s.Key("tau"), "must be >= 0");
  return out;
}

int LineOf(const std::string& text, std::size_t byte) {
  return 1 +
         static_cast<int>(std::count(
             text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

void CheckLength(const std::string& key, const VectorXd& v, int expected) {
  if (v.size() != expected) {
    std::ostringstream os;
    os << "expected " << expected << " entries, got " << v.size();
    Fail(key, os.str());
  }
}

}  // namespace

RunConfig ParseRunConfig(const std::string& text, const std::string& source) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << LineOf(text, e.byte) << ": invalid JSON ("
       << e.what() << ")";
    throw ConfigError(os.str());
  }
  RunConfig config;
  try {
    Section root(json, "");
    config.simulator = ParseSimulator(root.sub("simulator"));
    if (root.has("parameters"))
      config.parameters = ParseParameters(root.sub("parameters"));
    if (root.has("generation"))
      config.generation = ParseGeneration(root.sub("generation"));
    if (root.has("likelihood"))
      config.likelihood = ParseLikelihood(root.sub("likelihood"));
    if (root.has("optimizer"))
      config.optimizer = ParseOptimizer(root.sub("optimizer"));
    if (root.has("preprocess"))
      config.preprocess = ParsePreprocess(root.sub("preprocess"));
    if (root.has("tuning")) config.tuning = ParseTuning(root.sub("tuning"));
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  config.echo = json.dump();
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return ParseRunConfig(text, path);
}

std::unique_ptr<Simulator> BuildSimulator(const RunConfig& config) {
  std::unique_ptr<Simulator> sim;
  try {
    sim = MakeSimulator(config.simulator.id, config.simulator.dt);
  } catch (const InvalidArgument& e) {
    Fail("simulator.id", e.what());
  }
  for (const auto& [name, value] : config.simulator.fixed) {
    auto* chain = dynamic_cast<MassChain3*>(sim.get());
    const int index = name == "m1"   ? 0
                      : name == "m2" ? 1
                      : name == "m3" ? 2
                                     : -1;
    if (chain == nullptr || index < 0) {
      Fail("simulator.fixed." + name, "simulator '" + config.simulator.id +
                                          "' cannot freeze this parameter");
    }
    if (config.simulator.fixed.size() > 1) {
      Fail("simulator.fixed", "at most one parameter can be frozen");
    }
    if (!(value > 0.0)) Fail("simulator.fixed." + name, "must be positive");
    sim = std::make_unique<MassChain3>(
        InjectMisspecification(*chain, index, value));
  }

  if (config.parameters) {
    const ParameterSection& p = *config.parameters;
    ParameterSpace space = sim->param_space();
    const int d = space.dim();
    if (!p.names.empty() && p.names != space.names) {
      std::ostringstream os;
      os << "expected [";
      for (int i = 0; i < d; ++i) os << (i ? ", " : "") << space.names[i];
      os << "]";
      Fail("parameters.names", os.str());
    }
    const bool width_changed = p.lower || p.upper;
    if (p.lower)
      CheckLength("parameters.lower", *p.lower, d), space.lower = *p.lower;
    if (p.upper)
      CheckLength("parameters.upper", *p.upper, d), space.upper = *p.upper;
    if (p.validity_lower) {
      CheckLength("parameters.validity_lower", *p.validity_lower, d);
      space.validity_lower = *p.validity_lower;
    }
    if (p.std_min) space.std_min = *p.std_min;
    if (p.std_max) {
      CheckLength("parameters.std_max", *p.std_max, d);
      space.std_max = *p.std_max;
    } else if (width_changed) {
      space.std_max = 0.25 * (space.upper - space.lower);
    }
    try {
      sim->set_param_space(std::move(space));
    } catch (const InvalidArgument& e) {
      Fail("parameters", e.what());
    }
  }
  return sim;
}

DataGenConfig BuildDataGenConfig(const RunConfig& config,
                                 const Simulator& sim) {
  if (!config.generation)
    Fail("generation", "section required for data generation");
  const GenerationSection& g = *config.generation;
  const ParameterSpace& space = sim.param_space();
  DataGenConfig out;
  if (g.values) {
    CheckLength("generation.ground_truth.values", *g.values, space.dim());
    out.ground_truth = DynamicsSample{*g.values};
  } else {
    CheckLength("generation.ground_truth.mean", *g.mean, space.dim());
    CheckLength("generation.ground_truth.std", *g.std, space.dim());
    out.ground_truth = DynamicsDistribution{space, *g.mean, *g.std};
  }
  out.resample_every = g.resample_every;
  out.excitation = g.excitation;
  out.amplitude = g.amplitude;
  out.noise_std = g.noise_std;
  out.transitions = g.transitions;
  out.trajectories = g.trajectories;
  out.initial_state = g.initial_state;
  out.seed = g.seed;
  try {
    out.Validate(sim);
  } catch (const InvalidArgument& e) {
    Fail("generation", e.what());
  }
  return out;
}

FitConfig BuildFitConfig(const RunConfig& config, const Simulator& sim) {
  const OptimizerSection& o = config.optimizer;
  FitConfig out;
  out.kind = o.objective;
  out.budget = o.budget;
  out.stagnation_window = o.stagnation_window;
  out.stagnation_tol = o.stagnation_tol;
  out.population = o.population;
  out.sigma0 = o.sigma0;
  out.selection = o.selection;
  out.likelihood = config.likelihood;
  out.seed = config.likelihood.seed;
  if (o.init_mean || o.init_std) {
    DynamicsDistribution init =
        DynamicsDistribution::DefaultInit(sim.param_space());
    if (o.init_mean) {
      CheckLength("optimizer.phi_init.mean", *o.init_mean, init.dim());
      init.mean = *o.init_mean;
    }
    if (o.init_std) {
      CheckLength("optimizer.phi_init.std", *o.init_std, init.dim());
      init.std = *o.init_std;
    }
    if (auto violation = ValidateDistribution(init)) {
      Fail("optimizer.phi_init", *violation);
    }
    out.phi_init = init;
  }
  try {
    out.Validate();
  } catch (const InvalidArgument& e) {
    Fail("optimizer", e.what());
  }
  return out;
}

}  // namespace dropo
