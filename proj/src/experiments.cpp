// Copyright 2026 The ddprep Authors
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

#include "ddprep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "ddprep/cluster.hpp"
#include "ddprep/dynamic_noise.hpp"
#include "ddprep/magnus.hpp"
#include "ddprep/pulses.hpp"
#include "ddprep/singlet.hpp"
#include "ddprep/toggling.hpp"

#ifndef DDPREP_VERSION
#define DDPREP_VERSION "unknown"
#endif

namespace ddprep {

using json = nlohmann::ordered_json;

std::string version_string() { return DDPREP_VERSION; }

// ---------------------------------------------------------------------------
// Registry

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry = {
      {"table1", "Magnus coefficients", "Table I"},
      {"fig3a", "singlet population vs broadening at fixed unit duration", "Fig. 3(a)"},
      {"fig3b", "singlet population vs broadening at fixed mean pulse interval", "Fig. 3(b)"},
      {"fig4", "singlet population over broadening and pulse density", "Fig. 4"},
      {"fig5", "Magnus convergence check", "Fig. 5"},
      {"fig6", "random pulse sequences over broadening and pulse density", "Fig. 6"},
      {"fig8", "cluster-state fidelity under stabilizer pumping", "Fig. 8"},
      {"dynamic_noise_scaling", "infidelity vs mean pulse interval under OU noise", "dynamic noise"},
      {"filter", "memory-limit filter function of a pulse schedule", "dynamic noise"},
  };
  return registry;
}

std::string list_experiments() {
  std::string out;
  for (const auto& e : experiment_registry()) {
    out += e.id + " — " + e.description + " (" + e.anchor + ")\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

namespace {

std::string fmt(long value) { return std::to_string(value); }
std::string fmt(double value) { return format_number(value); }

}  // namespace

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::logic_error("ragged result table");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

enum class Kind { kTable, kSingletPeriodic, kSingletRandom, kCluster, kDynamic, kFilter };

Kind kind_of(const std::string& id) {
  if (id == "table1") return Kind::kTable;
  if (id == "fig3a" || id == "fig3b" || id == "fig4" || id == "fig5") return Kind::kSingletPeriodic;
  if (id == "fig6") return Kind::kSingletRandom;
  if (id == "fig8") return Kind::kCluster;
  if (id == "dynamic_noise_scaling") return Kind::kDynamic;
  if (id == "filter") return Kind::kFilter;
  throw ConfigError("experiment", "unknown experiment id '" + id + "' (see `list`)");
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const double e = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
  return out;
}

// Experiment defaults; any key present in the document overrides them.
ExperimentConfig defaults_for(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  switch (kind_of(id)) {
    case Kind::kTable:
      c.schedule.sequences = {"none", "cpmg", "udd3", "udd4", "udd5", "cdd3", "cdd4", "udd10"};
      break;
    case Kind::kSingletPeriodic:
      c.schedule.sequences = {"cpmg", "cdd3", "cdd4", "udd5", "udd10"};
      if (id == "fig3a") {
        c.system.lambda_h = 10.0;
        c.schedule.t_p = 1e-3;
        c.grid.delta = logspace(1.0, 3.5, 6);
      } else if (id == "fig3b") {
        c.system.lambda_h = 10.0;
        c.schedule.tau_bar = 1e-4;
        c.grid.delta = logspace(1.0, 3.5, 6);
      } else if (id == "fig4") {
        c.schedule.sequences = {"cpmg"};
        c.grid.delta = logspace(0.0, 2.0, 5);
        c.grid.nbar = logspace(2.0, 3.0, 5);
      } else {
        c.schedule.sequences = {"cpmg", "udd3"};
        c.schedule.nbar = std::pow(10.0, 2.75);
        c.grid.delta = logspace(0.0, 2.5, 6);
      }
      break;
    case Kind::kSingletRandom:
      c.schedule.sequences = {"random"};
      c.grid.delta = logspace(-0.5, 0.5, 5);
      c.grid.nbar = logspace(2.0, 3.0, 5);
      break;
    case Kind::kCluster:
      c.system.n_qubits = 4;
      c.schedule.sequences = {"none", "cpmg"};
      c.grid.delta = {0.0, 0.125, 0.25, 0.375, 0.5};
      c.grid.nbar = logspace(0.0, 3.0, 7);
      break;
    case Kind::kDynamic:
      c.system.n_qubits = 4;
      c.system.lambda_h = 10.0;
      c.schedule.sequences = {"cpmg"};
      c.schedule.horizon = 2.0;
      c.noise.sigma2 = 4.0;
      c.noise.tau_c = 1.0;
      c.grid.tau_bar = logspace(-2.2, -1.2, 5);
      break;
    case Kind::kFilter:
      c.schedule.sequences = {"cpmg"};
      c.schedule.t_p = 1.0;
      c.schedule.horizon = 4.0;
      c.grid.omega = linspace(0.0, 40.0, 81);
      break;
  }
  return c;
}

class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

  void require_object(const json& j) const {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  void reject_unknown(const json& j, std::initializer_list<const char*> allowed) const {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

  double number(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "must be finite");
    return d;
  }

  int integer(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(join(path_, key), "out of range");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    throw ConfigError(join(path_, key), "expected a non-negative integer");
  }

  bool boolean(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) {
        throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::vector<double> range(const json& j, const std::string& key) const {
    const auto& v = j.at(key);
    const auto where = join(path_, key);
    if (v.is_array()) {
      std::vector<double> out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
          throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a finite number");
        }
        out.push_back(v[i].get<double>());
      }
      return out;
    }
    if (v.is_object() && v.size() == 1) {
      const auto& [name, spec] = *v.items().begin();
      if ((name == "logspace" || name == "linspace") && spec.is_array() && spec.size() == 3 &&
          spec[0].is_number() && spec[1].is_number() && spec[2].is_number_integer()) {
        const int count = spec[2].get<int>();
        if (count < 1 || count > 100000) throw ConfigError(where, "count must be in [1, 100000]");
        const double lo = spec[0].get<double>();
        const double hi = spec[1].get<double>();
        return name == "logspace" ? logspace(lo, hi, count) : linspace(lo, hi, count);
      }
    }
    throw ConfigError(where, "expected a list or {\"logspace\"|\"linspace\": [lo, hi, count]}");
  }

 private:
  std::string path_;
};

void validate(const ExperimentConfig& c) {
  const Kind kind = kind_of(c.experiment);
  const auto& s = c.system;
  if (s.n_qubits < 1 || s.n_qubits > HilbertSpec::kMaxQubits) {
    throw ConfigError("system.n_qubits", "must be in [1, " +
                                             std::to_string(HilbertSpec::kMaxQubits) + "]");
  }
  if (!(s.lambda_h > 0.0)) throw ConfigError("system.lambda_h", "must be positive");
  if (!(s.lambda_i > 0.0)) throw ConfigError("system.lambda_i", "must be positive");
  if (!(s.gamma > 0.0)) throw ConfigError("system.gamma", "must be positive");
  if (kind == Kind::kSingletPeriodic || kind == Kind::kSingletRandom || kind == Kind::kDynamic) {
    if (s.n_qubits % 2 != 0 || s.n_qubits < 2) {
      throw ConfigError("system.n_qubits", "singlet preparation needs an even qubit count >= 2");
    }
  }
  if (kind == Kind::kCluster && s.n_qubits < 2) {
    throw ConfigError("system.n_qubits", "cluster preparation needs at least two qubits");
  }
  if (!(c.noise.sigma2 >= 0.0)) throw ConfigError("noise.sigma2", "must be >= 0");
  if (!(c.noise.tau_c > 0.0)) throw ConfigError("noise.tau_c", "must be positive");

  const auto& sch = c.schedule;
  if (sch.sequences.empty()) throw ConfigError("schedule.sequences", "must not be empty");
  for (std::size_t i = 0; i < sch.sequences.size(); ++i) {
    const auto& tag = sch.sequences[i];
    const auto where = "schedule.sequences[" + std::to_string(i) + "]";
    if (!is_valid_tag(tag)) throw ConfigError(where, "unresolvable sequence tag '" + tag + "'");
    const bool random = tag == "random";
    if (random != (kind == Kind::kSingletRandom)) {
      throw ConfigError(where, random ? "random schedules only apply to fig6"
                                      : "fig6 takes the 'random' sequence only");
    }
  }
  if (!(sch.horizon > 0.0)) throw ConfigError("schedule.horizon", "must be positive");
  if (sch.t_p && !(*sch.t_p > 0.0)) throw ConfigError("schedule.t_p", "must be positive");
  if (sch.tau_bar && !(*sch.tau_bar > 0.0)) throw ConfigError("schedule.tau_bar", "must be positive");
  if (sch.nbar && !(*sch.nbar > 0.0)) throw ConfigError("schedule.nbar", "must be positive");

  auto nonempty = [](const std::vector<double>& v, const char* where) {
    if (v.empty()) throw ConfigError(where, "grid range must not be empty");
  };
  auto all_positive = [](const std::vector<double>& v, const char* where) {
    for (double x : v) {
      if (!(x > 0.0)) throw ConfigError(where, "values must be positive");
    }
  };
  auto all_nonneg = [](const std::vector<double>& v, const char* where) {
    for (double x : v) {
      if (!(x >= 0.0)) throw ConfigError(where, "values must be >= 0");
    }
  };
  const auto& g = c.grid;
  all_nonneg(g.delta, "grid.delta");
  all_positive(g.nbar, "grid.nbar");
  all_positive(g.tau_bar, "grid.tau_bar");
  all_nonneg(g.omega, "grid.omega");
  const std::string& id = c.experiment;
  if (kind == Kind::kSingletPeriodic || kind == Kind::kSingletRandom || kind == Kind::kCluster) {
    nonempty(g.delta, "grid.delta");
  }
  if (id == "fig3a" && !sch.t_p) throw ConfigError("schedule.t_p", "required for fig3a");
  if (id == "fig3b" && !sch.tau_bar) throw ConfigError("schedule.tau_bar", "required for fig3b");
  if (id == "fig5" && !sch.nbar) throw ConfigError("schedule.nbar", "required for fig5");
  if (id == "fig4" || id == "fig6" || id == "fig8") nonempty(g.nbar, "grid.nbar");
  if (kind == Kind::kDynamic) nonempty(g.tau_bar, "grid.tau_bar");
  if ((kind == Kind::kDynamic || kind == Kind::kFilter) && sch.sequences.size() != 1) {
    throw ConfigError("schedule.sequences", "experiment '" + id + "' takes exactly one sequence");
  }
  if (kind == Kind::kDynamic && sch.sequences.front() == "none") {
    throw ConfigError("schedule.sequences[0]", "dynamic noise scans need pulses");
  }
  if (kind == Kind::kFilter) {
    nonempty(g.omega, "grid.omega");
    if (!sch.t_p) throw ConfigError("schedule.t_p", "required for filter");
  }
  if (id == "fig5") {
    for (std::size_t i = 0; i < sch.sequences.size(); ++i) {
      const auto co = coefficients(sequence_from_tag(sch.sequences[i], 1.0));
      if (std::abs(co.alpha1) > 1e-10 || std::abs(co.alpha2) > 1e-10) {
        throw ConfigError("schedule.sequences[" + std::to_string(i) + "]",
                          "fig5 needs sequences with vanishing first and second order terms");
      }
    }
  }

  const auto& r = c.run;
  if (r.workers < 0) throw ConfigError("run.workers", "must be >= 0");
  if (!(r.tolerance > 0.0)) throw ConfigError("run.tolerance", "must be positive");
  if (r.seeds < 1) throw ConfigError("run.seeds", "must be >= 1");
  if (r.n_traj < 1) throw ConfigError("run.n_traj", "must be >= 1");
  if (!(r.dt >= 0.0)) throw ConfigError("run.dt", "must be >= 0");
  if (!(r.slot > 0.0)) throw ConfigError("run.slot", "must be positive");
  if (!r.backend.empty()) {
    Backend b;
    try {
      b = parse_backend(r.backend);
    } catch (const InvalidArgument& e) {
      throw ConfigError("run.backend", e.what());
    }
    const bool random_backend = b == Backend::kMonteCarlo || b == Backend::kPoissonEnsemble;
    if (kind == Kind::kSingletRandom && !random_backend) {
      throw ConfigError("run.backend", "fig6 needs monte_carlo or poisson_ensemble");
    }
    if ((kind == Kind::kSingletPeriodic || kind == Kind::kCluster) && random_backend) {
      throw ConfigError("run.backend", "periodic experiments need unit_power, steady_state or stepper");
    }
    if (kind == Kind::kTable || kind == Kind::kDynamic || kind == Kind::kFilter) {
      throw ConfigError("run.backend", "experiment '" + id + "' has no backend choice");
    }
  }
  if (r.sequential && kind != Kind::kCluster) {
    throw ConfigError("run.sequential", "only applies to fig8");
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  if (!doc.contains("experiment")) {
    throw ConfigError("", "missing required key(s): experiment");
  }
  const Reader top("");
  top.reject_unknown(doc, {"experiment", "system", "noise", "schedule", "grid", "run"});
  ExperimentConfig c = defaults_for(top.string(doc, "experiment"));

  if (doc.contains("system")) {
    const Reader rd("system");
    const auto& j = doc["system"];
    rd.require_object(j);
    rd.reject_unknown(j, {"n_qubits", "lambda_h", "lambda_i", "gamma"});
    if (j.contains("n_qubits")) c.system.n_qubits = rd.integer(j, "n_qubits");
    if (j.contains("lambda_h")) c.system.lambda_h = rd.number(j, "lambda_h");
    if (j.contains("lambda_i")) c.system.lambda_i = rd.number(j, "lambda_i");
    if (j.contains("gamma")) c.system.gamma = rd.number(j, "gamma");
  }
  if (doc.contains("noise")) {
    const Reader rd("noise");
    const auto& j = doc["noise"];
    rd.require_object(j);
    rd.reject_unknown(j, {"sigma2", "tau_c"});
    if (j.contains("sigma2")) c.noise.sigma2 = rd.number(j, "sigma2");
    if (j.contains("tau_c")) c.noise.tau_c = rd.number(j, "tau_c");
  }
  if (doc.contains("schedule")) {
    const Reader rd("schedule");
    const auto& j = doc["schedule"];
    rd.require_object(j);
    rd.reject_unknown(j, {"sequences", "t_p", "tau_bar", "nbar", "horizon"});
    if (j.contains("sequences")) c.schedule.sequences = rd.strings(j, "sequences");
    auto opt = [&](const char* key, std::optional<double>& slot) {
      if (!j.contains(key)) return;
      slot = j.at(key).is_null() ? std::nullopt : std::optional<double>(rd.number(j, key));
    };
    opt("t_p", c.schedule.t_p);
    opt("tau_bar", c.schedule.tau_bar);
    opt("nbar", c.schedule.nbar);
    if (j.contains("horizon")) c.schedule.horizon = rd.number(j, "horizon");
  }
  if (doc.contains("grid")) {
    const Reader rd("grid");
    const auto& j = doc["grid"];
    rd.require_object(j);
    rd.reject_unknown(j, {"delta", "nbar", "tau_bar", "omega"});
    if (j.contains("delta")) c.grid.delta = rd.range(j, "delta");
    if (j.contains("nbar")) c.grid.nbar = rd.range(j, "nbar");
    if (j.contains("tau_bar")) c.grid.tau_bar = rd.range(j, "tau_bar");
    if (j.contains("omega")) c.grid.omega = rd.range(j, "omega");
  }
  if (doc.contains("run")) {
    const Reader rd("run");
    const auto& j = doc["run"];
    rd.require_object(j);
    rd.reject_unknown(j, {"seed", "workers", "backend", "tolerance", "seeds", "n_traj", "dt",
                          "sequential", "slot"});
    if (j.contains("seed")) c.run.seed = rd.unsigned_integer(j, "seed");
    if (j.contains("workers")) c.run.workers = rd.integer(j, "workers");
    if (j.contains("backend")) c.run.backend = rd.string(j, "backend");
    if (j.contains("tolerance")) c.run.tolerance = rd.number(j, "tolerance");
    if (j.contains("seeds")) c.run.seeds = rd.integer(j, "seeds");
    if (j.contains("n_traj")) c.run.n_traj = rd.integer(j, "n_traj");
    if (j.contains("dt")) c.run.dt = rd.number(j, "dt");
    if (j.contains("sequential")) c.run.sequential = rd.boolean(j, "sequential");
    if (j.contains("slot")) c.run.slot = rd.number(j, "slot");
  }
  validate(c);
  return c;
}

namespace {

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["system"] = {{"n_qubits", c.system.n_qubits},
                 {"lambda_h", c.system.lambda_h},
                 {"lambda_i", c.system.lambda_i},
                 {"gamma", c.system.gamma}};
  j["noise"] = {{"sigma2", c.noise.sigma2}, {"tau_c", c.noise.tau_c}};
  json sch;
  sch["sequences"] = c.schedule.sequences;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  sch["t_p"] = opt(c.schedule.t_p);
  sch["tau_bar"] = opt(c.schedule.tau_bar);
  sch["nbar"] = opt(c.schedule.nbar);
  sch["horizon"] = c.schedule.horizon;
  j["schedule"] = sch;
  j["grid"] = {{"delta", c.grid.delta},
               {"nbar", c.grid.nbar},
               {"tau_bar", c.grid.tau_bar},
               {"omega", c.grid.omega}};
  j["run"] = {{"seed", c.run.seed},           {"workers", c.run.workers},
              {"backend", c.run.backend},     {"tolerance", c.run.tolerance},
              {"seeds", c.run.seeds},         {"n_traj", c.run.n_traj},
              {"dt", c.run.dt},               {"sequential", c.run.sequential},
              {"slot", c.run.slot}};
  return j;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(2); }

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct Point {
  std::string sequence;
  double delta = 0.0;
  double x = 0.0;  // nbar, tau_bar or omega depending on the experiment
  bool leading = false;
};

struct Plan {
  std::vector<std::string> columns;
  std::vector<Point> points;
};

std::vector<std::string> singlet_columns() {
  return {"experiment", "sequence", "delta", "t_p", "n_pulses", "nbar", "p_j0", "p_j0_stderr",
          "units_to_converge"};
}

Plan make_plan(const ExperimentConfig& c) {
  Plan plan;
  const Kind kind = kind_of(c.experiment);
  const auto& seqs = c.schedule.sequences;
  switch (kind) {
    case Kind::kTable:
      plan.columns = {"sequence", "N", "alpha1", "alpha2", "alpha3a", "alpha3b", "alpha3b_N2"};
      for (const auto& s : seqs) plan.points.push_back({s, 0.0, 0.0, false});
      break;
    case Kind::kSingletPeriodic:
      plan.columns = singlet_columns();
      if (c.experiment == "fig4") {
        for (const auto& s : seqs) {
          for (double d : c.grid.delta) {
            for (double n : c.grid.nbar) plan.points.push_back({s, d, n, false});
          }
        }
      } else {
        for (const auto& s : seqs) {
          for (double d : c.grid.delta) {
            plan.points.push_back({s, d, 0.0, false});
            if (c.experiment == "fig5") plan.points.push_back({s, d, 0.0, true});
          }
        }
      }
      break;
    case Kind::kSingletRandom:
      plan.columns = singlet_columns();
      for (double d : c.grid.delta) {
        for (double n : c.grid.nbar) plan.points.push_back({"random", d, n, false});
      }
      break;
    case Kind::kCluster:
      plan.columns = {"delta", "nbar", "sequence", "fidelity", "units_to_converge"};
      for (const auto& s : seqs) {
        for (double d : c.grid.delta) {
          if (s == "none") {
            plan.points.push_back({s, d, 0.0, false});
          } else {
            for (double n : c.grid.nbar) plan.points.push_back({s, d, n, false});
          }
        }
      }
      break;
    case Kind::kDynamic:
      plan.columns = {"tau_bar", "sigma2", "tau_c", "infidelity", "stderr", "n_traj"};
      for (const auto& s : seqs) {
        for (double tb : c.grid.tau_bar) plan.points.push_back({s, 0.0, tb, false});
      }
      break;
    case Kind::kFilter:
      plan.columns = {"omega", "value"};
      for (const auto& s : seqs) {
        for (double w : c.grid.omega) plan.points.push_back({s, 0.0, w, false});
      }
      break;
  }
  return plan;
}

// Unit of a periodic singlet experiment.
PulseSequence singlet_unit(const ExperimentConfig& c, const Point& p) {
  const auto n = pulse_count_for_tag(p.sequence);
  double t_p = 1.0;
  if (c.experiment == "fig3a") {
    t_p = *c.schedule.t_p;
  } else if (c.experiment == "fig3b") {
    t_p = *c.schedule.tau_bar * static_cast<double>(std::max<std::size_t>(n, 1));
  } else {
    const double nbar = c.experiment == "fig5" ? *c.schedule.nbar : p.x;
    t_p = static_cast<double>(std::max<std::size_t>(n, 1)) / nbar;
  }
  return sequence_from_tag(p.sequence, t_p);
}

long repetitions_for(double horizon, double t_p) {
  return std::max(1L, std::lround(horizon / t_p));
}

RunOptions run_options(const ExperimentConfig& c, Backend fallback) {
  RunOptions o;
  o.backend = c.run.backend.empty() ? fallback : parse_backend(c.run.backend);
  o.steady.tolerance = c.run.tolerance;
  o.seeds = c.run.seeds;
  return o;
}

// Noiseless reference for the dynamic-noise deficit, cached per horizon.
double noiseless_population(const SingletChannelSpec& spec, double horizon) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double, double>, double> memo;
  const auto key = std::make_tuple(spec.n_qubits, spec.lambda_h, spec.lambda_i, horizon);
  {
    std::lock_guard lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const auto model = SingletModel::build(
      spec, InhomogeneousNoiseSpec{std::vector<double>(static_cast<std::size_t>(spec.n_qubits), 0.0)});
  const auto rho0 = DensityMatrix::fully_polarized(model.basis->space());
  const RVector x =
      matrix_exponential(model.l_p0.matrix() * horizon) * state_coordinates(*model.basis, rho0);
  const double p = model.projector.dot(x);
  std::lock_guard lock(mu);
  memo[key] = p;
  return p;
}

double dynamic_step(const ExperimentConfig& c) {
  if (c.run.dt > 0.0) return c.run.dt;
  // Shared by every grid point so trajectories see identical noise paths.
  OUNoiseSpec noise{c.noise.sigma2, c.noise.tau_c};
  double dt = noise.tau_c / 20.0;
  for (const auto& s : c.schedule.sequences) {
    const auto n = pulse_count_for_tag(s);
    for (double tb : c.grid.tau_bar) {
      const auto unit = sequence_from_tag(s, tb * static_cast<double>(n));
      dt = std::min(dt, default_dynamic_step(noise, repeat(unit, 1)));
    }
  }
  return dt;
}

std::vector<std::string> compute_point(const ExperimentConfig& c, const Point& p,
                                       std::size_t index, double shared_dt) {
  const Kind kind = kind_of(c.experiment);
  const std::uint64_t seed = derive_seed(c.run.seed, index);
  switch (kind) {
    case Kind::kTable: {
      const auto seq = sequence_from_tag(p.sequence, 1.0);
      const auto co = coefficients(seq);
      const double n = static_cast<double>(seq.size());
      return {p.sequence,        fmt(static_cast<long>(seq.size())), fmt(co.alpha1),
              fmt(co.alpha2),    fmt(co.alpha3a),                    fmt(co.alpha3b),
              fmt(co.alpha3b * n * n)};
    }
    case Kind::kSingletPeriodic: {
      const SingletChannelSpec spec{c.system.n_qubits, c.system.lambda_h, c.system.lambda_i};
      const auto noise = InhomogeneousNoiseSpec::linear_profile(c.system.n_qubits, p.delta);
      const auto unit = singlet_unit(c, p);
      const auto schedule = repeat(unit, repetitions_for(c.schedule.horizon, unit.t_p()));
      double pj0 = 0.0;
      long units = 0;
      std::string label = p.sequence;
      if (p.leading) {
        pj0 = leading_magnus_population(spec, noise, unit, schedule.duration);
        units = schedule.repetitions;
        label += "+leading";
      } else {
        const auto r =
            run_protected_preparation(spec, noise, schedule, run_options(c, Backend::kUnitPower));
        pj0 = r.p_j0;
        units = r.units;
      }
      return {c.experiment,  label,        fmt(p.delta), fmt(unit.t_p()), fmt(static_cast<long>(unit.size())),
              fmt(unit.density()), fmt(pj0), fmt(0.0),    fmt(units)};
    }
    case Kind::kSingletRandom: {
      const SingletChannelSpec spec{c.system.n_qubits, c.system.lambda_h, c.system.lambda_i};
      const auto noise = InhomogeneousNoiseSpec::linear_profile(c.system.n_qubits, p.delta);
      const auto opts = run_options(c, Backend::kMonteCarlo);
      const auto schedule = random_schedule(p.x, c.schedule.horizon, seed);
      const auto r = run_protected_preparation(spec, noise, schedule, opts);
      const double mean_pulses = opts.backend == Backend::kMonteCarlo
                                     ? static_cast<double>(r.units) / opts.seeds
                                     : p.x * c.schedule.horizon;
      return {c.experiment,  "random",        fmt(p.delta), fmt(c.schedule.horizon),
              fmt(mean_pulses), fmt(p.x),     fmt(r.p_j0),  fmt(r.p_j0_stderr),
              fmt(r.units)};
    }
    case Kind::kCluster: {
      const auto stab = linear_cluster_stabilizers(c.system.n_qubits);
      const auto pump = PumpSpec::for_stabilizers(stab, c.system.gamma);
      const auto noise = InhomogeneousNoiseSpec::linear_profile(c.system.n_qubits, p.delta);
      const auto unit = p.sequence == "none"
                            ? free_unit(1.0)
                            : sequence_from_tag(p.sequence,
                                                static_cast<double>(pulse_count_for_tag(p.sequence)) / p.x);
      ClusterOptions opts;
      opts.run = run_options(c, Backend::kSteadyState);
      opts.sequential = c.run.sequential;
      opts.slot = c.run.slot;
      const auto schedule = repeat(unit, repetitions_for(c.schedule.horizon, unit.t_p()));
      const auto r = run_protected_cluster(stab, pump, noise, schedule, opts);
      return {fmt(p.delta), fmt(p.x), p.sequence, fmt(r.fidelity), fmt(r.units)};
    }
    case Kind::kDynamic: {
      const SingletChannelSpec spec{c.system.n_qubits, c.system.lambda_h, c.system.lambda_i};
      const OUNoiseSpec noise{c.noise.sigma2, c.noise.tau_c};
      const auto n = pulse_count_for_tag(p.sequence);
      const auto unit = sequence_from_tag(p.sequence, p.x * static_cast<double>(n));
      const auto schedule = repeat(unit, repetitions_for(c.schedule.horizon, unit.t_p()));
      const auto space = HilbertSpec::qubits(spec.n_qubits);
      const auto basis = OperatorBasis::excitation_balanced(space);
      DynamicRunOptions opts;
      opts.n_traj = c.run.n_traj;
      opts.seed = c.run.seed;
      opts.dt = shared_dt;
      const auto r = monte_carlo_protected_run(
          build_pump_channel(spec, Parity::kEven), basis, noise, schedule,
          DensityMatrix::fully_polarized(space), basis->hermitian_coordinates(singlet_projector(space)),
          opts);
      const double p0 = noiseless_population(spec, schedule.duration);
      return {fmt(p.x),          fmt(noise.sigma2),          fmt(noise.tau_c),
              fmt(p0 - r.observable), fmt(r.observable_stderr), fmt(static_cast<long>(r.n_traj))};
    }
    case Kind::kFilter: {
      const auto unit = sequence_from_tag(p.sequence, *c.schedule.t_p);
      const auto schedule = repeat(unit, repetitions_for(c.schedule.horizon, unit.t_p()));
      return {fmt(p.x), fmt(memory_limit_filter(schedule, p.x).value)};
    }
  }
  throw std::logic_error("unhandled experiment kind");
}

int resolve_workers(int requested, std::size_t points) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(1, w);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), std::max<std::size_t>(points, 1)));
}

// Runs the pending points on a worker pool; `done` is invoked under a lock.
void execute(const ExperimentConfig& c, const Plan& plan, const std::vector<std::size_t>& pending,
             int workers,
             const std::function<void(std::size_t, std::vector<std::string>)>& done) {
  const double shared_dt = kind_of(c.experiment) == Kind::kDynamic ? dynamic_step(c) : 0.0;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::string error;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const std::size_t idx = pending[k];
      try {
        auto row = compute_point(c, plan.points[idx], idx, shared_dt);
        std::lock_guard lock(mu);
        done(idx, std::move(row));
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (!failed.exchange(true)) {
          const auto& p = plan.points[idx];
          error = "grid point " + std::to_string(idx) + " (sequence=" + p.sequence +
                  ", delta=" + format_number(p.delta) + ", x=" + format_number(p.x) +
                  ") failed: " + e.what();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failed) throw ExperimentError(error);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExperimentError("cannot write " + path.string());
  out << text;
  if (!out) throw ExperimentError("failed writing " + path.string());
}

}  // namespace

ResultTable sweep_figure(const ExperimentConfig& config, int workers) {
  validate(config);
  const Plan plan = make_plan(config);
  std::vector<std::vector<std::string>> rows(plan.points.size());
  std::vector<std::size_t> pending(plan.points.size());
  for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;
  execute(config, plan, pending, resolve_workers(workers, pending.size()),
          [&](std::size_t idx, std::vector<std::string> row) { rows[idx] = std::move(row); });
  return {plan.columns, std::move(rows)};
}

RunSummary run_experiment(const ExperimentConfig& input, const RunSettings& settings) {
  ExperimentConfig config = input;
  if (settings.seed) config.run.seed = *settings.seed;
  if (settings.workers) config.run.workers = *settings.workers;
  validate(config);
  const Plan plan = make_plan(config);

  std::filesystem::create_directories(settings.output_dir);
  const auto stem = settings.output_dir / config.experiment;
  const auto csv_path = std::filesystem::path(stem.string() + ".csv");
  const auto meta_path = std::filesystem::path(stem.string() + ".meta.json");
  const auto partial_path = std::filesystem::path(stem.string() + ".partial.jsonl");

  // Worker count does not change results, so it is left out of the identity.
  ExperimentConfig identity = config;
  identity.run.workers = 0;
  const json header = {{"config", to_json(identity)}, {"version", version_string()}};

  std::vector<std::vector<std::string>> rows(plan.points.size());
  std::vector<bool> have(plan.points.size(), false);
  std::size_t resumed = 0;
  if (settings.resume && std::filesystem::exists(partial_path)) {
    std::ifstream in(partial_path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        break;  // torn final line from an interrupted write
      }
      if (first) {
        if (j != header) {
          throw ConfigError("", "checkpoint " + partial_path.string() +
                                    " was written for a different config, seed or version");
        }
        first = false;
        continue;
      }
      const auto idx = j.at("index").get<std::size_t>();
      if (idx < rows.size() && !have[idx]) {
        rows[idx] = j.at("row").get<std::vector<std::string>>();
        have[idx] = true;
        ++resumed;
      }
    }
  }

  std::ofstream checkpoint;
  if (resumed > 0) {
    checkpoint.open(partial_path, std::ios::app | std::ios::binary);
  } else {
    checkpoint.open(partial_path, std::ios::trunc | std::ios::binary);
    checkpoint << header.dump() << '\n';
  }
  if (!checkpoint) throw ExperimentError("cannot write " + partial_path.string());
  checkpoint.flush();

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    if (!have[i]) pending.push_back(i);
  }
  const int workers = resolve_workers(config.run.workers, pending.size());
  if (settings.log) {
    settings.log(config.experiment + ": " + std::to_string(pending.size()) + " point(s) to run, " +
                 std::to_string(resumed) + " resumed, " + std::to_string(workers) + " worker(s)");
  }
  std::size_t finished = 0;
  execute(config, plan, pending, workers, [&](std::size_t idx, std::vector<std::string> row) {
    checkpoint << json{{"index", idx}, {"row", row}}.dump() << '\n';
    checkpoint.flush();
    rows[idx] = std::move(row);
    ++finished;
    if (settings.log) {
      settings.log("  point " + std::to_string(idx) + " done (" + std::to_string(finished) + "/" +
                   std::to_string(pending.size()) + ")");
    }
  });
  checkpoint.close();

  const ResultTable table{plan.columns, std::move(rows)};
  write_text(csv_path, table.to_csv());

  json meta;
  meta["experiment"] = config.experiment;
  meta["config"] = to_json(config);
  meta["seed"] = config.run.seed;
  meta["code_version"] = version_string();
  meta["created_utc"] = utc_timestamp();
  meta["columns"] = plan.columns;
  meta["points"] = plan.points.size();
  meta["resumed_points"] = resumed;
  meta["time_unit"] = kind_of(config.experiment) == Kind::kCluster ? "1/gamma" : "1/lambda_i";
  if (kind_of(config.experiment) == Kind::kCluster) meta["delta_unit"] = "gamma";
  if (kind_of(config.experiment) == Kind::kFilter || kind_of(config.experiment) == Kind::kDynamic) {
    meta["sequence"] = config.schedule.sequences.front();
  }
  if (kind_of(config.experiment) == Kind::kSingletPeriodic ||
      kind_of(config.experiment) == Kind::kSingletRandom || kind_of(config.experiment) == Kind::kDynamic) {
    meta["population_at"] = "fixed preparation horizon schedule.horizon";
  }
  write_text(meta_path, meta.dump(2) + "\n");
  std::filesystem::remove(partial_path);
  return {csv_path, meta_path, plan.points.size(), resumed};
}

ResultTable coefficient_table_for_times(const std::vector<double>& normalized_times,
                                        const std::string& label) {
  const auto seq = custom_unit(normalized_times, 1.0, label);
  const auto co = coefficients(seq);
  const double n = static_cast<double>(seq.size());
  return {{"sequence", "N", "alpha1", "alpha2", "alpha3a", "alpha3b", "alpha3b_N2"},
          {{label, fmt(static_cast<long>(seq.size())), fmt(co.alpha1), fmt(co.alpha2),
            fmt(co.alpha3a), fmt(co.alpha3b), fmt(co.alpha3b * n * n)}}};
}

ResultTable coefficient_table(const std::vector<std::string>& tags) {
  ExperimentConfig c = defaults_for("table1");
  c.schedule.sequences = tags;
  return sweep_figure(c, 1);
}

}  // namespace ddprep
