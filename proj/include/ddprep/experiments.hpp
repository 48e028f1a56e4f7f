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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ddprep/types.hpp"

namespace ddprep {

/// Config validation failure; `path` names the offending key (e.g. "grid.delta").
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : InvalidArgument(path.empty() ? message : path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A grid point or worker failed while running an experiment.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Declarative experiment description. Times are in units of the slow rate
/// (1/lambda_i for singlet experiments, 1/gamma for the cluster experiment);
/// frequencies and rates share the inverse unit.
struct ExperimentConfig {
  std::string experiment;

  struct System {
    int n_qubits = 6;
    double lambda_h = 100.0;
    double lambda_i = 1.0;
    double gamma = 1.0;  // cluster pump rate
  } system;

  struct Noise {
    double sigma2 = 1.0;  // dynamic noise only
    double tau_c = 1.0;
  } noise;

  struct ScheduleBlock {
    std::vector<std::string> sequences;
    std::optional<double> t_p;      // fixed unit duration
    std::optional<double> tau_bar;  // fixed mean pulse interval
    std::optional<double> nbar;     // fixed pulse density
    double horizon = 50.0;          // preparation time
  } schedule;

  struct Grid {
    std::vector<double> delta;
    std::vector<double> nbar;
    std::vector<double> tau_bar;
    std::vector<double> omega;
  } grid;

  struct Run {
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = available parallelism
    std::string backend;  // empty = experiment default
    double tolerance = 1e-7;
    int seeds = 8;
    int n_traj = 256;
    double dt = 0.0;  // dynamic noise RK4 step, 0 = automatic
    bool sequential = false;  // cluster: pump stabilizers one at a time
    double slot = 0.1;
  } run;
};

/// Parses a JSON document, fills defaults and validates strictly (unknown keys
/// are errors). Grid entries accept a list or {"logspace": [lo, hi, count]}
/// (base-10 exponents) or {"linspace": [lo, hi, count]}.
ExperimentConfig parse_config(std::string_view text);
/// Canonical JSON of a validated config (grids expanded to lists).
std::string serialize_config(const ExperimentConfig& config);

struct ExperimentInfo {
  std::string id;
  std::string description;
  std::string anchor;
};

const std::vector<ExperimentInfo>& experiment_registry();
/// One line per experiment: "<id> — <description> (<anchor>)".
std::string list_experiments();

/// Rectangular table of pre-formatted cells.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Header plus rows, comma separated, LF line endings.
  std::string to_csv() const;
};

/// Locale-independent shortest round-trip formatting.
std::string format_number(double value);

struct RunSettings {
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides run.seed
  std::optional<int> workers;         // overrides run.workers
  bool resume = false;
  std::function<void(const std::string&)> log;  // progress lines, may be empty
};

struct RunSummary {
  std::filesystem::path csv_path;
  std::filesystem::path meta_path;
  std::size_t points = 0;
  std::size_t resumed = 0;
};

/// Runs the sweep and writes <experiment>.csv and <experiment>.meta.json.
/// Finished points are appended to <experiment>.partial.jsonl as they
/// complete; with `resume` they are reloaded instead of recomputed.
RunSummary run_experiment(const ExperimentConfig& config, const RunSettings& settings);

/// Computes the table in memory without touching the filesystem.
ResultTable sweep_figure(const ExperimentConfig& config, int workers = 1);

/// Table-I style rows for explicit sequences.
ResultTable coefficient_table(const std::vector<std::string>& tags);
ResultTable coefficient_table_for_times(const std::vector<double>& normalized_times,
                                        const std::string& label);

std::string version_string();

}  // namespace ddprep
