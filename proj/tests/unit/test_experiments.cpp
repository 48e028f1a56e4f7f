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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ddprep/experiments.hpp"

namespace ddprep {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ddprep_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

TEST(Config, DefaultsAndRanges) {
  const auto c = parse_config(R"({"experiment": "fig4", "grid": {"delta": {"logspace": [0, 2, 3]}}})");
  ASSERT_EQ(c.grid.delta.size(), 3u);
  EXPECT_NEAR(c.grid.delta[1], 10.0, 1e-12);
  EXPECT_EQ(c.system.n_qubits, 6);
  EXPECT_FALSE(c.grid.nbar.empty());
  const auto l = parse_config(R"({"experiment": "filter", "grid": {"omega": {"linspace": [0, 1, 5]}}})");
  EXPECT_DOUBLE_EQ(l.grid.omega[2], 0.5);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(error_path(R"({"system": {}})"), "");
  EXPECT_EQ(error_path(R"({"experiment": "fig9"})"), "experiment");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "grid": {"delta": [1, -2]}})"), "grid.delta");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "grid": {"deltas": [1]}})"), "grid.deltas");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "system": {"n_qubits": 5}})"), "system.n_qubits");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "system": {"n_qubits": "6"}})"), "system.n_qubits");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "schedule": {"sequences": ["cpmg", "udd0"]}})"),
            "schedule.sequences[1]");
  EXPECT_EQ(error_path(R"({"experiment": "fig3b", "schedule": {"tau_bar": null}})"), "schedule.tau_bar");
  EXPECT_EQ(error_path(R"({"experiment": "fig5", "schedule": {"sequences": ["udd4", "none"]}})"),
            "schedule.sequences[1]");
  EXPECT_EQ(error_path(R"({"experiment": "fig6", "run": {"backend": "unit_power"}})"), "run.backend");
  EXPECT_EQ(error_path(R"({"experiment": "fig4", "run": {"workers": -1}})"), "run.workers");
  EXPECT_EQ(error_path("{not json"), "");
  EXPECT_THROW(parse_config("[]"), ConfigError);
}

TEST(Config, RoundTripIsIdentity) {
  for (const auto& info : experiment_registry()) {
    const auto a = parse_config(R"({"experiment": ")" + info.id + R"("})");
    const auto text = serialize_config(a);
    const auto b = parse_config(text);
    EXPECT_EQ(serialize_config(b), text) << info.id;
  }
}

TEST(Registry, ListsEveryExperiment) {
  EXPECT_GE(experiment_registry().size(), 8u);
  EXPECT_NE(list_experiments().find("table1 — Magnus coefficients"), std::string::npos);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1234567.0), "1234567");
  EXPECT_EQ(format_number(-0.03125), "-0.03125");
  EXPECT_EQ(format_number(0.0), "0");
  const ResultTable t{{"a", "b"}, {{"1", "2"}}};
  EXPECT_EQ(t.to_csv(), "a,b\n1,2\n");
}

TEST(Run, Table1MatchesKnownCoefficients) {
  const auto table = sweep_figure(parse_config(R"({"experiment": "table1"})"));
  bool found = false;
  for (const auto& row : table.rows) {
    if (row[0] != "cpmg") continue;
    found = true;
    EXPECT_EQ(row[1], "2");
    EXPECT_NEAR(std::stod(row[4]), 1.0 / 32.0, 1e-15);
    EXPECT_NEAR(std::stod(row[5]), -1.0 / 96.0, 1e-15);
  }
  EXPECT_TRUE(found);
}

constexpr const char* kSmallSweep = R"({
  "experiment": "fig4",
  "system": {"n_qubits": 2, "lambda_h": 5},
  "schedule": {"sequences": ["cpmg", "udd3"], "horizon": 5},
  "grid": {"delta": [0.5, 2, 8], "nbar": [20, 80]}
})";

TEST(Run, DeterministicAcrossWorkerCounts) {
  const auto c = parse_config(kSmallSweep);
  const auto one = sweep_figure(c, 1).to_csv();
  const auto four = sweep_figure(c, 4).to_csv();
  EXPECT_EQ(one, four);
  const auto random = parse_config(R"({"experiment": "fig6", "system": {"n_qubits": 2},
    "schedule": {"horizon": 2}, "grid": {"delta": [1, 3], "nbar": [10, 40]}, "run": {"seeds": 3, "seed": 9}})");
  EXPECT_EQ(sweep_figure(random, 1).to_csv(), sweep_figure(random, 3).to_csv());
}

TEST(Run, WritesCsvAndMetadata) {
  const auto dir = scratch_dir("meta");
  RunSettings s;
  s.output_dir = dir;
  s.seed = 17;
  s.workers = 2;
  const auto summary = run_experiment(parse_config(kSmallSweep), s);
  EXPECT_EQ(summary.points, 12u);
  const auto csv = slurp(summary.csv_path);
  EXPECT_EQ(csv.rfind("experiment,sequence,delta,t_p,n_pulses,nbar,p_j0,p_j0_stderr,units_to_converge\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto meta = slurp(summary.meta_path);
  EXPECT_NE(meta.find("\"seed\": 17"), std::string::npos);
  EXPECT_NE(meta.find("\"code_version\""), std::string::npos);
  EXPECT_NE(meta.find("\"created_utc\""), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "fig4.partial.jsonl"));

  // byte-identical on a rerun
  const auto again = run_experiment(parse_config(kSmallSweep), s);
  EXPECT_EQ(slurp(again.csv_path), csv);
}

TEST(Run, ResumeReusesCheckpoint) {
  const auto dir = scratch_dir("resume");
  const auto c = parse_config(kSmallSweep);
  RunSettings s;
  s.output_dir = dir;
  s.workers = 1;
  const auto full = slurp(run_experiment(c, s).csv_path);
  fs::remove(dir / "fig4.csv");

  // Interrupt the run after three finished points.
  RunSettings crash = s;
  crash.log = [](const std::string& line) {
    if (line.find("(3/") != std::string::npos) throw std::runtime_error("interrupted");
  };
  EXPECT_THROW(run_experiment(c, crash), ExperimentError);
  EXPECT_TRUE(fs::exists(dir / "fig4.partial.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "fig4.csv"));

  s.resume = true;
  const auto resumed = run_experiment(c, s);
  EXPECT_EQ(resumed.resumed, 3u);
  EXPECT_EQ(slurp(resumed.csv_path), full);

  // a different seed may not reuse the checkpoint
  EXPECT_THROW(run_experiment(c, crash), ExperimentError);
  RunSettings other = s;
  other.seed = 99;
  EXPECT_THROW(run_experiment(c, other), ConfigError);
}

TEST(Run, ResumeRejectsForeignCheckpoint) {
  const auto dir = scratch_dir("foreign");
  {
    std::ofstream out(dir / "fig4.partial.jsonl");
    out << R"({"config": {"experiment": "other"}, "version": "0"})" << "\n";
  }
  RunSettings s;
  s.output_dir = dir;
  s.resume = true;
  EXPECT_THROW(run_experiment(parse_config(kSmallSweep), s), ConfigError);
}

TEST(Run, CoefficientTables) {
  const auto t = coefficient_table({"udd4"});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(std::stod(t.rows[0][5]), -3.04e-3, 0.005e-3);
  const auto custom = coefficient_table_for_times({0.25, 0.75}, "mine");
  EXPECT_EQ(custom.rows[0][0], "mine");
  EXPECT_NEAR(std::stod(custom.rows[0][4]), 0.03125, 1e-15);
}

}  // namespace
}  // namespace ddprep
