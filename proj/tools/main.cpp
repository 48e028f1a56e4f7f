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

// ddprep command line: run / list / coefficients.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddprep/experiments.hpp"
#include "ddprep/pulses.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ddprep::InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whitespace-separated normalized arrival times; '#' starts a comment.
std::vector<double> read_times(const std::filesystem::path& path) {
  std::istringstream text(read_file(path));
  std::vector<double> times;
  std::string line;
  int line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw ddprep::InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                                      ": not a number: '" + token + "'");
      }
      times.push_back(v);
    }
  }
  return times;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<int> workers, bool resume) {
  const auto config = ddprep::parse_config(read_file(config_path));
  ddprep::RunSettings settings;
  settings.output_dir = out_dir;
  settings.seed = seed;
  settings.workers = workers;
  settings.resume = resume;
  settings.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const auto summary = ddprep::run_experiment(config, settings);
  std::cout << summary.csv_path.string() << '\n' << summary.meta_path.string() << '\n';
  return kOk;
}

int cmd_coefficients(const std::string& arg) {
  ddprep::ResultTable table;
  if (ddprep::is_valid_tag(arg) && arg != "random") {
    table = ddprep::coefficient_table({arg});
  } else if (std::filesystem::is_regular_file(arg)) {
    table = ddprep::coefficient_table_for_times(read_times(arg),
                                                std::filesystem::path(arg).stem().string());
  } else {
    throw ddprep::InvalidArgument("'" + arg +
                                  "' is neither a sequence tag (none, cpmg, udd<N>, cdd<k>) "
                                  "nor a readable times file");
  }
  std::cout << table.to_csv();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical-decoupling protected dissipative state preparation"};
  app.set_version_flag("--version", ddprep::version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run an experiment config and write CSV + meta JSON");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--workers", workers, "Worker threads (0 = available parallelism)")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--resume", resume, "Reuse finished grid points from a checkpoint");

  app.add_subcommand("list", "List registered experiments");

  std::string coeff_arg;
  auto* coeff = app.add_subcommand("coefficients", "Magnus coefficients of a basic unit");
  coeff->add_option("sequence", coeff_arg, "Sequence tag or file of normalized pulse times")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, seed, workers, resume);
    if (*coeff) return cmd_coefficients(coeff_arg);
    std::cout << ddprep::list_experiments();
    return kOk;
  } catch (const ddprep::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kRuntime;
  }
}
