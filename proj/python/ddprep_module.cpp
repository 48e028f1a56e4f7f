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

// Python bindings for the main operations.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ddprep/dynamic_noise.hpp"
#include "ddprep/experiments.hpp"
#include "ddprep/magnus.hpp"
#include "ddprep/pulses.hpp"

namespace py = pybind11;

namespace {

py::dict coefficient_dict(const ddprep::PulseSequence& seq) {
  const auto c = ddprep::coefficients(seq);
  py::dict d;
  d["label"] = seq.label();
  d["n_pulses"] = seq.size();
  d["alpha1"] = c.alpha1;
  d["alpha2"] = c.alpha2;
  d["alpha3a"] = c.alpha3a;
  d["alpha3b"] = c.alpha3b;
  return d;
}

py::dict table_dict(const ddprep::ResultTable& t) {
  py::dict d;
  d["columns"] = t.columns;
  d["rows"] = t.rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ddprep, m) {
  m.doc() = "Dynamical-decoupling protected dissipative state preparation";
  m.attr("__version__") = ddprep::version_string();

  m.def(
      "sequence",
      [](const std::string& tag, double t_p) { return ddprep::sequence_from_tag(tag, t_p).times(); },
      py::arg("tag"), py::arg("t_p") = 1.0, "Pulse times of a named basic unit.");

  m.def(
      "coefficients",
      [](const std::string& tag) { return coefficient_dict(ddprep::sequence_from_tag(tag, 1.0)); },
      py::arg("tag"), "Magnus coefficients of a named unit (normalized duration).");
  m.def(
      "coefficients",
      [](const std::vector<double>& times, const std::string& label) {
        return coefficient_dict(ddprep::custom_unit(times, 1.0, label));
      },
      py::arg("times"), py::arg("label") = "custom",
      "Magnus coefficients of normalized pulse times in (0, 1).");

  m.def(
      "scaled_coefficient",
      [](const std::vector<double>& times, long l, const std::string& order, bool direct) {
        const auto seq = ddprep::custom_unit(times, 1.0, "custom");
        const auto o = ddprep::parse_magnus_order(order);
        return direct ? ddprep::coefficients_repeated_direct(seq, l, o)
                      : ddprep::coefficients_scaled(seq, l, o);
      },
      py::arg("times"), py::arg("repetitions"), py::arg("order"), py::arg("direct") = false,
      "Coefficient of a unit repeated `repetitions` times; `direct` integrates the long unit.");

  m.def(
      "filter",
      [](const std::vector<double>& times, double total, double omega) {
        return ddprep::memory_limit_filter(times, total, omega).value;
      },
      py::arg("times"), py::arg("total"), py::arg("omega"));
  m.def(
      "decay_exponent",
      [](double sigma2, double tau_c, const std::vector<double>& times, double total) {
        return ddprep::filtered_decay_exponent({sigma2, tau_c}, times, total);
      },
      py::arg("sigma2"), py::arg("tau_c"), py::arg("times"), py::arg("total"),
      "Single-qubit dephasing exponent under Ornstein-Uhlenbeck noise.");

  m.def("list_experiments", [] {
    py::list out;
    for (const auto& e : ddprep::experiment_registry()) {
      py::dict d;
      d["id"] = e.id;
      d["description"] = e.description;
      d["anchor"] = e.anchor;
      out.append(d);
    }
    return out;
  });

  m.def(
      "parse_config",
      [](const std::string& text) { return ddprep::serialize_config(ddprep::parse_config(text)); },
      py::arg("text"), "Validated canonical JSON with defaults filled in.");

  m.def(
      "sweep",
      [](const std::string& text, int workers) {
        const auto config = ddprep::parse_config(text);
        ddprep::ResultTable t;
        {
          py::gil_scoped_release release;
          t = ddprep::sweep_figure(config, workers);
        }
        return table_dict(t);
      },
      py::arg("config"), py::arg("workers") = 1, "Runs a config in memory; cells are strings.");

  m.def(
      "run",
      [](const std::string& text, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
         std::optional<int> workers, bool resume) {
        const auto config = ddprep::parse_config(text);
        ddprep::RunSettings s;
        s.output_dir = out;
        s.seed = seed;
        s.workers = workers;
        s.resume = resume;
        ddprep::RunSummary r;
        {
          py::gil_scoped_release release;
          r = ddprep::run_experiment(config, s);
        }
        py::dict d;
        d["csv"] = r.csv_path;
        d["meta"] = r.meta_path;
        d["points"] = r.points;
        d["resumed"] = r.resumed;
        return d;
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("workers") = py::none(),
      py::arg("resume") = false, "Runs a config and writes CSV and meta JSON.");
}
