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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset by number (e.g. `ddprep_acceptance 1 2 7`); the default runs all.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddprep/dynamic_noise.hpp"
#include "ddprep/experiments.hpp"
#include "ddprep/magnus.hpp"
#include "ddprep/pulses.hpp"
#include "ddprep/singlet.hpp"
#include "ddprep/toggling.hpp"

namespace ddprep {
namespace {

struct Outcome {
  enum class Status { kPass, kFail, kSkip } status = Status::kFail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::kFail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

double column(const ResultTable& t, const std::vector<std::string>& row, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("missing column " + name);
  return std::stod(row[static_cast<std::size_t>(it - t.columns.begin())]);
}

std::string cell(const ResultTable& t, const std::vector<std::string>& row, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("missing column " + name);
  return row[static_cast<std::size_t>(it - t.columns.begin())];
}

// Values to three significant figures, rounded and truncated.
double to_sig3(double v, bool truncate) {
  if (v == 0.0) return 0.0;
  const double scale = std::pow(10.0, std::floor(std::log10(std::abs(v))) - 2.0);
  const double q = v / scale;
  return (truncate ? std::trunc(q) : std::round(q)) * scale;
}

bool matches_sig3(double computed, double table) {
  if (table == 0.0) return std::abs(computed) <= 1e-12;
  const double tol = 1e-9 * std::abs(table);
  return std::abs(to_sig3(computed, false) - table) <= tol ||
         std::abs(to_sig3(computed, true) - table) <= tol;
}

// ---------------------------------------------------------------------------

struct TableEntry {
  const char* tag;
  int n;
  double a1, a2, a3a, a3b, a3b_n2;
};

// Reference coefficient table, 3 significant figures.
const std::vector<TableEntry>& table_one() {
  static const std::vector<TableEntry> t = {
      {"none", 0, 1, 0, 0, 0, 0},
      {"cpmg", 2, 0, 0, 3.12e-2, -1.04e-2, -4.16e-2},
      {"cdd3", 5, 0, 0, 0, -2.60e-3, -6.51e-2},
      {"cdd4", 10, 0, 0, 0, -6.51e-4, -6.51e-2},
      {"udd3", 3, 0, 0, 0, -5.05e-3, -4.55e-2},
      {"udd4", 4, 0, 0, 0, -3.04e-3, -4.86e-2},
      {"udd5", 5, 0, 0, 0, -2.04e-3, -5.11e-2},
  };
  return t;
}

Outcome ac1() {
  std::string detail;
  bool ok = true;
  for (const auto& e : table_one()) {
    const auto seq = sequence_from_tag(e.tag, 1.0);
    const auto c = coefficients(seq);
    const bool n_ok = static_cast<int>(seq.size()) == e.n;
    const bool low_ok = std::abs(c.alpha1 - e.a1) <= 1e-12 && std::abs(c.alpha2 - e.a2) <= 1e-12;
    const bool third_ok = matches_sig3(c.alpha3a, e.a3a) && matches_sig3(c.alpha3b, e.a3b);
    if (!(n_ok && low_ok && third_ok)) {
      ok = false;
      detail += std::string(e.tag) + " off (a3a=" + num(c.alpha3a) + ", a3b=" + num(c.alpha3b) + "); ";
    }
  }
  const auto cpmg = coefficients(cpmg_unit(1.0));
  detail += "cpmg a3a=" + num(cpmg.alpha3a) + " a3b=" + num(cpmg.alpha3b) +
            "; cdd3/cdd4 built as Thue-Morse concatenations and checked";
  return verdict(ok, detail);
}

Outcome ac2() {
  bool ok = true;
  std::string detail;
  for (const auto& e : table_one()) {
    const std::string tag = e.tag;
    if (tag != "cpmg" && tag.rfind("udd", 0) != 0) continue;
    const auto seq = sequence_from_tag(tag, 1.0);
    const double n = static_cast<double>(seq.size());
    const double v = coefficients(seq).alpha3b * n * n;
    const bool in_band = v >= -5.2e-2 && v <= -4.0e-2;
    const double rel = std::abs(v - e.a3b_n2) / std::abs(e.a3b_n2);
    ok = ok && in_band && rel <= 0.03;
    detail += tag + "=" + num(v) + " (" + num(100 * rel, 2) + "%) ";
  }
  return verdict(ok, detail);
}

Outcome ac3() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    // even pulse counts: the toggling pattern repeats with the unit
    const int n = 2 * (1 + static_cast<int>(rng() % 5));
    std::vector<double> t;
    while (static_cast<int>(t.size()) < n) {
      const double x = u(rng);
      bool fresh = x > 1e-6 && x < 1 - 1e-6;
      for (double y : t) fresh = fresh && std::abs(x - y) > 1e-6;
      if (fresh) t.push_back(x);
    }
    std::sort(t.begin(), t.end());
    const PulseSequence seq(1.0, t, "random");
    for (long l : {2L, 3L, 5L}) {
      for (auto order : {MagnusOrder::k2, MagnusOrder::k3a, MagnusOrder::k3b}) {
        worst = std::max(worst, std::abs(coefficients_repeated_direct(seq, l, order) -
                                         coefficients_scaled(seq, l, order)));
      }
    }
  }
  return verdict(worst <= 1e-12, "max |direct - l^(1-n) alpha_n| = " + num(worst, 3) +
                                     " over 100 sequences x 3 orders x l in {2,3,5}");
}

Outcome ac4() {
  const SingletChannelSpec spec{6, 100.0, 1.0};
  RunOptions opts{Backend::kSteadyState};
  opts.steady.tolerance = 1e-9;
  const auto r = run_protected_preparation(spec, InhomogeneousNoiseSpec::linear_profile(6, 0.0),
                                           repeat(free_unit(1.0), 1), opts);
  const auto check = r.state.check();
  return verdict(std::abs(r.p_j0 - 0.40) <= 0.05 && check.ok,
                 "steady P(J=0) = " + num(r.p_j0, 6) + " after " + std::to_string(r.units) +
                     " x 1/lambda_i (target 0.40 +- 0.05)");
}

ExperimentConfig config(const std::string& json) { return parse_config(json); }

Outcome ac5() {
  const auto table = sweep_figure(config(R"({
    "experiment": "fig3b",
    "system": {"n_qubits": 6, "lambda_h": 10},
    "schedule": {"sequences": ["cpmg", "cdd3", "udd5", "udd10"], "tau_bar": 1e-4},
    "grid": {"delta": {"logspace": [1, 3.5, 6]}}
  })"), 1);
  std::map<std::string, std::vector<double>> by_delta;
  for (const auto& row : table.rows) by_delta[cell(table, row, "delta")].push_back(column(table, row, "p_j0"));
  double worst = 0.0;
  double lo = 1.0, hi = 0.0;
  for (const auto& [d, ps] : by_delta) {
    const auto [mn, mx] = std::minmax_element(ps.begin(), ps.end());
    worst = std::max(worst, *mx - *mn);
    lo = std::min(lo, *mn);
    hi = std::max(hi, *mx);
  }
  return verdict(worst <= 0.02 && by_delta.size() == 6,
                 "max spread across cpmg/cdd3/udd5/udd10 = " + num(worst, 3) +
                     " over delta in [10, 10^3.5]; P(J=0) range " + num(lo, 3) + ".." + num(hi, 3));
}

Outcome ac6() {
  const auto table = sweep_figure(config(R"({
    "experiment": "fig5",
    "system": {"n_qubits": 6, "lambda_h": 100},
    "schedule": {"sequences": ["cpmg", "udd3"], "nbar": 562.341325190349},
    "grid": {"delta": {"logspace": [0, 2.5, 6]}}
  })"), 1);
  std::map<std::string, double> exact, leading;
  for (const auto& row : table.rows) {
    const auto seq = cell(table, row, "sequence");
    const auto key = cell(table, row, "delta");
    if (seq.size() > 8 && seq.substr(seq.size() - 8) == "+leading") {
      leading[seq.substr(0, seq.size() - 8) + "@" + key] = column(table, row, "p_j0");
    } else {
      exact[seq + "@" + key] = column(table, row, "p_j0");
    }
  }
  double worst = 0.0;
  for (const auto& [k, v] : exact) worst = std::max(worst, std::abs(v - leading.at(k)));
  return verdict(worst <= 0.02 && exact.size() == 12,
                 "max |exact - leading| = " + num(worst, 3) + " for cpmg, udd3 over delta in [1, 10^2.5]");
}

struct Plane {
  double c0, p_delta, p_tau;
};

// Least squares log y = c0 + p_delta log delta + p_tau log tau.
Plane fit_plane(const std::vector<std::array<double, 3>>& pts) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    a(k, 0) = 1.0;
    a(k, 1) = std::log(pts[i][0]);
    a(k, 2) = std::log(pts[i][1]);
    y(k) = std::log(pts[i][2]);
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
  return {c(0), c(1), c(2)};
}

double reference_population(int n, double lambda_h, double horizon) {
  const auto model = SingletModel::build({n, lambda_h, 1.0}, InhomogeneousNoiseSpec::linear_profile(n, 0.0));
  const RVector x = matrix_exponential(model.l_p0.matrix() * horizon) *
                    state_coordinates(*model.basis, DensityMatrix::fully_polarized(model.basis->space()));
  return model.projector.dot(x);
}

Outcome ac7() {
  const double horizon = 50.0;
  const double p0 = reference_population(6, 100.0, horizon);
  // periodic: CPMG over delta x pulse density
  const auto periodic = sweep_figure(config(R"({
    "experiment": "fig4",
    "system": {"n_qubits": 6, "lambda_h": 100},
    "schedule": {"sequences": ["cpmg"], "horizon": 50},
    "grid": {"delta": {"logspace": [0, 1, 5]}, "nbar": {"logspace": [3, 4, 5]}}
  })"), 1);
  std::vector<std::array<double, 3>> pts;
  double min_def = 1.0;
  for (const auto& row : periodic.rows) {
    const double def = p0 - column(periodic, row, "p_j0");
    min_def = std::min(min_def, def);
    pts.push_back({column(periodic, row, "delta"), 1.0 / column(periodic, row, "nbar"), def});
  }
  if (min_def <= 0.0) return fail("non-positive periodic deficit " + num(min_def));
  const auto per = fit_plane(pts);

  const auto random = sweep_figure(config(R"({
    "experiment": "fig6",
    "system": {"n_qubits": 6, "lambda_h": 100},
    "schedule": {"horizon": 50},
    "grid": {"delta": {"logspace": [-1, -0.5, 5]}, "nbar": {"logspace": [2.5, 3.5, 5]}},
    "run": {"backend": "poisson_ensemble"}
  })"), 1);
  pts.clear();
  min_def = 1.0;
  for (const auto& row : random.rows) {
    const double def = p0 - column(random, row, "p_j0");
    min_def = std::min(min_def, def);
    pts.push_back({column(random, row, "delta"), 1.0 / column(random, row, "nbar"), def});
  }
  if (min_def <= 0.0) return fail("non-positive random deficit " + num(min_def));
  const auto rnd = fit_plane(pts);
  const bool ok = std::abs(per.p_delta - 2.0) <= 0.3 && std::abs(per.p_tau - 2.0) <= 0.3 &&
                  std::abs(rnd.p_tau - 1.0) <= 0.3;
  return verdict(ok, "periodic exponents delta " + num(per.p_delta, 3) + ", tau " + num(per.p_tau, 3) +
                         "; random tau exponent " + num(rnd.p_tau, 3) + " (delta " + num(rnd.p_delta, 3) + ")");
}

Outcome ac8() {
  const auto table = sweep_figure(config(R"({
    "experiment": "fig8",
    "system": {"n_qubits": 4, "gamma": 1},
    "schedule": {"sequences": ["none", "cpmg"]},
    "grid": {"delta": [0, 0.125, 0.25, 0.375, 0.5], "nbar": {"logspace": [0, 3, 7]}}
  })"), 1);
  // Steady-state fidelities at 1 - 1e-13 level fluctuate by round-off.
  constexpr double kRoundoff = 1e-9;
  std::map<double, double> off;
  std::map<double, std::vector<std::pair<double, double>>> on;
  double zero_min = 1.0;
  for (const auto& row : table.rows) {
    const double d = column(table, row, "delta");
    const double f = column(table, row, "fidelity");
    if (d == 0.0) zero_min = std::min(zero_min, f);
    if (cell(table, row, "sequence") == "none") {
      off[d] = f;
    } else {
      on[d].push_back({column(table, row, "nbar"), f});
    }
  }
  bool a = zero_min >= 0.99;
  bool b = true, c = true;
  std::string detail = "delta=0 fidelity >= " + num(zero_min, 6) + "; ";
  for (auto& [d, curve] : on) {
    if (d == 0.0) continue;
    std::sort(curve.begin(), curve.end());
    for (std::size_t i = 1; i < curve.size(); ++i) b = b && curve[i].second >= curve[i - 1].second - kRoundoff;
    b = b && curve.back().second >= 0.95;
    for (const auto& [n, f] : curve) c = c && f > off.at(d);
    detail += "d=" + num(d, 3) + ": off " + num(off.at(d), 3) + ", on " + num(curve.front().second, 4) + ".." +
              num(curve.back().second, 6) + "; ";
  }
  detail += std::string("(a) ") + (a ? "ok" : "FAIL") + " (b) " + (b ? "ok" : "FAIL") + " (c) " + (c ? "ok" : "FAIL");
  return verdict(a && b && c, detail);
}

Outcome ac9() {
  // (a) single qubit, no pumping: coherence vs Gaussian-dephasing oracle
  const auto space = HilbertSpec::qubits(1);
  const auto basis = OperatorBasis::full(space);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const LindbladChannel idle{CMatrix::Zero(2, 2), {}};
  const OUNoiseSpec noise{1.0, 1.0};
  DynamicRunOptions opts;
  opts.n_traj = 256;
  opts.seed = 11;
  std::string detail;
  bool a = true;
  for (const auto& sched : {repeat(free_unit(0.5), 1), repeat(cpmg_unit(0.25), 8)}) {
    const auto r = monte_carlo_protected_run(idle, basis, noise, sched, DensityMatrix::pure(space, plus),
                                             basis->hermitian_coordinates(CMatrix(op::pauli_x())), opts);
    const double chi = filtered_decay_exponent(noise, flatten(sched), sched.duration);
    const double oracle = std::exp(-chi);
    const double z = std::abs(r.observable - oracle) / r.observable_stderr;
    a = a && z <= 3.0;
    detail += sched.unit.label() + ": MC " + num(r.observable, 5) + " vs " + num(oracle, 5) + " (" + num(z, 2) +
              " SE); ";
  }
  // free evolution also has a closed form
  const double closed = std::exp(-4.0 * (0.5 - 1.0 + std::exp(-0.5)));
  const double via_filter = std::exp(-filtered_decay_exponent(noise, std::vector<double>{}, 0.5));
  a = a && std::abs(closed - via_filter) <= 1e-8;

  // (b) 4-qubit singlet scheme under OU noise
  const auto table = sweep_figure(config(R"({
    "experiment": "dynamic_noise_scaling",
    "system": {"n_qubits": 4, "lambda_h": 10},
    "noise": {"sigma2": 4, "tau_c": 1},
    "schedule": {"sequences": ["cpmg"], "horizon": 2},
    "grid": {"tau_bar": {"logspace": [-2.2, -1.2, 5]}},
    "run": {"n_traj": 256, "seed": 3}
  })"), 1);
  std::vector<std::pair<double, double>> curve;
  for (const auto& row : table.rows) {
    curve.push_back({column(table, row, "tau_bar"), column(table, row, "infidelity")});
  }
  const auto fit = suppression_exponent(curve);
  const bool b = std::abs(fit.exponent - 2.0) <= 0.3 && fit.rejected.empty();
  detail += "(a) " + std::string(a ? "ok" : "FAIL") + "; (b) exponent " + num(fit.exponent, 3) + " over tau_bar " +
            num(curve.front().first, 3) + ".." + num(curve.back().first, 3);
  return verdict(a && b, detail);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac10() {
  std::string detail;
  // determinism across runs and worker counts
  const auto base = std::filesystem::temp_directory_path() / "ddprep_acceptance";
  std::filesystem::remove_all(base);
  const char* sweeps[] = {
      R"({"experiment": "fig4", "system": {"n_qubits": 4, "lambda_h": 10},
          "schedule": {"sequences": ["cpmg", "udd3", "cdd3"], "horizon": 10},
          "grid": {"delta": [1, 3, 10], "nbar": [100, 300]}, "run": {"seed": 5}})",
      R"({"experiment": "fig6", "system": {"n_qubits": 4, "lambda_h": 10},
          "schedule": {"horizon": 2}, "grid": {"delta": [1, 3], "nbar": [50, 100]},
          "run": {"seed": 5, "seeds": 4}})",
  };
  bool det = true;
  int idx = 0;
  for (const char* text : sweeps) {
    const auto c = config(text);
    std::vector<std::string> bodies;
    for (int workers : {1, 4, 4}) {
      RunSettings s;
      s.output_dir = base / (std::to_string(idx) + "_" + std::to_string(bodies.size()));
      s.workers = workers;
      bodies.push_back(slurp(run_experiment(c, s).csv_path));
    }
    det = det && bodies[0] == bodies[1] && bodies[1] == bodies[2] && !bodies[0].empty();
    ++idx;
  }
  std::filesystem::remove_all(base);
  detail += std::string("byte-identical CSV (1/4/4 workers): ") + (det ? "ok" : "FAIL") + "; ";

  bool round = true;
  for (const auto& info : experiment_registry()) {
    const auto text = serialize_config(config(R"({"experiment": ")" + info.id + R"("})"));
    round = round && serialize_config(config(text)) == text;
  }
  detail += std::string("config round trip: ") + (round ? "ok" : "FAIL") + "; ";

  // invariants on the 6-qubit singlet model
  const SingletChannelSpec spec{6, 100.0, 1.0};
  const auto model = SingletModel::build(spec, InhomogeneousNoiseSpec::linear_profile(6, 30.0));
  const auto r = run_protected_preparation(spec, InhomogeneousNoiseSpec::linear_profile(6, 30.0),
                                           repeat(udd_unit(3, 3e-3), 2000));
  const auto chk = r.state.check();
  const bool state_ok = chk.ok && r.trace_drift <= 1e-8 && chk.min_eigenvalue >= -1e-8;
  detail += "state trace drift " + num(r.trace_drift, 2) + ", min eig " + num(chk.min_eigenvalue, 2) + "; ";

  const auto& a = model.l_p0;
  const auto& b = model.l_n;
  const auto c = poisson_bracket(a, b);
  const double scale = a.matrix().norm() * b.matrix().norm();
  const double anti = (poisson_bracket(a, b) + poisson_bracket(b, a)).matrix().norm() / scale;
  const double jac = (poisson_bracket(a, poisson_bracket(b, c)) + poisson_bracket(b, poisson_bracket(c, a)) +
                      poisson_bracket(c, poisson_bracket(a, b)))
                         .matrix()
                         .norm() /
                     (scale * c.matrix().norm());
  const bool bracket_ok = anti <= 1e-13 && jac <= 1e-12;
  detail += "bracket antisymmetry " + num(anti, 2) + ", Jacobi " + num(jac, 2) + "; ";

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double c1 = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> t(1 + rng() % 12);
    for (auto& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    if (t.front() <= 0.0) continue;
    const PulseSequence seq(1.0, t, "r");
    c1 = std::max(c1, std::abs(coefficients(seq).alpha1 - signed_balance(seq)));
  }
  detail += "c1 balance " + num(c1, 2) + "; ";

  const auto space = HilbertSpec::qubits(6);
  const auto even = lindblad_generator(build_pump_channel(spec, Parity::kEven), model.basis);
  const auto odd = lindblad_generator(build_pump_channel(spec, Parity::kOdd), model.basis);
  const CMatrix flip = op::global_x(space);
  const double conj = (conjugated(odd, flip) - even).matrix().norm() / even.matrix().norm() +
                      (conjugated(b, flip) + b).matrix().norm() / b.matrix().norm();
  detail += "conjugation identity " + num(conj, 2);

  return verdict(det && round && state_ok && bracket_ok && c1 <= 1e-13 && conj <= 1e-12, detail);
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace ddprep

int main(int argc, char** argv) {
  using namespace ddprep;
  const std::vector<Criterion> all = {
      {1, "coefficient table", ac1},
      {2, "alpha3b N^2 universality", ac2},
      {3, "scaling law of repeated units", ac3},
      {4, "singlet baseline", ac4},
      {5, "sequence independence at fixed mean interval", ac5},
      {6, "leading Magnus generator convergence", ac6},
      {7, "residue scaling exponents", ac7},
      {8, "cluster preparation properties", ac8},
      {9, "dynamic noise", ac9},
      {10, "infrastructure invariants", ac10},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::Status::kPass ? "PASS" : o.status == Outcome::Status::kSkip ? "SKIP" : "FAIL";
    failures += o.status == Outcome::Status::kFail;
    std::printf("[%s] AC%d %s: %s (%.1f s)\n", tag, c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
