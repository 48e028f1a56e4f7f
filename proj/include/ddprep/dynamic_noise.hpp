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
#include <span>
#include <utility>
#include <vector>

#include "ddprep/liouville.hpp"
#include "ddprep/pulses.hpp"

namespace ddprep {

/// Stationary Ornstein-Uhlenbeck field with G(t) = sigma2 exp(-|t| / tau_c).
struct OUNoiseSpec {
  double sigma2 = 1.0;
  double tau_c = 1.0;

  void validate() const;
  /// Spectral density (1/2pi) int G(t) e^{-i w t} dt.
  double spectrum(double omega) const;
};

/// Samples at t_k = k dt, k = 0..ceil(T/dt), by the exact AR(1) update and a
/// stationary first sample. Rejects dt > tau_c / 10.
std::vector<double> ou_trajectory(const OUNoiseSpec& spec, double dt, double total,
                                  std::uint64_t seed);

/// Acts with -i[sum_i B_i sigma^z_i, .] on basis coordinates in O(basis size).
class DephasingAction {
 public:
  explicit DephasingAction(BasisPtr basis);

  /// out += sign * L_B x.
  void apply_add(std::span<const double> fields, double sign, const RVector& x,
                 RVector& out) const;

 private:
  struct Pair {
    Eigen::Index sym;
    Eigen::Index anti;
    std::uint32_t row;
    std::uint32_t col;
  };
  BasisPtr basis_;
  std::vector<Pair> pairs_;
  int n_qubits_ = 0;
};

struct DynamicRunOptions {
  int n_traj = 256;
  std::uint64_t seed = 0;
  /// RK4 step; 0 picks min(tau_c, shortest pulse gap) / 20.
  double dt = 0.0;
};

struct DynamicRunResult {
  DensityMatrix mean_state;
  double observable = 0.0;
  double observable_stderr = 0.0;
  int n_traj = 0;
  double dt = 0.0;
  double max_trace_drift = 0.0;
};

/// Trajectory average of rho' = L_P0 rho + f(t) (-i[sum_i B_i(t) sigma^z_i, rho]).
///
/// Each trajectory uses seed derive_seed(options.seed, trajectory) and qubit i
/// uses derive_seed(that, i); with equal dt and seed the noise paths are the
/// same across schedules. Only periodic schedules are accepted.
DynamicRunResult monte_carlo_protected_run(const LindbladChannel& prep, BasisPtr basis,
                                           const OUNoiseSpec& noise, const Schedule& schedule,
                                           const DensityMatrix& rho0, const RVector& observable,
                                           const DynamicRunOptions& options = {});

/// Default RK4 step for a schedule.
double default_dynamic_step(const OUNoiseSpec& noise, const Schedule& schedule);

struct FilterPoint {
  double omega = 0.0;
  double value = 0.0;
};

/// int_0^t dt1 int_0^t1 dt2 f(t1) f(t1 - t2) cos(w t2) = |int_0^t f(s) e^{iws} ds|^2 / 2.
FilterPoint memory_limit_filter(std::span<const double> times, double total, double omega);
FilterPoint memory_limit_filter(const Schedule& schedule, double omega);

/// Pure-dephasing decay exponent chi = 4 int G(w) F(w, t) dw of a single qubit
/// (coherence exp(-chi)), integrated numerically over the OU spectrum.
double filtered_decay_exponent(const OUNoiseSpec& noise, std::span<const double> times,
                               double total);

struct ExponentFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::vector<std::size_t> rejected;  // indices with non-positive infidelity
};

/// Least-squares slope of log(infidelity) against log(tau_bar); needs >= 4
/// usable points.
ExponentFit suppression_exponent(std::span<const std::pair<double, double>> curve);

}  // namespace ddprep
