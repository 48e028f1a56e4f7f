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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddprep/liouville.hpp"
#include "ddprep/pulses.hpp"

namespace ddprep {

/// Static per-qubit resonance offsets omega_i.
struct InhomogeneousNoiseSpec {
  std::vector<double> omegas;

  /// omega_i = delta (n + 1 - 2i) / (n - 1), i = 1..n (n >= 2).
  static InhomogeneousNoiseSpec linear_profile(int n_qubits, double delta);
};

/// L_N[rho] = -i[sum_i omega_i sigma^z_i, rho].
Superoperator dephasing_generator(const InhomogeneousNoiseSpec& noise, BasisPtr basis);

/// Toggling-frame dynamics rho' = (L_P0 + f(t) L_N) rho.
class TogglingModel {
 public:
  TogglingModel(const Superoperator& l_p0, const Superoperator& l_n);

  const Superoperator& l_p0() const noexcept { return *l_p0_; }
  const Superoperator& l_n() const noexcept { return *l_n_; }
  const OperatorBasis& basis() const noexcept { return l_p0_->basis(); }
  /// G+ = L_P0 + L_N for sign > 0, G- = L_P0 - L_N otherwise.
  const std::shared_ptr<const Superoperator>& generator(int sign) const noexcept {
    return sign > 0 ? plus_ : minus_;
  }

  std::vector<Segment> segments(std::span<const Interval> pieces) const;

 private:
  std::shared_ptr<const Superoperator> l_p0_;
  std::shared_ptr<const Superoperator> l_n_;
  std::shared_ptr<const Superoperator> plus_;
  std::shared_ptr<const Superoperator> minus_;
};

/// Propagator over one true period of a periodic unit. Units with an odd
/// pulse count end with f = -1, so their period spans two units.
struct Period {
  RMatrix propagator;
  double duration = 0.0;
  long units = 1;
};

Period period_propagator(const TogglingModel& model, const PulseSequence& unit,
                         ExponentialCache& cache);

/// exp(G d) x for arbitrary d using precomputed exp(G h 2^j) plus a Taylor
/// remainder on the vector.
class ExponentialLadder {
 public:
  ExponentialLadder(std::shared_ptr<const Superoperator> generator, double max_duration);

  RVector apply(double duration, RVector x) const;
  double step() const noexcept { return step_; }

 private:
  std::shared_ptr<const Superoperator> generator_;
  double step_ = 0.0;
  std::vector<RMatrix> rungs_;  // exp(G step 2^j)
};

enum class Backend {
  kUnitPower,        // fixed horizon, binary powering of the period propagator
  kSteadyState,      // doubling strides until the state stops moving
  kStepper,          // adaptive Dormand-Prince on the coordinates
  kMonteCarlo,       // random schedules: explicit seeds averaged
  kPoissonEnsemble,  // random schedules: exact seed average via the telegraph generator
};

Backend parse_backend(std::string_view name);
std::string to_string(Backend backend);

struct RunOptions {
  Backend backend = Backend::kUnitPower;
  SteadyStateOptions steady{};
  int seeds = 8;                    // Monte Carlo sample count
  double stepper_tolerance = 1e-10;  // absolute and relative
};

struct RunResult {
  DensityMatrix state;  // seed-averaged for random schedules
  double observable = 0.0;
  double observable_stderr = 0.0;
  long units = 0;  // periods (periodic) or pulses (random, summed over seeds)
  double duration = 0.0;
  double trace_drift = 0.0;
};

/// Evolves rho0 through `schedule` and reports Tr(O rho) with O given by its
/// basis coordinates. Periodic schedules use schedule.duration as the horizon
/// (rounded to whole periods) except under kSteadyState. Random schedules
/// draw seeds derive_seed(schedule.seed, k), k = 0..seeds-1.
RunResult run_toggling(const TogglingModel& model, const DensityMatrix& rho0,
                       const Schedule& schedule, const RVector& observable,
                       const RunOptions& options);

/// Propagates through explicit global pulse times with the ladder (one seed).
RVector propagate_pulse_train(const TogglingModel& model, std::span<const double> times,
                              double total, RVector x);

}  // namespace ddprep
