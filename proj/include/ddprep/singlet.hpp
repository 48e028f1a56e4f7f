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

#include "ddprep/liouville.hpp"
#include "ddprep/pulses.hpp"
#include "ddprep/toggling.hpp"

namespace ddprep {

/// Collective pumping by sqrt(lambda_h) sum_n s_n^- and
/// sqrt(lambda_i) sum_n (-1)^n s_n^+ (n = 1..N).
struct SingletChannelSpec {
  int n_qubits = 6;
  double lambda_h = 100.0;
  double lambda_i = 1.0;

  /// Rejects odd or out-of-range sizes and non-positive rates.
  void validate() const;
};

enum class Parity { kEven, kOdd };

/// Even intervals use the jumps above; odd intervals swap s^- and s^+.
LindbladChannel build_pump_channel(const SingletChannelSpec& spec, Parity parity);

/// Projector onto the J = 0 eigenspace of the total spin.
CMatrix singlet_projector(const HilbertSpec& space);

/// Tr(P_{J=0} rho).
double singlet_population(const DensityMatrix& rho);

/// Toggling-frame generators on the excitation-balanced sector.
struct SingletModel {
  BasisPtr basis;
  Superoperator l_p0;
  Superoperator l_n;
  RVector projector;  // basis coordinates of P_{J=0}

  static SingletModel build(const SingletChannelSpec& spec, const InhomogeneousNoiseSpec& noise);
  TogglingModel toggling() const { return {l_p0, l_n}; }
};

struct PreparationResult {
  DensityMatrix state;
  double p_j0 = 0.0;
  double p_j0_stderr = 0.0;
  long units = 0;
  double duration = 0.0;
  double trace_drift = 0.0;
};

/// Evolves the fully polarized state under the schedule (see run_toggling for
/// the horizon rules) and reports the singlet population.
PreparationResult run_protected_preparation(const SingletChannelSpec& spec,
                                            const InhomogeneousNoiseSpec& noise,
                                            const Schedule& schedule,
                                            const RunOptions& options = {});

/// Singlet population after `horizon` under the constant generator
/// L_P0 + alpha3b t_p^2 [L_N, [L_P0, L_N]].
double leading_magnus_population(const SingletChannelSpec& spec,
                                 const InhomogeneousNoiseSpec& noise, const PulseSequence& unit,
                                 double horizon);

}  // namespace ddprep
