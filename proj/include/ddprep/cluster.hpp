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

#include <string>
#include <vector>

#include "ddprep/liouville.hpp"
#include "ddprep/pulses.hpp"
#include "ddprep/singlet.hpp"
#include "ddprep/toggling.hpp"

namespace ddprep {

/// Commuting Pauli strings over {I, X, Z}, one letter per qubit.
struct StabilizerSpec {
  int n_qubits = 0;
  std::vector<std::string> stabilizers;
};

/// X1 Z2, Z_{k-1} X_k Z_{k+1}, ..., Z_{n-1} X_n.
StabilizerSpec linear_cluster_stabilizers(int n_qubits);

/// One jump sqrt(gamma) A_k (I - S_k)/2 per stabilizer, A_k = sigma^z on flip_sites[k].
struct PumpSpec {
  double gamma = 1.0;
  std::vector<int> flip_sites;

  /// Flip site = lowest qubit carrying X (or Y) in each stabilizer.
  static PumpSpec for_stabilizers(const StabilizerSpec& spec, double gamma = 1.0);
};

/// Unique joint +1 eigenstate; rejects sets that do not fix a single state.
DensityMatrix cluster_state(const StabilizerSpec& spec);
DensityMatrix cluster_state(int n_qubits);

/// Even parity uses the jumps above; odd parity conjugates each by X^n.
LindbladChannel pump_channel(const StabilizerSpec& spec, const PumpSpec& pump, Parity parity);

/// Single-stabilizer pump channel (sequential mode).
LindbladChannel single_pump_channel(const StabilizerSpec& spec, const PumpSpec& pump,
                                    std::size_t k);

struct ClusterOptions {
  RunOptions run{Backend::kSteadyState};
  /// Pump one stabilizer at a time, cycling with slot length `slot`.
  bool sequential = false;
  double slot = 0.1;
};

struct ClusterResult {
  DensityMatrix state;
  double fidelity = 0.0;
  double fidelity_stderr = 0.0;
  long units = 0;
  double duration = 0.0;
  double trace_drift = 0.0;
};

/// Toggling-frame evolution from the fully polarized state; F = <C|rho|C>.
/// Sequential mode integrates schedule.duration directly (periodic only).
ClusterResult run_protected_cluster(const StabilizerSpec& spec, const PumpSpec& pump,
                                    const InhomogeneousNoiseSpec& noise, const Schedule& schedule,
                                    const ClusterOptions& options = {});

}  // namespace ddprep
