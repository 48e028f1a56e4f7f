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

#include "ddprep/singlet.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ddprep/magnus.hpp"

namespace ddprep {

void SingletChannelSpec::validate() const {
  if (n_qubits < 2 || n_qubits > HilbertSpec::kMaxQubits || n_qubits % 2 != 0) {
    throw InvalidArgument("singlet preparation needs an even qubit count in [2, " +
                          std::to_string(HilbertSpec::kMaxQubits) + "], got " +
                          std::to_string(n_qubits));
  }
  if (!(lambda_h > 0.0) || !(lambda_i > 0.0) || !std::isfinite(lambda_h) ||
      !std::isfinite(lambda_i)) {
    throw InvalidArgument("pumping rates lambda_h and lambda_i must be positive");
  }
}

LindbladChannel build_pump_channel(const SingletChannelSpec& spec, Parity parity) {
  spec.validate();
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  const auto n = static_cast<std::size_t>(spec.n_qubits);
  const std::vector<double> uniform(n, 1.0);
  std::vector<double> staggered(n);
  for (std::size_t i = 0; i < n; ++i) staggered[i] = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^(i+1)

  const bool even = parity == Parity::kEven;
  const auto lower = op::lowering();
  const auto raise = op::raising();
  LindbladChannel channel;
  channel.hamiltonian = CMatrix::Zero(static_cast<Eigen::Index>(space.dim()),
                                      static_cast<Eigen::Index>(space.dim()));
  channel.jumps.push_back(std::sqrt(spec.lambda_h) *
                          op::collective(space, even ? lower : raise, uniform));
  channel.jumps.push_back(std::sqrt(spec.lambda_i) *
                          op::collective(space, even ? raise : lower, staggered));
  return channel;
}

CMatrix singlet_projector(const HilbertSpec& space) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(op::total_spin_squared(space));
  const auto& w = eig.eigenvalues();
  const auto d = static_cast<Eigen::Index>(space.dim());
  CMatrix proj = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w(k)) < 1e-8) proj += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).adjoint();
  }
  return proj;
}

double singlet_population(const DensityMatrix& rho) {
  return expectation(rho, singlet_projector(rho.space()));
}

SingletModel SingletModel::build(const SingletChannelSpec& spec,
                                 const InhomogeneousNoiseSpec& noise) {
  spec.validate();
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  auto basis = OperatorBasis::excitation_balanced(space);
  auto l_p0 = lindblad_generator(build_pump_channel(spec, Parity::kEven), basis);
  auto l_n = dephasing_generator(noise, basis);
  RVector proj = basis->hermitian_coordinates(singlet_projector(space));
  return {basis, std::move(l_p0), std::move(l_n), std::move(proj)};
}

PreparationResult run_protected_preparation(const SingletChannelSpec& spec,
                                            const InhomogeneousNoiseSpec& noise,
                                            const Schedule& schedule,
                                            const RunOptions& options) {
  const auto model = SingletModel::build(spec, noise);
  const auto rho0 = DensityMatrix::fully_polarized(model.basis->space());
  const auto run = run_toggling(model.toggling(), rho0, schedule, model.projector, options);
  return {run.state, run.observable, run.observable_stderr, run.units, run.duration,
          run.trace_drift};
}

double leading_magnus_population(const SingletChannelSpec& spec,
                                 const InhomogeneousNoiseSpec& noise, const PulseSequence& unit,
                                 double horizon) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  const auto model = SingletModel::build(spec, noise);
  const auto gen = leading_generator(model.l_p0, model.l_n, unit);
  const auto rho0 = DensityMatrix::fully_polarized(model.basis->space());
  const RVector x =
      matrix_exponential(gen.matrix() * horizon) * state_coordinates(*model.basis, rho0);
  return model.projector.dot(x) / model.basis->trace_weights().dot(x);
}

}  // namespace ddprep
