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

#include "ddprep/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace ddprep {

StabilizerSpec linear_cluster_stabilizers(int n_qubits) {
  if (n_qubits < 2) throw InvalidArgument("linear cluster needs at least two qubits");
  HilbertSpec::qubits(n_qubits);
  StabilizerSpec spec{n_qubits, {}};
  for (int k = 0; k < n_qubits; ++k) {
    std::string s(static_cast<std::size_t>(n_qubits), 'I');
    s[static_cast<std::size_t>(k)] = 'X';
    if (k > 0) s[static_cast<std::size_t>(k - 1)] = 'Z';
    if (k + 1 < n_qubits) s[static_cast<std::size_t>(k + 1)] = 'Z';
    spec.stabilizers.push_back(std::move(s));
  }
  return spec;
}

PumpSpec PumpSpec::for_stabilizers(const StabilizerSpec& spec, double gamma) {
  PumpSpec pump{gamma, {}};
  for (const auto& s : spec.stabilizers) {
    const auto pos = s.find_first_of("XY");
    if (pos == std::string::npos) {
      throw InvalidArgument("stabilizer '" + s + "' has no site where sigma^z anticommutes");
    }
    pump.flip_sites.push_back(static_cast<int>(pos));
  }
  return pump;
}

namespace {

std::vector<CMatrix> stabilizer_matrices(const StabilizerSpec& spec) {
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  std::vector<CMatrix> out;
  for (const auto& s : spec.stabilizers) {
    if (s.find_first_not_of("IXZ") != std::string::npos) {
      throw InvalidArgument("stabilizer '" + s + "' must use only I, X, Z");
    }
    out.push_back(op::pauli_string(space, s));
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    for (std::size_t b = a + 1; b < out.size(); ++b) {
      if ((out[a] * out[b] - out[b] * out[a]).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidArgument("stabilizers '" + spec.stabilizers[a] + "' and '" +
                              spec.stabilizers[b] + "' do not commute");
      }
    }
  }
  return out;
}

}  // namespace

DensityMatrix cluster_state(const StabilizerSpec& spec) {
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  const auto mats = stabilizer_matrices(spec);
  const auto d = static_cast<Eigen::Index>(space.dim());
  CMatrix proj = CMatrix::Identity(d, d);
  for (const auto& s : mats) proj = proj * (CMatrix::Identity(d, d) + s) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (proj + proj.adjoint()));
  const auto& w = eig.eigenvalues();
  int count = 0;
  Eigen::Index keep = 0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w(k) - 1.0) < 1e-8) {
      ++count;
      keep = k;
    }
  }
  if (count != 1) {
    throw InvalidArgument("stabilizer set fixes a " + std::to_string(count) +
                          "-dimensional space, expected 1");
  }
  return DensityMatrix::pure(space, eig.eigenvectors().col(keep));
}

DensityMatrix cluster_state(int n_qubits) {
  return cluster_state(linear_cluster_stabilizers(n_qubits));
}

namespace {

CMatrix pump_jump(const HilbertSpec& space, const CMatrix& stabilizer, int flip_site,
                  double gamma) {
  const auto d = static_cast<Eigen::Index>(space.dim());
  const CMatrix flip = op::site(space, flip_site, op::pauli_z());
  if ((flip * stabilizer + stabilizer * flip).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("flip operator on qubit " + std::to_string(flip_site) +
                          " does not anticommute with its stabilizer");
  }
  return std::sqrt(gamma) * flip * (CMatrix::Identity(d, d) - stabilizer) * 0.5;
}

void validate_pump(const StabilizerSpec& spec, const PumpSpec& pump) {
  if (!(pump.gamma > 0.0) || !std::isfinite(pump.gamma)) {
    throw InvalidArgument("pump rate gamma must be positive");
  }
  if (pump.flip_sites.size() != spec.stabilizers.size()) {
    throw InvalidArgument("need one flip site per stabilizer");
  }
  for (int site : pump.flip_sites) {
    if (site < 0 || site >= spec.n_qubits) throw InvalidArgument("flip site out of range");
  }
}

}  // namespace

LindbladChannel pump_channel(const StabilizerSpec& spec, const PumpSpec& pump, Parity parity) {
  validate_pump(spec, pump);
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  const auto mats = stabilizer_matrices(spec);
  const auto d = static_cast<Eigen::Index>(space.dim());
  LindbladChannel channel{CMatrix::Zero(d, d), {}};
  const CMatrix x_all = op::global_x(space);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    CMatrix jump = pump_jump(space, mats[k], pump.flip_sites[k], pump.gamma);
    if (parity == Parity::kOdd) jump = x_all * jump * x_all;
    channel.jumps.push_back(std::move(jump));
  }
  return channel;
}

LindbladChannel single_pump_channel(const StabilizerSpec& spec, const PumpSpec& pump,
                                    std::size_t k) {
  validate_pump(spec, pump);
  if (k >= spec.stabilizers.size()) throw InvalidArgument("stabilizer index out of range");
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  const auto mats = stabilizer_matrices(spec);
  const auto d = static_cast<Eigen::Index>(space.dim());
  return {CMatrix::Zero(d, d), {pump_jump(space, mats[k], pump.flip_sites[k], pump.gamma)}};
}

namespace {

// Direct propagation with the pump cycling through single stabilizers.
RVector run_sequential(const StabilizerSpec& spec, const PumpSpec& pump, const BasisPtr& basis,
                       const Superoperator& l_n, const Schedule& schedule, double slot,
                       RVector x) {
  if (!(slot > 0.0)) throw InvalidArgument("sequential slot length must be positive");
  std::vector<std::shared_ptr<const Superoperator>> plus;
  std::vector<std::shared_ptr<const Superoperator>> minus;
  for (std::size_t k = 0; k < spec.stabilizers.size(); ++k) {
    const auto g = lindblad_generator(single_pump_channel(spec, pump, k), basis);
    plus.push_back(std::make_shared<const Superoperator>(g + l_n));
    minus.push_back(std::make_shared<const Superoperator>(g - l_n));
  }
  const auto pulses = flatten(schedule);
  const double total = schedule.duration;
  ExponentialCache cache;
  std::size_t next_pulse = 0;
  int sign = 1;
  double t = 0.0;
  long slot_index = 0;
  while (t < total) {
    const double slot_end = std::min(total, slot * static_cast<double>(slot_index + 1));
    const double pulse_t = next_pulse < pulses.size() ? pulses[next_pulse] : total;
    const double stop = std::min(slot_end, pulse_t);
    const auto k = static_cast<std::size_t>(slot_index) % plus.size();
    // Round durations so repeated pieces hit the cache.
    const double dt = std::round((stop - t) * 1e12) / 1e12;
    if (dt > 0.0) x = cache.exponential(sign > 0 ? plus[k] : minus[k], dt) * x;
    t = stop;
    if (next_pulse < pulses.size() && t >= pulses[next_pulse]) {
      sign = -sign;
      ++next_pulse;
    }
    if (t >= slot_end) ++slot_index;
  }
  return x;
}

}  // namespace

ClusterResult run_protected_cluster(const StabilizerSpec& spec, const PumpSpec& pump,
                                    const InhomogeneousNoiseSpec& noise, const Schedule& schedule,
                                    const ClusterOptions& options) {
  const auto space = HilbertSpec::qubits(spec.n_qubits);
  auto basis = OperatorBasis::full(space);
  const auto target = cluster_state(spec);
  const RVector fid = basis->hermitian_coordinates(target.matrix());
  const auto l_n = dephasing_generator(noise, basis);
  const auto rho0 = DensityMatrix::fully_polarized(space);

  if (options.sequential) {
    if (schedule.mode != Schedule::Mode::kPeriodic) {
      throw InvalidArgument("sequential pumping supports periodic schedules only");
    }
    RVector x = run_sequential(spec, pump, basis, l_n, schedule, options.slot,
                               state_coordinates(*basis, rho0));
    const double tr = basis->trace_weights().dot(x);
    ClusterResult r{state_from_coordinates(*basis, x / tr), fid.dot(x) / tr, 0.0, 0,
                    schedule.duration, std::abs(tr - 1.0)};
    r.units = schedule.repetitions;
    return r;
  }

  const auto l_p0 = lindblad_generator(pump_channel(spec, pump, Parity::kEven), basis);
  const TogglingModel model(l_p0, l_n);
  const auto run = run_toggling(model, rho0, schedule, fid, options.run);
  return {run.state, run.observable, run.observable_stderr, run.units, run.duration,
          run.trace_drift};
}

}  // namespace ddprep
