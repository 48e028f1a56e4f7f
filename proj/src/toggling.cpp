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

#include "ddprep/toggling.hpp"

#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

namespace ddprep {

InhomogeneousNoiseSpec InhomogeneousNoiseSpec::linear_profile(int n_qubits, double delta) {
  if (n_qubits < 2) throw InvalidArgument("linear resonance profile needs at least two qubits");
  InhomogeneousNoiseSpec spec;
  spec.omegas.resize(static_cast<std::size_t>(n_qubits));
  for (int i = 1; i <= n_qubits; ++i) {
    spec.omegas[static_cast<std::size_t>(i - 1)] =
        delta * static_cast<double>(n_qubits + 1 - 2 * i) / static_cast<double>(n_qubits - 1);
  }
  return spec;
}

Superoperator dephasing_generator(const InhomogeneousNoiseSpec& noise, BasisPtr basis) {
  const auto& space = basis->space();
  if (noise.omegas.size() != static_cast<std::size_t>(space.n_qubits)) {
    throw InvalidArgument("need one resonance offset per qubit");
  }
  for (double w : noise.omegas) {
    if (!std::isfinite(w)) throw InvalidArgument("resonance offsets must be finite");
  }
  LindbladChannel channel{op::collective(space, op::pauli_z(), noise.omegas), {}};
  return lindblad_generator(channel, std::move(basis));
}

TogglingModel::TogglingModel(const Superoperator& l_p0, const Superoperator& l_n)
    : l_p0_(std::make_shared<const Superoperator>(l_p0)),
      l_n_(std::make_shared<const Superoperator>(l_n)),
      plus_(std::make_shared<const Superoperator>(l_p0 + l_n)),
      minus_(std::make_shared<const Superoperator>(l_p0 - l_n)) {}

std::vector<Segment> TogglingModel::segments(std::span<const Interval> pieces) const {
  std::vector<Segment> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back({generator(p.sign), p.duration});
  return out;
}

namespace {

std::vector<Interval> period_pieces(const PulseSequence& unit, long& units) {
  auto pieces = intervals(unit.times(), unit.t_p());
  units = 1;
  if (unit.size() % 2 == 1) {
    const auto n = pieces.size();
    for (std::size_t i = 0; i < n; ++i) pieces.push_back({pieces[i].duration, -pieces[i].sign});
    units = 2;
  }
  return pieces;
}

double one_norm(const RMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Period period_propagator(const TogglingModel& model, const PulseSequence& unit,
                         ExponentialCache& cache) {
  Period p;
  const auto pieces = period_pieces(unit, p.units);
  const auto segs = model.segments(pieces);
  p.propagator = unit_propagator(segs, cache);
  p.duration = unit.t_p() * static_cast<double>(p.units);
  return p;
}

ExponentialLadder::ExponentialLadder(std::shared_ptr<const Superoperator> generator,
                                     double max_duration)
    : generator_(std::move(generator)) {
  if (!(max_duration > 0.0)) throw InvalidArgument("ladder horizon must be positive");
  const double norm = one_norm(generator_->matrix());
  step_ = norm > 0.0 ? std::min(max_duration, 0.25 / norm) : max_duration;
  rungs_.push_back(matrix_exponential(generator_->matrix() * step_));
  double reach = step_;
  while (reach * 2.0 <= max_duration) {
    rungs_.push_back(rungs_.back() * rungs_.back());
    reach *= 2.0;
  }
}

RVector ExponentialLadder::apply(double duration, RVector x) const {
  if (!(duration >= 0.0)) throw InvalidArgument("durations must be >= 0");
  const double ratio = std::floor(duration / step_);
  auto q = static_cast<unsigned long long>(ratio);
  const double rem = duration - ratio * step_;
  if (rem > 0.0) {
    // ||G rem||_1 <= 1/4, so the series converges fast.
    RVector term = x;
    const double scale = x.cwiseAbs().sum();
    for (int k = 1; k <= 40; ++k) {
      term = generator_->matrix() * term * (rem / k);
      x += term;
      if (term.cwiseAbs().sum() <= 1e-17 * scale) break;
    }
  }
  const auto top = rungs_.size() - 1;
  const unsigned long long top_count = 1ULL << top;
  while (q >= top_count * 2) {
    x = rungs_[top] * x;
    q -= top_count;
  }
  for (std::size_t j = 0; q != 0 && j < rungs_.size(); ++j, q >>= 1) {
    if (q & 1ULL) x = rungs_[j] * x;
  }
  return x;
}

Backend parse_backend(std::string_view name) {
  if (name == "unit_power") return Backend::kUnitPower;
  if (name == "steady_state") return Backend::kSteadyState;
  if (name == "stepper") return Backend::kStepper;
  if (name == "monte_carlo") return Backend::kMonteCarlo;
  if (name == "poisson_ensemble") return Backend::kPoissonEnsemble;
  throw InvalidArgument("unknown backend '" + std::string(name) +
                        "' (expected unit_power, steady_state, stepper, monte_carlo, "
                        "poisson_ensemble)");
}

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::kUnitPower:
      return "unit_power";
    case Backend::kSteadyState:
      return "steady_state";
    case Backend::kStepper:
      return "stepper";
    case Backend::kMonteCarlo:
      return "monte_carlo";
    case Backend::kPoissonEnsemble:
      return "poisson_ensemble";
  }
  return "unknown";
}

RVector propagate_pulse_train(const TogglingModel& model, std::span<const double> times,
                              double total, RVector x) {
  const ExponentialLadder plus(model.generator(+1), total);
  const ExponentialLadder minus(model.generator(-1), total);
  for (const auto& piece : intervals(times, total)) {
    x = (piece.sign > 0 ? plus : minus).apply(piece.duration, std::move(x));
  }
  return x;
}

namespace {

namespace odeint = boost::numeric::odeint;

RVector integrate_pieces(const TogglingModel& model, std::span<const Interval> pieces,
                         long repeats, RVector x, double tolerance) {
  using Stepper = odeint::runge_kutta_dopri5<RVector, double, RVector, double,
                                             odeint::vector_space_algebra>;
  auto stepper = odeint::make_controlled(tolerance, tolerance, Stepper());
  for (long r = 0; r < repeats; ++r) {
    for (const auto& piece : pieces) {
      if (piece.duration <= 0.0) continue;
      const RMatrix& g = model.generator(piece.sign)->matrix();
      auto rhs = [&g](const RVector& y, RVector& dy, double) { dy.noalias() = g * y; };
      odeint::integrate_adaptive(stepper, rhs, x, 0.0, piece.duration, piece.duration / 16.0);
    }
  }
  return x;
}

struct Finished {
  RVector x;
  double drift;
};

Finished finish(const OperatorBasis& basis, RVector x) {
  const double tr = basis.trace_weights().dot(x);
  const double drift = std::abs(tr - 1.0);
  if (!x.allFinite()) throw PropagationError("non-finite state after propagation", 0);
  if (drift > 1e-8) x /= tr;
  return {std::move(x), drift};
}

}  // namespace

RunResult run_toggling(const TogglingModel& model, const DensityMatrix& rho0,
                       const Schedule& schedule, const RVector& observable,
                       const RunOptions& options) {
  const auto& basis = model.basis();
  if (observable.size() != static_cast<Eigen::Index>(basis.size())) {
    throw InvalidArgument("observable coordinates do not match the model basis");
  }
  const RVector x0 = state_coordinates(basis, rho0);
  const bool random = schedule.mode == Schedule::Mode::kRandom;
  const bool random_backend =
      options.backend == Backend::kMonteCarlo || options.backend == Backend::kPoissonEnsemble;
  if (random != random_backend) {
    throw InvalidArgument("backend '" + to_string(options.backend) + "' does not apply to " +
                          (random ? "random" : "periodic") + " schedules");
  }

  RunResult result{rho0, 0.0, 0.0, 0, 0.0, 0.0};
  RVector x;
  switch (options.backend) {
    case Backend::kUnitPower: {
      ExponentialCache cache;
      const Period p = period_propagator(model, schedule.unit, cache);
      const long periods = std::max(1L, std::lround(schedule.duration / p.duration));
      x = apply_power(p.propagator, periods, x0);
      result.units = periods * p.units;
      result.duration = static_cast<double>(periods) * p.duration;
      break;
    }
    case Backend::kSteadyState: {
      long units = 1;
      const auto pieces = period_pieces(schedule.unit, units);
      const auto segs = model.segments(pieces);
      const auto ss = steady_state_by_evolution(rho0, segs, options.steady);
      x = state_coordinates(basis, ss.state);
      result.units = ss.units * units;
      result.duration = static_cast<double>(result.units) * schedule.unit.t_p();
      break;
    }
    case Backend::kStepper: {
      long units = 1;
      const auto pieces = period_pieces(schedule.unit, units);
      const double period = schedule.unit.t_p() * static_cast<double>(units);
      const long periods = std::max(1L, std::lround(schedule.duration / period));
      x = integrate_pieces(model, pieces, periods, x0, options.stepper_tolerance);
      result.units = periods * units;
      result.duration = static_cast<double>(periods) * period;
      break;
    }
    case Backend::kMonteCarlo: {
      if (options.seeds < 1) throw InvalidArgument("Monte Carlo needs at least one seed");
      const ExponentialLadder plus(model.generator(+1), schedule.duration);
      const ExponentialLadder minus(model.generator(-1), schedule.duration);
      x = RVector::Zero(x0.size());
      std::vector<double> samples;
      for (int k = 0; k < options.seeds; ++k) {
        const auto draw = random_schedule(schedule.density, schedule.duration,
                                          derive_seed(schedule.seed, static_cast<std::uint64_t>(k)));
        RVector y = x0;
        for (const auto& piece : intervals(draw.times, draw.duration)) {
          y = (piece.sign > 0 ? plus : minus).apply(piece.duration, std::move(y));
        }
        samples.push_back(observable.dot(y));
        x += y;
        result.units += static_cast<long>(draw.times.size());
      }
      x /= static_cast<double>(options.seeds);
      if (options.seeds > 1) {
        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        for (double s : samples) var += (s - mean) * (s - mean);
        var /= static_cast<double>(samples.size() - 1);
        result.observable_stderr = std::sqrt(var / static_cast<double>(samples.size()));
      }
      result.duration = schedule.duration;
      break;
    }
    case Backend::kPoissonEnsemble: {
      // Joint generator of (state, sign) with sign flips at rate n.
      const auto m = x0.size();
      const double n = schedule.density;
      RMatrix a(2 * m, 2 * m);
      a.topLeftCorner(m, m) = model.generator(+1)->matrix();
      a.bottomRightCorner(m, m) = model.generator(-1)->matrix();
      a.topLeftCorner(m, m).diagonal().array() -= n;
      a.bottomRightCorner(m, m).diagonal().array() -= n;
      a.topRightCorner(m, m) = RMatrix::Identity(m, m) * n;
      a.bottomLeftCorner(m, m) = RMatrix::Identity(m, m) * n;
      RVector z = RVector::Zero(2 * m);
      z.head(m) = x0;
      z = matrix_exponential(a * schedule.duration) * z;
      x = z.head(m) + z.tail(m);
      result.units = std::lround(schedule.density * schedule.duration);
      result.duration = schedule.duration;
      break;
    }
  }
  auto done = finish(basis, std::move(x));
  result.trace_drift = done.drift;
  result.observable = observable.dot(done.x);
  result.state = state_from_coordinates(basis, done.x);
  return result;
}

}  // namespace ddprep
