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

#include "ddprep/dynamic_noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

namespace ddprep {

void OUNoiseSpec::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("sigma2 must be >= 0");
  if (!(tau_c > 0.0) || !std::isfinite(tau_c)) throw InvalidArgument("tau_c must be positive");
}

double OUNoiseSpec::spectrum(double omega) const {
  return sigma2 * tau_c / (std::numbers::pi * (1.0 + omega * omega * tau_c * tau_c));
}

std::vector<double> ou_trajectory(const OUNoiseSpec& spec, double dt, double total,
                                  std::uint64_t seed) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (dt > spec.tau_c / 10.0 * (1.0 + 1e-12)) throw InvalidArgument("dt must be <= tau_c / 10");
  if (!(total >= 0.0)) throw InvalidArgument("duration must be >= 0");
  const auto steps = static_cast<std::size_t>(std::ceil(total / dt - 1e-9));
  std::vector<double> path(steps + 1, 0.0);
  if (spec.sigma2 == 0.0) return path;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double sigma = std::sqrt(spec.sigma2);
  const double decay = std::exp(-dt / spec.tau_c);
  const double kick = sigma * std::sqrt(1.0 - decay * decay);
  path[0] = sigma * normal(rng);
  for (std::size_t k = 1; k <= steps; ++k) path[k] = decay * path[k - 1] + kick * normal(rng);
  return path;
}

DephasingAction::DephasingAction(BasisPtr basis)
    : basis_(std::move(basis)), n_qubits_(basis_->space().n_qubits) {
  const auto elements = basis_->elements();
  for (std::size_t k = 0; k < elements.size(); ++k) {
    const auto& e = elements[k];
    if (e.kind != OperatorBasis::Kind::kSymmetric) continue;
    const auto anti = basis_->index_of(e.row, e.col) + 1;
    pairs_.push_back({static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(anti), e.row, e.col});
  }
}

void DephasingAction::apply_add(std::span<const double> fields, double sign, const RVector& x,
                                RVector& out) const {
  // rho_ab' = -i theta rho_ab, theta = sum_i B_i (z_i(a) - z_i(b)); in Hermitian
  // coordinates S' = theta A, A' = -theta S.
  const int n = n_qubits_;
  for (const auto& p : pairs_) {
    const std::uint32_t diff = p.row ^ p.col;
    double theta = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t bit = 1U << (n - 1 - i);
      if (diff & bit) theta += (p.row & bit) ? -2.0 * fields[static_cast<std::size_t>(i)]
                                             : 2.0 * fields[static_cast<std::size_t>(i)];
    }
    theta *= sign;
    out(p.sym) += theta * x(p.anti);
    out(p.anti) -= theta * x(p.sym);
  }
}

namespace {

double shortest_gap(const Schedule& schedule) {
  const auto times = flatten(schedule);
  double gap = schedule.duration;
  for (const auto& iv : intervals(times, schedule.duration)) {
    if (iv.duration > 0.0) gap = std::min(gap, iv.duration);
  }
  return gap;
}

}  // namespace

double default_dynamic_step(const OUNoiseSpec& noise, const Schedule& schedule) {
  noise.validate();
  return std::min(noise.tau_c, shortest_gap(schedule)) / 20.0;
}

DynamicRunResult monte_carlo_protected_run(const LindbladChannel& prep, BasisPtr basis,
                                           const OUNoiseSpec& noise, const Schedule& schedule,
                                           const DensityMatrix& rho0, const RVector& observable,
                                           const DynamicRunOptions& options) {
  noise.validate();
  if (schedule.mode != Schedule::Mode::kPeriodic) {
    throw InvalidArgument("dynamic-noise runs take periodic schedules");
  }
  if (options.n_traj < 1) throw InvalidArgument("need at least one trajectory");
  if (observable.size() != static_cast<Eigen::Index>(basis->size())) {
    throw InvalidArgument("observable coordinates do not match the basis");
  }
  const double dt = options.dt > 0.0 ? options.dt : default_dynamic_step(noise, schedule);
  const double h = dt / 2.0;
  if (h > noise.tau_c / 10.0) throw InvalidArgument("RK4 step too coarse for tau_c");

  const auto l_p0 = lindblad_generator(prep, basis);
  const RMatrix& g = l_p0.matrix();
  const DephasingAction dephase(basis);
  const auto n = static_cast<std::size_t>(basis->space().n_qubits);
  const RVector x0 = state_coordinates(*basis, rho0);
  const auto pieces = intervals(flatten(schedule), schedule.duration);
  const RVector& tw = basis->trace_weights();

  namespace odeint = boost::numeric::odeint;
  odeint::runge_kutta4<RVector, double, RVector, double, odeint::vector_space_algebra> rk4;

  DynamicRunResult result{rho0, 0.0, 0.0, options.n_traj, dt, 0.0};
  RVector sum = RVector::Zero(x0.size());
  double obs_sum = 0.0;
  double obs_sq = 0.0;
  std::vector<std::vector<double>> paths(n);
  std::vector<double> fields(n);
  for (int traj = 0; traj < options.n_traj; ++traj) {
    const auto traj_seed = derive_seed(options.seed, static_cast<std::uint64_t>(traj));
    for (std::size_t i = 0; i < n; ++i) {
      paths[i] = ou_trajectory(noise, h, schedule.duration, derive_seed(traj_seed, i));
    }
    // Linear interpolation on the half-step grid; exact when stage times land on it.
    auto field_at = [&](double t) {
      const double u = t / h;
      auto k = static_cast<std::size_t>(std::floor(u));
      k = std::min(k, paths[0].size() - 2);
      const double w = u - static_cast<double>(k);
      for (std::size_t i = 0; i < n; ++i) {
        const double w_eff = std::abs(w) < 1e-9 ? 0.0 : (std::abs(w - 1.0) < 1e-9 ? 1.0 : w);
        fields[i] = (1.0 - w_eff) * paths[i][k] + w_eff * paths[i][k + 1];
      }
    };
    RVector x = x0;
    double t0 = 0.0;
    for (const auto& piece : pieces) {
      if (piece.duration <= 0.0) continue;
      const auto steps = static_cast<long>(std::ceil(piece.duration / dt - 1e-9));
      const double step = piece.duration / static_cast<double>(steps);
      const double sign = piece.sign;
      auto rhs = [&](const RVector& y, RVector& dy, double t) {
        dy.noalias() = g * y;
        field_at(t);
        dephase.apply_add(fields, sign, y, dy);
      };
      for (long s = 0; s < steps; ++s) {
        rk4.do_step(rhs, x, t0 + step * static_cast<double>(s), step);
      }
      t0 += piece.duration;
    }
    const double drift = std::abs(tw.dot(x) - 1.0);
    if (!x.allFinite() || drift > 1e-6) {
      throw PropagationError("trajectory " + std::to_string(traj) + " (seed " +
                                 std::to_string(traj_seed) + ") drifted in trace by " +
                                 std::to_string(drift),
                             static_cast<std::size_t>(traj));
    }
    result.max_trace_drift = std::max(result.max_trace_drift, drift);
    const double v = observable.dot(x);
    obs_sum += v;
    obs_sq += v * v;
    sum += x;
  }
  const double m = static_cast<double>(options.n_traj);
  sum /= m;
  result.mean_state = state_from_coordinates(*basis, sum);
  result.observable = obs_sum / m;
  if (options.n_traj > 1) {
    const double var = std::max(0.0, (obs_sq - m * result.observable * result.observable) / (m - 1));
    result.observable_stderr = std::sqrt(var / m);
  }
  return result;
}

FilterPoint memory_limit_filter(std::span<const double> times, double total, double omega) {
  // Y = sum over intervals of sign * h * e^{i w (a + h/2)} * sinc(w h / 2).
  std::complex<double> y = 0.0;
  double a = 0.0;
  for (const auto& iv : intervals(times, total)) {
    const double x = 0.5 * omega * iv.duration;
    const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    y += static_cast<double>(iv.sign) * iv.duration * sinc *
         std::polar(1.0, omega * (a + 0.5 * iv.duration));
    a += iv.duration;
  }
  return {omega, 0.5 * std::norm(y)};
}

FilterPoint memory_limit_filter(const Schedule& schedule, double omega) {
  return memory_limit_filter(flatten(schedule), schedule.duration, omega);
}

double filtered_decay_exponent(const OUNoiseSpec& noise, std::span<const double> times,
                               double total) {
  noise.validate();
  if (!(total > 0.0)) throw InvalidArgument("duration must be positive");
  if (noise.sigma2 == 0.0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double w) {
    return noise.spectrum(w) * memory_limit_filter(times, total, w).value;
  };
  // Integrate [0, W] on panels of width ~ pi / (shortest gap); the tail is bounded by
  // F <= 2 (N+1)^2 / w^2 and G <= sigma2 / (pi tau_c w^2).
  const double pieces = static_cast<double>(times.size() + 1);
  const double tail_scale = 2.0 * pieces * pieces * noise.sigma2 / (3.0 * std::numbers::pi * noise.tau_c);
  double gap = total;
  double prev = 0.0;
  for (double t : times) {
    gap = std::min(gap, t - prev);
    prev = t;
  }
  gap = std::min(gap, total - prev);
  const double panel = std::numbers::pi / total;
  double w_max = 40.0 * std::numbers::pi / gap;
  w_max = std::max(w_max, std::cbrt(tail_scale / 1e-13));
  double acc = 0.0;
  double lo = 0.0;
  while (lo < w_max) {
    const double hi = std::min(w_max, lo + panel);
    acc += gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 8, 1e-12);
    lo = hi;
  }
  return 8.0 * acc;
}

ExponentFit suppression_exponent(std::span<const std::pair<double, double>> curve) {
  ExponentFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto [tau, inf] = curve[i];
    if (!(tau > 0.0) || !(inf > 0.0) || !std::isfinite(inf)) {
      fit.rejected.push_back(i);
      continue;
    }
    xs.push_back(std::log(tau));
    ys.push_back(std::log(inf));
  }
  if (xs.size() < 4) {
    std::string which;
    for (auto i : fit.rejected) which += (which.empty() ? "" : ", ") + std::to_string(i);
    throw InvalidArgument("suppression exponent needs >= 4 positive points; rejected indices: [" +
                          which + "]");
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw InvalidArgument("tau_bar values must not all coincide");
  fit.exponent = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / m;
  return fit;
}

}  // namespace ddprep
