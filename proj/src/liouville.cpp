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

#include "ddprep/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace ddprep {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLeakTolerance = 1e-12;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_square(const CMatrix& m, std::size_t dim, const char* what) {
  if (m.rows() != idx(dim) || m.cols() != idx(dim)) {
    throw InvalidArgument(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(dim) +
                          "x" + std::to_string(dim));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(HilbertSpec space, CMatrix entries)
    : space_(space), entries_(std::move(entries)) {
  require_square(entries_, space_.dim(), "density matrix");
}

DensityMatrix DensityMatrix::basis_state(HilbertSpec space, std::size_t index) {
  if (index >= space.dim()) throw InvalidArgument("basis index out of range");
  CMatrix m = CMatrix::Zero(idx(space.dim()), idx(space.dim()));
  m(idx(index), idx(index)) = 1.0;
  return {space, std::move(m)};
}

DensityMatrix DensityMatrix::pure(HilbertSpec space, const CVector& amplitudes) {
  if (amplitudes.size() != idx(space.dim())) throw InvalidArgument("state vector has wrong size");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw InvalidArgument("state vector is zero");
  const CVector psi = amplitudes / norm;
  return {space, psi * psi.adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed(HilbertSpec space) {
  const double w = 1.0 / static_cast<double>(space.dim());
  return {space, CMatrix::Identity(idx(space.dim()), idx(space.dim())) * w};
}

DensityMatrix DensityMatrix::fully_polarized(HilbertSpec space) { return basis_state(space, 0); }

DensityMatrix::Check DensityMatrix::check() const {
  Check c;
  c.hermiticity = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  c.trace_error = std::abs(entries_.trace() - Complex(1.0));
  const CMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = eig.eigenvalues().minCoeff();
  c.ok = c.hermiticity <= 1e-10 && c.trace_error <= 1e-8 && c.min_eigenvalue >= -1e-8;
  return c;
}

DensityMatrix DensityMatrix::conjugated(const CMatrix& unitary) const {
  require_square(unitary, space_.dim(), "unitary");
  return {space_, unitary * entries_ * unitary.adjoint()};
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.space() == b.space())) throw InvalidArgument("trace distance across different spaces");
  const CMatrix diff = a.matrix() - b.matrix();
  const CMatrix herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

double expectation(const DensityMatrix& rho, const CMatrix& observable) {
  require_square(observable, rho.space().dim(), "observable");
  // Tr(O rho) = sum_ab O_ba rho_ab
  return (observable.transpose().cwiseProduct(rho.matrix())).sum().real();
}

// ---------------------------------------------------------------------------
// OperatorBasis

OperatorBasis::OperatorBasis(HilbertSpec space, std::vector<Element> elements)
    : space_(space), elements_(std::move(elements)) {
  const auto dim = space_.dim();
  slots_.assign(dim * dim, -1);
  trace_weights_ = RVector::Zero(idx(elements_.size()));
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& e = elements_[k];
    switch (e.kind) {
      case Kind::kDiagonal:
        slots_[e.row * dim + e.col] = static_cast<std::int64_t>(k);
        trace_weights_(idx(k)) = 1.0;
        break;
      case Kind::kSymmetric:
        slots_[e.row * dim + e.col] = static_cast<std::int64_t>(k);
        slots_[e.col * dim + e.row] = static_cast<std::int64_t>(k);
        break;
      case Kind::kAntisymmetric:
        break;
    }
  }
}

namespace {

template <typename Keep>
std::vector<OperatorBasis::Element> make_elements(std::size_t dim, Keep keep) {
  std::vector<OperatorBasis::Element> out;
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a; b < dim; ++b) {
      if (!keep(a, b)) continue;
      const auto ra = static_cast<std::uint32_t>(a);
      const auto rb = static_cast<std::uint32_t>(b);
      if (a == b) {
        out.push_back({ra, rb, OperatorBasis::Kind::kDiagonal});
      } else {
        out.push_back({ra, rb, OperatorBasis::Kind::kSymmetric});
        out.push_back({ra, rb, OperatorBasis::Kind::kAntisymmetric});
      }
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const OperatorBasis> OperatorBasis::full(HilbertSpec space) {
  auto elements = make_elements(space.dim(), [](std::size_t, std::size_t) { return true; });
  return std::shared_ptr<const OperatorBasis>(new OperatorBasis(space, std::move(elements)));
}

std::shared_ptr<const OperatorBasis> OperatorBasis::excitation_balanced(HilbertSpec space) {
  auto elements = make_elements(space.dim(), [](std::size_t a, std::size_t b) {
    return op::excitations(a) == op::excitations(b);
  });
  return std::shared_ptr<const OperatorBasis>(new OperatorBasis(space, std::move(elements)));
}

bool OperatorBasis::contains(std::size_t row, std::size_t col) const {
  return index_of(row, col) >= 0;
}

double OperatorBasis::leakage(const CMatrix& op) const {
  require_square(op, space_.dim(), "operator");
  if (is_full()) return 0.0;
  const auto dim = space_.dim();
  double sum = 0.0;
  for (std::size_t b = 0; b < dim; ++b) {
    for (std::size_t a = 0; a < dim; ++a) {
      if (index_of(a, b) < 0) sum += std::norm(op(idx(a), idx(b)));
    }
  }
  return std::sqrt(sum);
}

CVector OperatorBasis::coordinates(const CMatrix& op) const {
  require_square(op, space_.dim(), "operator");
  CVector c(idx(elements_.size()));
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& e = elements_[k];
    const Complex ab = op(e.row, e.col);
    const Complex ba = op(e.col, e.row);
    switch (e.kind) {
      case Kind::kDiagonal:
        c(idx(k)) = ab;
        break;
      case Kind::kSymmetric:
        c(idx(k)) = (ab + ba) * kInvSqrt2;
        break;
      case Kind::kAntisymmetric:
        c(idx(k)) = Complex(0.0, kInvSqrt2) * (ba - ab);
        break;
    }
  }
  return c;
}

RVector OperatorBasis::hermitian_coordinates(const CMatrix& op) const {
  require_square(op, space_.dim(), "operator");
  RVector c(idx(elements_.size()));
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& e = elements_[k];
    const Complex ab = op(e.row, e.col);
    const Complex ba = op(e.col, e.row);
    switch (e.kind) {
      case Kind::kDiagonal:
        c(idx(k)) = ab.real();
        break;
      case Kind::kSymmetric:
        c(idx(k)) = (ab.real() + ba.real()) * kInvSqrt2;
        break;
      case Kind::kAntisymmetric:
        c(idx(k)) = (ab.imag() - ba.imag()) * kInvSqrt2;
        break;
    }
  }
  return c;
}

CMatrix OperatorBasis::to_operator(const CVector& coords) const {
  if (coords.size() != idx(elements_.size())) throw InvalidArgument("coordinate vector size");
  const auto d = idx(space_.dim());
  CMatrix out = CMatrix::Zero(d, d);
  const Complex i_half(0.0, kInvSqrt2);
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& e = elements_[k];
    const Complex v = coords(idx(k));
    switch (e.kind) {
      case Kind::kDiagonal:
        out(e.row, e.col) += v;
        break;
      case Kind::kSymmetric:
        out(e.row, e.col) += v * kInvSqrt2;
        out(e.col, e.row) += v * kInvSqrt2;
        break;
      case Kind::kAntisymmetric:
        out(e.row, e.col) += i_half * v;
        out(e.col, e.row) -= i_half * v;
        break;
    }
  }
  return out;
}

CMatrix OperatorBasis::to_operator(const RVector& coords) const {
  return to_operator(CVector(coords.cast<Complex>()));
}

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(BasisPtr basis, RMatrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  if (!basis_) throw InvalidArgument("superoperator needs a basis");
  const auto n = idx(basis_->size());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw InvalidArgument("superoperator matrix does not match its basis size");
  }
}

Superoperator Superoperator::zero(BasisPtr basis) {
  const auto n = idx(basis->size());
  return {std::move(basis), RMatrix::Zero(n, n)};
}

Superoperator Superoperator::identity(BasisPtr basis) {
  const auto n = idx(basis->size());
  return {std::move(basis), RMatrix::Identity(n, n)};
}

Superoperator Superoperator::superrotation(BasisPtr basis, const CMatrix& unitary) {
  const auto& b = *basis;
  require_square(unitary, b.space().dim(), "unitary");
  const auto n = idx(b.size());
  RMatrix m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    RVector e = RVector::Zero(n);
    e(k) = 1.0;
    const CMatrix img = unitary * b.to_operator(e) * unitary.adjoint();
    if (b.leakage(img) > kLeakTolerance * std::max(1.0, img.norm())) {
      throw InvalidArgument("unitary does not preserve the operator subspace");
    }
    m.col(k) = b.hermitian_coordinates(img);
  }
  return {std::move(basis), std::move(m)};
}

void Superoperator::require_compatible(const Superoperator& other) const {
  if (basis_ == other.basis_) return;
  if (!(basis_->space() == other.basis_->space()) || basis_->size() != other.basis_->size()) {
    throw InvalidArgument("superoperators act on different operator spaces");
  }
  const auto a = basis_->elements();
  const auto b = other.basis_->elements();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].row != b[k].row || a[k].col != b[k].col || a[k].kind != b[k].kind) {
      throw InvalidArgument("superoperators use different operator bases");
    }
  }
}

CMatrix Superoperator::apply(const CMatrix& op) const {
  const double leak = basis_->leakage(op);
  if (leak > kLeakTolerance * std::max(1.0, op.norm())) {
    throw InvalidArgument("operator has support outside the superoperator's subspace");
  }
  const CVector c = basis_->coordinates(op);
  CVector out(c.size());
  out.real() = matrix_ * c.real();
  out.imag() = matrix_ * c.imag();
  return basis_->to_operator(out);
}

CMatrix Superoperator::column_stacked() const {
  const auto dim = basis_->space().dim();
  const auto d2 = idx(dim * dim);
  CMatrix out = CMatrix::Zero(d2, d2);
  for (std::size_t b = 0; b < dim; ++b) {
    for (std::size_t a = 0; a < dim; ++a) {
      if (!basis_->contains(a, b)) continue;
      CMatrix unit = CMatrix::Zero(idx(dim), idx(dim));
      unit(idx(a), idx(b)) = 1.0;
      const CMatrix img = apply(unit);
      out.col(idx(a + b * dim)) = Eigen::Map<const CVector>(img.data(), d2);
    }
  }
  return out;
}

double Superoperator::spectral_norm() const {
  if (matrix_.rows() == 0) return 0.0;
  if (matrix_.rows() <= 256) {
    Eigen::JacobiSVD<RMatrix> svd(matrix_);
    return svd.singularValues()(0);
  }
  // Power iteration on A^T A from a fixed pseudo-random start.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  RVector v(matrix_.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < 5000; ++it) {
    RVector w = matrix_.transpose() * (matrix_ * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = std::sqrt(norm);
    v = w / norm;
    if (std::abs(next - sigma) <= 1e-13 * next) return next;
    sigma = next;
  }
  return sigma;
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  require_compatible(other);
  return {basis_, matrix_ + other.matrix_};
}

Superoperator Superoperator::operator-(const Superoperator& other) const {
  require_compatible(other);
  return {basis_, matrix_ - other.matrix_};
}

Superoperator Superoperator::operator*(const Superoperator& other) const {
  require_compatible(other);
  RMatrix m(matrix_.rows(), other.matrix_.cols());
  m.noalias() = matrix_ * other.matrix_;
  return {basis_, std::move(m)};
}

Superoperator Superoperator::operator*(double scale) const { return {basis_, matrix_ * scale}; }

// ---------------------------------------------------------------------------
// Generators

Superoperator lindblad_generator(const LindbladChannel& channel, BasisPtr basis) {
  if (!basis) throw InvalidArgument("generator needs a basis");
  const auto& b = *basis;
  const auto dim = b.space().dim();
  const auto d = idx(dim);
  require_square(channel.hamiltonian, dim, "Hamiltonian");
  for (const auto& jump : channel.jumps) require_square(jump, dim, "jump operator");
  const double herm = (channel.hamiltonian - channel.hamiltonian.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw InvalidArgument("Hamiltonian is not Hermitian");

  // L[E_ab] = M E_ab + E_ab M^dagger + sum_j L_j E_ab L_j^dagger, M = -iH - K/2.
  CMatrix k_sum = CMatrix::Zero(d, d);
  for (const auto& jump : channel.jumps) k_sum.noalias() += jump.adjoint() * jump;
  const CMatrix m = Complex(0.0, -1.0) * channel.hamiltonian - 0.5 * k_sum;
  const CMatrix m_dag = m.adjoint();

  auto unit_image = [&](std::size_t a, std::size_t bb, CMatrix& out, Complex w) {
    out.col(idx(bb)) += w * m.col(idx(a));
    out.row(idx(a)) += w * m_dag.row(idx(bb));
    for (const auto& jump : channel.jumps) {
      out.noalias() += (w * jump.col(idx(a))) * jump.col(idx(bb)).adjoint();
    }
  };

  const auto n = idx(b.size());
  RMatrix gen(n, n);
  CMatrix image(d, d);
  const auto elements = b.elements();
  double leak_max = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& e = elements[static_cast<std::size_t>(k)];
    image.setZero();
    switch (e.kind) {
      case OperatorBasis::Kind::kDiagonal:
        unit_image(e.row, e.col, image, 1.0);
        break;
      case OperatorBasis::Kind::kSymmetric:
        unit_image(e.row, e.col, image, kInvSqrt2);
        unit_image(e.col, e.row, image, kInvSqrt2);
        break;
      case OperatorBasis::Kind::kAntisymmetric:
        unit_image(e.row, e.col, image, Complex(0.0, kInvSqrt2));
        unit_image(e.col, e.row, image, Complex(0.0, -kInvSqrt2));
        break;
    }
    leak_max = std::max(leak_max, b.leakage(image) / std::max(1.0, image.norm()));
    gen.col(k) = b.hermitian_coordinates(image);
  }
  if (leak_max > kLeakTolerance) {
    throw InvalidArgument("channel does not leave the operator subspace invariant (leak " +
                          std::to_string(leak_max) + ")");
  }
  return {std::move(basis), std::move(gen)};
}

Superoperator lindblad_generator(const LindbladChannel& channel) {
  const auto dim = static_cast<std::size_t>(channel.hamiltonian.rows());
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim || n == 0) {
    throw InvalidArgument("Hamiltonian dimension is not a power of two");
  }
  return lindblad_generator(channel, OperatorBasis::full(HilbertSpec::qubits(n)));
}

Superoperator poisson_bracket(const Superoperator& a, const Superoperator& b) {
  return a * b - b * a;
}

Superoperator conjugated(const Superoperator& generator, const CMatrix& unitary) {
  const Superoperator rot = Superoperator::superrotation(generator.basis_ptr(), unitary);
  // Superrotations are orthogonal in an orthonormal basis: inverse = transpose.
  const Superoperator inv(generator.basis_ptr(), rot.matrix().transpose());
  return rot * generator * inv;
}

// ---------------------------------------------------------------------------
// Propagation

RMatrix matrix_exponential(const RMatrix& a) {
  RMatrix out = a.exp();
  return out;
}

const RMatrix& ExponentialCache::exponential(
    const std::shared_ptr<const Superoperator>& generator, double duration) {
  const auto key = std::make_pair(generator.get(), duration);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  keep_alive_.push_back(generator);
  auto [pos, inserted] =
      entries_.emplace(key, matrix_exponential(generator->matrix() * duration));
  return pos->second;
}

RMatrix unit_propagator(std::span<const Segment> unit, ExponentialCache& cache) {
  if (unit.empty()) throw InvalidArgument("empty propagation unit");
  const auto n = unit.front().generator->size();
  RMatrix p = RMatrix::Identity(n, n);
  RMatrix tmp(n, n);
  for (std::size_t s = 0; s < unit.size(); ++s) {
    const auto& seg = unit[s];
    if (!(seg.duration >= 0.0)) throw InvalidArgument("segment durations must be >= 0");
    if (seg.duration == 0.0) continue;
    const RMatrix& e = cache.exponential(seg.generator, seg.duration);
    if (!e.allFinite()) {
      throw PropagationError("non-finite exponential in segment " + std::to_string(s), s);
    }
    tmp.noalias() = e * p;
    p.swap(tmp);
  }
  return p;
}

RVector apply_power(RMatrix propagator, long k, RVector x) {
  if (k < 0) throw InvalidArgument("negative power");
  RMatrix tmp(propagator.rows(), propagator.cols());
  while (k > 0) {
    if (k & 1) x = propagator * x;
    k >>= 1;
    if (k > 0) {
      tmp.noalias() = propagator * propagator;
      propagator.swap(tmp);
    }
  }
  return x;
}

RVector state_coordinates(const OperatorBasis& basis, const DensityMatrix& rho) {
  if (!(basis.space() == rho.space())) throw InvalidArgument("state and basis spaces differ");
  if (basis.leakage(rho.matrix()) > kLeakTolerance) {
    throw InvalidArgument("state has support outside the operator subspace");
  }
  return basis.hermitian_coordinates(rho.matrix());
}

DensityMatrix state_from_coordinates(const OperatorBasis& basis, const RVector& coords) {
  return {basis.space(), basis.to_operator(coords)};
}

PropagationResult propagate_piecewise(const DensityMatrix& rho0,
                                      std::span<const Segment> segments) {
  if (segments.empty()) return {rho0, std::abs(rho0.trace() - Complex(1.0)), false};
  const auto& basis = segments.front().generator->basis();
  RVector x = state_coordinates(basis, rho0);
  ExponentialCache cache;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (!(seg.duration >= 0.0)) throw InvalidArgument("segment durations must be >= 0");
    if (seg.generator->size() != x.size()) throw InvalidArgument("segment basis mismatch");
    if (seg.duration == 0.0) continue;
    x = cache.exponential(seg.generator, seg.duration) * x;
    if (!x.allFinite()) {
      throw PropagationError("non-finite state after segment " + std::to_string(s), s);
    }
  }
  const double tr = basis.trace_weights().dot(x);
  PropagationResult result{state_from_coordinates(basis, x), std::abs(tr - 1.0), false};
  if (result.trace_drift > 1e-8) {
    result.state = state_from_coordinates(basis, x / tr);
    result.renormalized = true;
  }
  return result;
}

SteadyStateResult steady_state_by_evolution(const DensityMatrix& rho0,
                                            std::span<const Segment> unit,
                                            const SteadyStateOptions& options) {
  if (unit.empty()) throw InvalidArgument("empty propagation unit");
  double period = 0.0;
  for (const auto& seg : unit) period += seg.duration;
  if (!(period > 0.0)) throw InvalidArgument("unit duration must be positive");
  const auto& basis = unit.front().generator->basis();
  const RVector x0 = state_coordinates(basis, rho0);

  ExponentialCache cache;
  RMatrix stride = unit_propagator(unit, cache);
  RVector x = stride * x0;
  long units = 1;
  double distance = 0.0;
  RMatrix tmp(stride.rows(), stride.cols());
  while (true) {
    RVector next = stride * x;
    if (!next.allFinite()) throw PropagationError("non-finite state during steady-state search", 0);
    distance = trace_distance(state_from_coordinates(basis, x), state_from_coordinates(basis, next));
    if (distance < options.tolerance) {
      return {state_from_coordinates(basis, next / basis.trace_weights().dot(next)), 2 * units,
              distance};
    }
    if (2 * units > options.max_units / 2) break;
    x = std::move(next);
    tmp.noalias() = stride * stride;
    stride.swap(tmp);
    units *= 2;
  }
  throw ConvergenceError("steady state not reached within " + std::to_string(options.max_units) +
                             " units (last trace distance " + std::to_string(distance) + ")",
                         distance, 2 * units);
}

DensityMatrix evolve_repeated(const DensityMatrix& rho0, std::span<const Segment> unit,
                              long repetitions) {
  if (repetitions < 0) throw InvalidArgument("repetitions must be >= 0");
  if (unit.empty() || repetitions == 0) return rho0;
  const auto& basis = unit.front().generator->basis();
  ExponentialCache cache;
  const RVector x = apply_power(unit_propagator(unit, cache), repetitions,
                                state_coordinates(basis, rho0));
  return state_from_coordinates(basis, x);
}

double magnus_convergence_bound(std::span<const Segment> segments) {
  double total = 0.0;
  std::map<const Superoperator*, double> norms;
  for (const auto& seg : segments) {
    auto it = norms.find(seg.generator.get());
    if (it == norms.end()) it = norms.emplace(seg.generator.get(), seg.generator->spectral_norm()).first;
    total += it->second * seg.duration;
  }
  return total;
}

}  // namespace ddprep
