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

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ddprep/hilbert.hpp"
#include "ddprep/types.hpp"

namespace ddprep {

/// Density operator of a qubit register.
class DensityMatrix {
 public:
  struct Check {
    double hermiticity = 0.0;     // max |rho - rho^dagger| entry
    double trace_error = 0.0;     // |Tr rho - 1|
    double min_eigenvalue = 0.0;  // smallest eigenvalue of the Hermitian part
    bool ok = false;
  };

  DensityMatrix(HilbertSpec space, CMatrix entries);

  static DensityMatrix basis_state(HilbertSpec space, std::size_t index);
  static DensityMatrix pure(HilbertSpec space, const CVector& amplitudes);
  static DensityMatrix maximally_mixed(HilbertSpec space);
  /// Every spin up: |0...0><0...0|.
  static DensityMatrix fully_polarized(HilbertSpec space);

  const HilbertSpec& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return entries_; }
  Complex trace() const { return entries_.trace(); }

  /// Hermitian to 1e-10, unit trace to 1e-8, eigenvalues >= -1e-8.
  Check check() const;

  /// U rho U^dagger.
  DensityMatrix conjugated(const CMatrix& unitary) const;

 private:
  HilbertSpec space_;
  CMatrix entries_;
};

/// Half the trace norm of the difference.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Re Tr(observable rho).
double expectation(const DensityMatrix& rho, const CMatrix& observable);

/// Orthonormal Hermitian basis for an invariant subspace of operator space.
///
/// The subspace is spanned by matrix units |a><b| whose index pairs form a
/// transpose-closed set. Each unordered pair {a, b} contributes either
/// |a><a| (a == b) or the two Hermitian elements (|a><b| + |b><a|)/sqrt(2) and
/// i(|a><b| - |b><a|)/sqrt(2). Hermiticity-preserving maps are then real
/// matrices in this basis.
class OperatorBasis {
 public:
  enum class Kind : std::uint8_t { kDiagonal, kSymmetric, kAntisymmetric };

  struct Element {
    std::uint32_t row;
    std::uint32_t col;  // row <= col
    Kind kind;
  };

  /// All d^2 operators.
  static std::shared_ptr<const OperatorBasis> full(HilbertSpec space);

  /// Operators |a><b| with equal excitation number on both sides. Invariant
  /// under any generator whose Hamiltonian conserves the excitation number and
  /// whose jumps each change it by a fixed amount.
  static std::shared_ptr<const OperatorBasis> excitation_balanced(HilbertSpec space);

  const HilbertSpec& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool is_full() const noexcept { return elements_.size() == space_.dim() * space_.dim(); }
  std::span<const Element> elements() const noexcept { return elements_; }

  bool contains(std::size_t row, std::size_t col) const;

  /// Frobenius norm of the entries of `op` outside the subspace.
  double leakage(const CMatrix& op) const;

  /// c_k = Tr(B_k op); real for Hermitian `op`.
  CVector coordinates(const CMatrix& op) const;
  /// Real coordinates of the Hermitian part of `op`.
  RVector hermitian_coordinates(const CMatrix& op) const;

  CMatrix to_operator(const CVector& coords) const;
  CMatrix to_operator(const RVector& coords) const;

  /// Weights w with Tr(op) = w . coordinates(op).
  const RVector& trace_weights() const noexcept { return trace_weights_; }

  /// Index of the (first) element carrying matrix unit (row, col), or -1.
  std::int64_t index_of(std::size_t row, std::size_t col) const {
    return slots_[row * space_.dim() + col];
  }

 private:
  OperatorBasis(HilbertSpec space, std::vector<Element> elements);

  HilbertSpec space_;
  std::vector<Element> elements_;
  std::vector<std::int64_t> slots_;
  RVector trace_weights_;
};

using BasisPtr = std::shared_ptr<const OperatorBasis>;

/// Linear map on operators, stored as a real matrix in an OperatorBasis.
class Superoperator {
 public:
  Superoperator(BasisPtr basis, RMatrix matrix);

  static Superoperator zero(BasisPtr basis);
  static Superoperator identity(BasisPtr basis);
  /// rho -> U rho U^dagger; rejects unitaries that do not preserve the basis subspace.
  static Superoperator superrotation(BasisPtr basis, const CMatrix& unitary);

  const OperatorBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const RMatrix& matrix() const noexcept { return matrix_; }
  Eigen::Index size() const noexcept { return matrix_.rows(); }

  /// Applies the map to any operator supported on the basis subspace.
  CMatrix apply(const CMatrix& op) const;

  /// d^2 x d^2 complex matrix acting on column-stacked operators
  /// (vec(rho)[a + b d] = rho(a, b)); rows and columns outside the subspace are zero.
  CMatrix column_stacked() const;

  /// Largest singular value (equals the 2-norm on operator space).
  double spectral_norm() const;

  Superoperator operator+(const Superoperator& other) const;
  Superoperator operator-(const Superoperator& other) const;
  /// Composition: (A * B)[rho] = A[B[rho]].
  Superoperator operator*(const Superoperator& other) const;
  Superoperator operator*(double scale) const;
  friend Superoperator operator*(double scale, const Superoperator& s) { return s * scale; }

 private:
  void require_compatible(const Superoperator& other) const;

  BasisPtr basis_;
  RMatrix matrix_;
};

/// Hamiltonian (angular-frequency units) plus jump operators (sqrt-rate units).
struct LindbladChannel {
  CMatrix hamiltonian;
  std::vector<CMatrix> jumps;
};

/// L[rho] = -i[H, rho] + sum_j (L_j rho L_j^dagger - {L_j^dagger L_j, rho} / 2).
Superoperator lindblad_generator(const LindbladChannel& channel, BasisPtr basis);
/// Generator on the full operator space.
Superoperator lindblad_generator(const LindbladChannel& channel);

/// [A, B] = A B - B A as maps.
Superoperator poisson_bracket(const Superoperator& a, const Superoperator& b);

/// U L[U^dagger rho U] U^dagger.
Superoperator conjugated(const Superoperator& generator, const CMatrix& unitary);

/// Constant generator applied for a fixed duration.
struct Segment {
  std::shared_ptr<const Superoperator> generator;
  double duration = 0.0;
};

/// exp(a) by scaling and squaring with Pade approximants.
RMatrix matrix_exponential(const RMatrix& a);

/// Memoizes exp(G d) keyed by generator identity and duration. Not thread-safe:
/// each task owns its cache.
class ExponentialCache {
 public:
  const RMatrix& exponential(const std::shared_ptr<const Superoperator>& generator,
                             double duration);
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::pair<const Superoperator*, double>, RMatrix> entries_;
  std::vector<std::shared_ptr<const Superoperator>> keep_alive_;
};

/// Product of segment exponentials in temporal order (last segment leftmost).
RMatrix unit_propagator(std::span<const Segment> unit, ExponentialCache& cache);

/// P^k x by binary powering.
RVector apply_power(RMatrix propagator, long k, RVector x);

/// Coordinates of a state supported on the basis subspace; rejects leakage.
RVector state_coordinates(const OperatorBasis& basis, const DensityMatrix& rho);
DensityMatrix state_from_coordinates(const OperatorBasis& basis, const RVector& coords);

struct PropagationResult {
  DensityMatrix state;
  double trace_drift = 0.0;  // |Tr rho - 1| before any renormalization
  bool renormalized = false;
};

/// Time-ordered product of segment exponentials applied to rho0.
PropagationResult propagate_piecewise(const DensityMatrix& rho0,
                                      std::span<const Segment> segments);

struct SteadyStateOptions {
  double tolerance = 1e-7;
  long max_units = 1L << 40;
};

struct SteadyStateResult {
  DensityMatrix state;
  long units = 0;
  double last_distance = 0.0;
};

/// Fixed point reached from rho0 by repeating `unit`.
///
/// Evolves by doubling strides: after k units it compares rho(k) with
/// rho(2k) and stops once their trace distance is below the tolerance.
SteadyStateResult steady_state_by_evolution(const DensityMatrix& rho0,
                                            std::span<const Segment> unit,
                                            const SteadyStateOptions& options = {});

/// rho0 evolved through `repetitions` copies of `unit`.
DensityMatrix evolve_repeated(const DensityMatrix& rho0, std::span<const Segment> unit,
                              long repetitions);

/// Sum of ||G_k||_2 d_k; the Magnus series converges when this is below pi.
double magnus_convergence_bound(std::span<const Segment> segments);

}  // namespace ddprep
