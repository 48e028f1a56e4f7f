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

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddprep/liouville.hpp"
#include "ddprep/pulses.hpp"

namespace ddprep {

/// Piecewise polynomial of degree <= 3 on [b_0, b_K].
///
/// Segment k covers [b_k, b_{k+1}] and stores coefficients in the local
/// variable s = t - b_k.
class PiecewisePolynomial {
 public:
  static constexpr int kMaxDegree = 3;
  using Coefficients = std::array<double, kMaxDegree + 1>;

  PiecewisePolynomial(std::vector<double> breakpoints, std::vector<Coefficients> segments);

  /// Constant value per interval.
  static PiecewisePolynomial piecewise_constant(std::vector<double> breakpoints,
                                                std::span<const double> values);

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Coefficients>& segments() const noexcept { return segments_; }

  /// Value at t; at a breakpoint the right-hand segment wins (the last
  /// breakpoint uses the last segment).
  double operator()(double t) const;

  /// Running integral from b_0, continuous across breakpoints.
  PiecewisePolynomial antiderivative() const;
  /// Integral over the whole domain.
  double integral() const;

  PiecewisePolynomial operator+(const PiecewisePolynomial& other) const;
  PiecewisePolynomial operator-(const PiecewisePolynomial& other) const;
  PiecewisePolynomial operator*(double scale) const;
  /// Pointwise product; rejects results above kMaxDegree.
  PiecewisePolynomial operator*(const PiecewisePolynomial& other) const;
  /// t * p(t).
  PiecewisePolynomial times_t() const;

 private:
  void require_same_grid(const PiecewisePolynomial& other) const;

  std::vector<double> breakpoints_;
  std::vector<Coefficients> segments_;
};

/// c_1, c_2, c_3a, c_3b of a basic unit evaluated at t = t_p.
struct MagnusCoefficients {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3a = 0.0;
  double alpha3b = 0.0;
};

enum class MagnusOrder { k1, k2, k3a, k3b };

/// Parses "1", "2", "3a" or "3b".
MagnusOrder parse_magnus_order(std::string_view text);
/// Expansion order n of the coefficient (3 for both third-order ones).
int magnus_power(MagnusOrder order) noexcept;
double select(const MagnusCoefficients& c, MagnusOrder order) noexcept;

/// Exact coefficients over [0, total] for pulses at `times`.
MagnusCoefficients coefficients(std::span<const double> times, double total);
MagnusCoefficients coefficients(const PulseSequence& seq);

/// l^(1-n) alpha_n.
double coefficients_scaled(const PulseSequence& seq, long l, MagnusOrder order);
/// c_n computed directly on the l-fold repeated pulse train.
double coefficients_repeated_direct(const PulseSequence& seq, long l, MagnusOrder order);

struct MagnusTerms {
  Superoperator omega1;
  Superoperator omega2;
  Superoperator omega3;
};

/// First three Magnus terms after l repetitions (t = l t_p).
MagnusTerms magnus_terms(const Superoperator& l_p0, const Superoperator& l_n,
                         const MagnusCoefficients& coeffs, double t_p, long l);

/// L_P0 + alpha3b t_p^2 [L_N, [L_P0, L_N]]; rejects sequences with nonzero
/// first or second order coefficients.
Superoperator leading_generator(const Superoperator& l_p0, const Superoperator& l_n,
                                const PulseSequence& seq);

}  // namespace ddprep
