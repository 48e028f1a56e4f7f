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

#include "ddprep/magnus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddprep {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breakpoints,
                                         std::vector<Coefficients> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (breakpoints_.size() < 2 || segments_.size() + 1 != breakpoints_.size()) {
    throw InvalidArgument("piecewise polynomial needs K+1 breakpoints for K segments");
  }
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] >= breakpoints_[k - 1])) {
      throw InvalidArgument("breakpoints must be non-decreasing");
    }
  }
}

PiecewisePolynomial PiecewisePolynomial::piecewise_constant(std::vector<double> breakpoints,
                                                            std::span<const double> values) {
  std::vector<Coefficients> segs(values.size(), Coefficients{});
  for (std::size_t k = 0; k < values.size(); ++k) segs[k][0] = values[k];
  return {std::move(breakpoints), std::move(segs)};
}

double PiecewisePolynomial::operator()(double t) const {
  if (t < breakpoints_.front() || t > breakpoints_.back()) {
    throw InvalidArgument("evaluation point outside the polynomial's domain");
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  auto k = static_cast<std::size_t>(it - breakpoints_.begin());
  k = std::min(k == 0 ? 0 : k - 1, segments_.size() - 1);
  const double s = t - breakpoints_[k];
  const auto& p = segments_[k];
  double v = 0.0;
  for (int j = kMaxDegree; j >= 0; --j) v = v * s + p[static_cast<std::size_t>(j)];
  return v;
}

PiecewisePolynomial PiecewisePolynomial::antiderivative() const {
  std::vector<Coefficients> out(segments_.size(), Coefficients{});
  double acc = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& p = segments_[k];
    if (p[kMaxDegree] != 0.0) throw InvalidArgument("antiderivative would exceed degree 3");
    out[k][0] = acc;
    for (std::size_t j = 0; j < kMaxDegree; ++j) out[k][j + 1] = p[j] / static_cast<double>(j + 1);
    const double h = breakpoints_[k + 1] - breakpoints_[k];
    double hp = h;
    for (std::size_t j = 0; j <= kMaxDegree; ++j) {
      acc += p[j] * hp / static_cast<double>(j + 1);
      hp *= h;
    }
  }
  return {breakpoints_, std::move(out)};
}

double PiecewisePolynomial::integral() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const double h = breakpoints_[k + 1] - breakpoints_[k];
    double hp = h;
    for (std::size_t j = 0; j <= kMaxDegree; ++j) {
      acc += segments_[k][j] * hp / static_cast<double>(j + 1);
      hp *= h;
    }
  }
  return acc;
}

void PiecewisePolynomial::require_same_grid(const PiecewisePolynomial& other) const {
  if (breakpoints_ != other.breakpoints_) {
    throw InvalidArgument("piecewise polynomials live on different breakpoints");
  }
}

PiecewisePolynomial PiecewisePolynomial::operator+(const PiecewisePolynomial& other) const {
  require_same_grid(other);
  auto out = segments_;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t j = 0; j <= kMaxDegree; ++j) out[k][j] += other.segments_[k][j];
  }
  return {breakpoints_, std::move(out)};
}

PiecewisePolynomial PiecewisePolynomial::operator-(const PiecewisePolynomial& other) const {
  return *this + other * -1.0;
}

PiecewisePolynomial PiecewisePolynomial::operator*(double scale) const {
  auto out = segments_;
  for (auto& seg : out) {
    for (auto& c : seg) c *= scale;
  }
  return {breakpoints_, std::move(out)};
}

PiecewisePolynomial PiecewisePolynomial::operator*(const PiecewisePolynomial& other) const {
  require_same_grid(other);
  std::vector<Coefficients> out(segments_.size(), Coefficients{});
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    for (std::size_t i = 0; i <= kMaxDegree; ++i) {
      for (std::size_t j = 0; j <= kMaxDegree; ++j) {
        const double v = segments_[k][i] * other.segments_[k][j];
        if (v == 0.0) continue;
        if (i + j > kMaxDegree) throw InvalidArgument("product would exceed degree 3");
        out[k][i + j] += v;
      }
    }
  }
  return {breakpoints_, std::move(out)};
}

PiecewisePolynomial PiecewisePolynomial::times_t() const {
  std::vector<Coefficients> out(segments_.size(), Coefficients{});
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& p = segments_[k];
    if (p[kMaxDegree] != 0.0) throw InvalidArgument("t * p would exceed degree 3");
    const double b = breakpoints_[k];
    for (std::size_t j = 0; j <= kMaxDegree; ++j) {
      out[k][j] += b * p[j];
      if (j + 1 <= kMaxDegree) out[k][j + 1] += p[j];
    }
  }
  return {breakpoints_, std::move(out)};
}

MagnusOrder parse_magnus_order(std::string_view text) {
  if (text == "1") return MagnusOrder::k1;
  if (text == "2") return MagnusOrder::k2;
  if (text == "3a") return MagnusOrder::k3a;
  if (text == "3b") return MagnusOrder::k3b;
  throw InvalidArgument("Magnus order must be one of 1, 2, 3a, 3b (got '" + std::string(text) +
                        "')");
}

int magnus_power(MagnusOrder order) noexcept {
  switch (order) {
    case MagnusOrder::k1:
      return 1;
    case MagnusOrder::k2:
      return 2;
    default:
      return 3;
  }
}

double select(const MagnusCoefficients& c, MagnusOrder order) noexcept {
  switch (order) {
    case MagnusOrder::k1:
      return c.alpha1;
    case MagnusOrder::k2:
      return c.alpha2;
    case MagnusOrder::k3a:
      return c.alpha3a;
    case MagnusOrder::k3b:
      return c.alpha3b;
  }
  return 0.0;
}

MagnusCoefficients coefficients(std::span<const double> times, double total) {
  if (!(total > 0.0)) throw InvalidArgument("coefficient horizon must be positive");
  std::vector<double> breaks;
  breaks.reserve(times.size() + 2);
  breaks.push_back(0.0);
  breaks.insert(breaks.end(), times.begin(), times.end());
  breaks.push_back(total);
  std::vector<double> signs(times.size() + 1);
  for (std::size_t i = 0; i < signs.size(); ++i) signs[i] = (i % 2 == 0) ? 1.0 : -1.0;

  // c1 = F/t, c2 = K/(2 t^2) with F = int f, K = int (F - t f);
  // t^2 h = 3K - t (F - t f) and t^2 (6 c2 f - c1 g) = 3K f - F (F - t f).
  const auto f = PiecewisePolynomial::piecewise_constant(std::move(breaks), signs);
  const auto big_f = f.antiderivative();
  const auto tg = big_f - f.times_t();
  const auto big_k = tg.antiderivative();
  const auto h3a = big_k * 3.0 - tg.times_t();
  const auto h3b = big_k * f * 3.0 - big_f * tg;

  const double t2 = total * total;
  MagnusCoefficients c;
  c.alpha1 = big_f(total) / total;
  c.alpha2 = big_k(total) / (2.0 * t2);
  c.alpha3a = h3a.integral() / (12.0 * t2 * total);
  c.alpha3b = h3b.integral() / (12.0 * t2 * total);
  return c;
}

MagnusCoefficients coefficients(const PulseSequence& seq) {
  return coefficients(seq.times(), seq.t_p());
}

double coefficients_scaled(const PulseSequence& seq, long l, MagnusOrder order) {
  if (l < 1) throw InvalidArgument("repetition count must be >= 1");
  const double a = select(coefficients(seq), order);
  return a * std::pow(static_cast<double>(l), 1 - magnus_power(order));
}

double coefficients_repeated_direct(const PulseSequence& seq, long l, MagnusOrder order) {
  const auto schedule = repeat(seq, l);
  return select(coefficients(flatten(schedule), schedule.duration), order);
}

MagnusTerms magnus_terms(const Superoperator& l_p0, const Superoperator& l_n,
                         const MagnusCoefficients& coeffs, double t_p, long l) {
  if (l < 1) throw InvalidArgument("repetition count must be >= 1");
  if (!(t_p > 0.0)) throw InvalidArgument("t_p must be positive");
  const double t = t_p * static_cast<double>(l);
  const auto b1 = poisson_bracket(l_p0, l_n);
  MagnusTerms out{(l_p0 + l_n * coeffs.alpha1) * t, b1 * (t * coeffs.alpha2 * t_p),
                  (poisson_bracket(l_p0, b1) * coeffs.alpha3a +
                   poisson_bracket(l_n, b1) * coeffs.alpha3b) *
                      (t * t_p * t_p)};
  return out;
}

Superoperator leading_generator(const Superoperator& l_p0, const Superoperator& l_n,
                                const PulseSequence& seq) {
  const auto c = coefficients(seq);
  constexpr double kZero = 1e-10;
  if (std::abs(c.alpha1) > kZero || std::abs(c.alpha2) > kZero) {
    throw InvalidArgument("leading-order generator needs alpha1 = alpha2 = 0 (sequence '" +
                          seq.label() + "')");
  }
  // alpha3b N^2 tau_bar^2 = alpha3b t_p^2.
  const double w = c.alpha3b * seq.t_p() * seq.t_p();
  return l_p0 + poisson_bracket(l_n, poisson_bracket(l_p0, l_n)) * w;
}

}  // namespace ddprep
