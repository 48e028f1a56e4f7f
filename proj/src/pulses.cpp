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

#include "ddprep/pulses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ddprep/types.hpp"

namespace ddprep {

PulseSequence::PulseSequence(double t_p, std::vector<double> times, std::string label)
    : t_p_(t_p), times_(std::move(times)), label_(std::move(label)) {
  if (!(t_p_ > 0.0) || !std::isfinite(t_p_)) {
    throw InvalidArgument("unit duration t_p must be positive and finite");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!(t > prev) || !(t < t_p_)) {
      throw InvalidArgument("pulse times must satisfy 0 < t_1 < ... < t_N < t_p (offending index " +
                            std::to_string(i) + ")");
    }
    prev = t;
  }
}

double PulseSequence::tau_bar() const noexcept {
  if (times_.empty()) return std::numeric_limits<double>::infinity();
  return t_p_ / static_cast<double>(times_.size());
}

PulseSequence PulseSequence::rescaled(double t_p) const {
  std::vector<double> scaled(times_.size());
  const double s = t_p / t_p_;
  std::transform(times_.begin(), times_.end(), scaled.begin(), [s](double t) { return t * s; });
  return {t_p, std::move(scaled), label_};
}

int toggling_sign(const PulseSequence& seq, double t) {
  if (!(t >= 0.0) || !(t <= seq.t_p())) throw InvalidArgument("time outside [0, t_p]");
  const auto passed = std::upper_bound(seq.times().begin(), seq.times().end(), t) -
                      seq.times().begin();
  return (passed % 2 == 0) ? 1 : -1;
}

double signed_balance(const PulseSequence& seq) {
  double sum = 0.0;
  for (const auto& iv : intervals(seq.times(), seq.t_p())) sum += iv.sign * iv.duration;
  return sum;
}

PulseSequence free_unit(double t_p) { return {t_p, {}, "none"}; }

PulseSequence cpmg_unit(double t_p) { return {t_p, {0.25 * t_p, 0.75 * t_p}, "cpmg"}; }

PulseSequence udd_unit(int n_pulses, double t_p) {
  if (n_pulses < 1 || n_pulses > kMaxUddPulses) {
    throw InvalidArgument("UDD pulse count must be in [1, " + std::to_string(kMaxUddPulses) + "]");
  }
  std::vector<double> times(static_cast<std::size_t>(n_pulses));
  const double denom = 2.0 * n_pulses + 2.0;
  for (int j = 1; j <= n_pulses; ++j) {
    const double s = std::sin(std::numbers::pi * j / denom);
    times[static_cast<std::size_t>(j - 1)] = t_p * s * s;
  }
  return {t_p, std::move(times), "udd" + std::to_string(n_pulses)};
}

PulseSequence cdd_unit(int order, double t_p) {
  if (order < 1 || order > kMaxCddOrder) {
    throw InvalidArgument("CDD order must be in [1, " + std::to_string(kMaxCddOrder) + "]");
  }
  std::vector<int> signs{1};
  for (int k = 0; k < order; ++k) {
    const auto n = signs.size();
    for (std::size_t i = 0; i < n; ++i) signs.push_back(-signs[i]);
  }
  const double cells = static_cast<double>(signs.size());
  std::vector<double> times;
  for (std::size_t j = 1; j < signs.size(); ++j) {
    if (signs[j] != signs[j - 1]) times.push_back(t_p * static_cast<double>(j) / cells);
  }
  return {t_p, std::move(times), "cdd" + std::to_string(order)};
}

PulseSequence custom_unit(std::span<const double> normalized_times, double t_p,
                          std::string label) {
  std::vector<double> times(normalized_times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double x = normalized_times[i];
    if (!(x > 0.0) || !(x < 1.0)) throw InvalidArgument("normalized pulse times must lie in (0, 1)");
    times[i] = x * t_p;
  }
  return {t_p, std::move(times), std::move(label)};
}

namespace {

// Parses "<prefix><positive int>".
bool parse_family(std::string_view tag, std::string_view prefix, int& value) {
  if (tag.size() <= prefix.size() || tag.substr(0, prefix.size()) != prefix) return false;
  const auto digits = tag.substr(prefix.size());
  const auto* first = digits.data();
  const auto* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && value > 0;
}

}  // namespace

PulseSequence sequence_from_tag(std::string_view tag, double t_p) {
  int k = 0;
  if (tag == "none") return free_unit(t_p);
  if (tag == "cpmg") return cpmg_unit(t_p);
  if (parse_family(tag, "udd", k)) return udd_unit(k, t_p);
  if (parse_family(tag, "cdd", k)) return cdd_unit(k, t_p);
  throw InvalidArgument("unknown sequence tag '" + std::string(tag) + "'");
}

std::size_t pulse_count_for_tag(std::string_view tag) {
  int k = 0;
  if (parse_family(tag, "udd", k) && k <= kMaxUddPulses) return static_cast<std::size_t>(k);
  return sequence_from_tag(tag, 1.0).size();
}

bool is_valid_tag(std::string_view tag) {
  if (tag == "random") return true;
  try {
    sequence_from_tag(tag, 1.0);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

double Schedule::mean_pulse_count() const noexcept {
  if (mode == Mode::kRandom) return density * duration;
  return static_cast<double>(unit.size()) * static_cast<double>(repetitions);
}

Schedule repeat(const PulseSequence& unit, long repetitions) {
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  Schedule s;
  s.mode = Schedule::Mode::kPeriodic;
  s.unit = unit;
  s.repetitions = repetitions;
  s.duration = unit.t_p() * static_cast<double>(repetitions);
  return s;
}

Schedule random_schedule(double density, double duration, std::uint64_t seed) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw InvalidArgument("pulse density must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("schedule duration must be positive");
  }
  Schedule s;
  s.mode = Schedule::Mode::kRandom;
  s.density = density;
  s.duration = duration;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(density);
  double t = gap(rng);
  while (t < duration) {
    // A zero gap would break strict ordering; it has probability ~0 but is cheap to guard.
    if (s.times.empty() || t > s.times.back()) s.times.push_back(t);
    t += gap(rng);
  }
  return s;
}

std::vector<double> flatten(const Schedule& schedule) {
  if (schedule.mode == Schedule::Mode::kRandom) return schedule.times;
  const auto& unit = schedule.unit;
  std::vector<double> out;
  out.reserve(unit.size() * static_cast<std::size_t>(schedule.repetitions));
  for (long k = 0; k < schedule.repetitions; ++k) {
    const double offset = unit.t_p() * static_cast<double>(k);
    for (double t : unit.times()) out.push_back(offset + t);
  }
  return out;
}

std::vector<Interval> intervals(std::span<const double> times, double total) {
  std::vector<Interval> out;
  out.reserve(times.size() + 1);
  double prev = 0.0;
  int sign = 1;
  for (double t : times) {
    if (t < prev || t > total) throw InvalidArgument("pulse times must be sorted within [0, total]");
    out.push_back({t - prev, sign});
    prev = t;
    sign = -sign;
  }
  out.push_back({total - prev, sign});
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  // splitmix64 finalizer over a golden-ratio stride.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ddprep
