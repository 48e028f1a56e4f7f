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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddprep/types.hpp"

namespace ddprep {

/// Ideal pi-pulse arrival times inside one basic unit [0, t_p].
class PulseSequence {
 public:
  PulseSequence() = default;
  /// Validates 0 < times[0] < ... < times[N-1] < t_p.
  PulseSequence(double t_p, std::vector<double> times, std::string label);

  double t_p() const noexcept { return t_p_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return times_.size(); }

  /// Mean pulse interval t_p / N (infinite without pulses).
  double tau_bar() const noexcept;
  /// Pulse density N / t_p.
  double density() const noexcept { return static_cast<double>(times_.size()) / t_p_; }

  /// Same pulse pattern stretched to a new unit duration.
  PulseSequence rescaled(double t_p) const;

 private:
  double t_p_ = 1.0;
  std::vector<double> times_;
  std::string label_ = "none";
};

/// f(t) = (-1)^(number of pulses at or before t); rejects t outside [0, t_p].
int toggling_sign(const PulseSequence& seq, double t);

/// Sum of (-1)^i (tau_{i+1} - tau_i) with tau_0 = 0 and tau_{N+1} = t_p.
double signed_balance(const PulseSequence& seq);

PulseSequence free_unit(double t_p);
/// Pulses at t_p/4 and 3 t_p/4.
PulseSequence cpmg_unit(double t_p);
/// tau_j = t_p sin^2(pi j / (2N + 2)).
PulseSequence udd_unit(int n_pulses, double t_p);
/// Concatenated sequence of the given order.
///
/// The toggling pattern of order k is the order k-1 pattern followed by its
/// negation, starting from a single + interval; pulses sit wherever the sign
/// changes on the grid j t_p / 2^k. This equals recursive concatenation with
/// adjacent pulse pairs cancelled: order 2 is CPMG, orders 3 and 4 carry 5 and
/// 10 pulses.
PulseSequence cdd_unit(int order, double t_p);
/// Explicit pulse pattern given as fractions of t_p in (0, 1).
PulseSequence custom_unit(std::span<const double> normalized_times, double t_p,
                          std::string label = "custom");

inline constexpr int kMaxCddOrder = 12;
inline constexpr int kMaxUddPulses = 4096;

/// Resolves "none", "cpmg", "udd<N>" or "cdd<k>"; rejects anything else
/// (including "random", which is not a periodic unit).
PulseSequence sequence_from_tag(std::string_view tag, double t_p);
/// Pulse count of a periodic tag without building it.
std::size_t pulse_count_for_tag(std::string_view tag);
/// True for periodic tags and "random".
bool is_valid_tag(std::string_view tag);

/// Pulse timeline over [0, duration].
struct Schedule {
  enum class Mode { kPeriodic, kRandom };

  Mode mode = Mode::kPeriodic;
  PulseSequence unit;        // periodic mode
  long repetitions = 1;      // periodic mode
  double density = 0.0;      // random mode, pulses per unit time
  std::uint64_t seed = 0;    // random mode
  double duration = 0.0;
  std::vector<double> times;  // random mode arrival times

  double mean_pulse_count() const noexcept;
};

/// Periodic repetition of a unit; rejects repetitions < 1.
Schedule repeat(const PulseSequence& unit, long repetitions);

/// Homogeneous Poisson arrivals of rate `density` over [0, duration].
Schedule random_schedule(double density, double duration, std::uint64_t seed);

/// Global, strictly increasing pulse times of a schedule.
std::vector<double> flatten(const Schedule& schedule);

/// Constant-sign stretch between consecutive pulses.
struct Interval {
  double duration;
  int sign;
};

/// Intervals of [0, total] cut at `times`, starting with sign +1. Zero-length
/// intervals from coincident times are kept so the sign bookkeeping stays exact.
std::vector<Interval> intervals(std::span<const double> times, double total);

/// Independent 64-bit stream seed for grid point or trajectory `index`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace ddprep
