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

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ddprep {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when an operation receives input outside its contract.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative evolution fails to reach its stopping criterion.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_distance, long units)
      : std::runtime_error(what), last_distance_(last_distance), units_(units) {}

  double last_distance() const noexcept { return last_distance_; }
  long units() const noexcept { return units_; }

 private:
  double last_distance_;
  long units_;
};

/// Raised when propagation produces non-finite numbers.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, std::size_t segment)
      : std::runtime_error(what), segment_(segment) {}

  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

}  // namespace ddprep
