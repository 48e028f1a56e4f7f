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
#include <span>
#include <string_view>

#include "ddprep/types.hpp"

namespace ddprep {

/// Register of spin-1/2 qubits.
///
/// Basis index convention: qubit 0 is the most significant bit, so operators
/// are Kronecker products op_0 (x) op_1 (x) ... . Bit value 0 is spin up
/// (sigma^z = +1) and bit value 1 is spin down.
struct HilbertSpec {
  static constexpr int kMaxQubits = 10;

  int n_qubits = 1;

  /// Validated constructor; rejects n < 1 or n > kMaxQubits.
  static HilbertSpec qubits(int n);

  std::size_t dim() const noexcept { return std::size_t{1} << n_qubits; }

  friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;
};

namespace op {

using Matrix2 = Eigen::Matrix2cd;

Matrix2 pauli_x();
Matrix2 pauli_y();
Matrix2 pauli_z();
/// sigma^+ = (sigma^x + i sigma^y) / 2, i.e. |up><down|.
Matrix2 raising();
/// sigma^- = (sigma^x - i sigma^y) / 2.
Matrix2 lowering();

CMatrix identity(const HilbertSpec& space);

/// Single-site operator embedded at qubit `site`.
CMatrix site(const HilbertSpec& space, int site, const Matrix2& local);

/// Sum over sites of weights[n] * local acting on qubit n.
CMatrix collective(const HilbertSpec& space, const Matrix2& local,
                   std::span<const double> weights);

/// sigma_x on every qubit.
CMatrix global_x(const HilbertSpec& space);

/// Tensor product from a string over {I, X, Y, Z}, one letter per qubit.
CMatrix pauli_string(const HilbertSpec& space, std::string_view letters);

/// Number of down spins in a basis state.
int excitations(std::size_t basis_index) noexcept;

/// Total spin J^2 = (sum_n s_n)^2 with s = sigma / 2.
CMatrix total_spin_squared(const HilbertSpec& space);

}  // namespace op

}  // namespace ddprep
