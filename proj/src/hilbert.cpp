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

#include "ddprep/hilbert.hpp"

#include <bit>
#include <string>
#include <vector>

namespace ddprep {

HilbertSpec HilbertSpec::qubits(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw InvalidArgument("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                          "], got " + std::to_string(n));
  }
  return HilbertSpec{n};
}

namespace op {

Matrix2 pauli_x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2 pauli_y() {
  Matrix2 m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix2 pauli_z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2 raising() {
  Matrix2 m;
  m << 0, 1, 0, 0;
  return m;
}

Matrix2 lowering() {
  Matrix2 m;
  m << 0, 0, 1, 0;
  return m;
}

CMatrix identity(const HilbertSpec& space) {
  return CMatrix::Identity(static_cast<Eigen::Index>(space.dim()),
                           static_cast<Eigen::Index>(space.dim()));
}

CMatrix site(const HilbertSpec& space, int site, const Matrix2& local) {
  if (site < 0 || site >= space.n_qubits) {
    throw InvalidArgument("site index " + std::to_string(site) + " out of range");
  }
  const auto dim = space.dim();
  const int shift = space.n_qubits - 1 - site;
  const std::size_t mask = std::size_t{1} << shift;
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    const int c = static_cast<int>((col >> shift) & 1U);
    for (int r = 0; r < 2; ++r) {
      if (local(r, c) == Complex(0.0)) continue;
      const std::size_t row = r ? (col | mask) : (col & ~mask);
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += local(r, c);
    }
  }
  return out;
}

CMatrix collective(const HilbertSpec& space, const Matrix2& local,
                   std::span<const double> weights) {
  if (weights.size() != static_cast<std::size_t>(space.n_qubits)) {
    throw InvalidArgument("collective operator needs one weight per qubit");
  }
  const auto d = static_cast<Eigen::Index>(space.dim());
  CMatrix out = CMatrix::Zero(d, d);
  for (int n = 0; n < space.n_qubits; ++n) {
    if (weights[static_cast<std::size_t>(n)] != 0.0) {
      out += weights[static_cast<std::size_t>(n)] * site(space, n, local);
    }
  }
  return out;
}

CMatrix global_x(const HilbertSpec& space) {
  const auto dim = space.dim();
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix out = CMatrix::Zero(d, d);
  for (std::size_t a = 0; a < dim; ++a) {
    out(static_cast<Eigen::Index>(a ^ (dim - 1)), static_cast<Eigen::Index>(a)) = 1.0;
  }
  return out;
}

CMatrix pauli_string(const HilbertSpec& space, std::string_view letters) {
  if (letters.size() != static_cast<std::size_t>(space.n_qubits)) {
    throw InvalidArgument("Pauli string '" + std::string(letters) + "' has wrong length");
  }
  CMatrix out = identity(space);
  for (int n = 0; n < space.n_qubits; ++n) {
    switch (letters[static_cast<std::size_t>(n)]) {
      case 'I':
        break;
      case 'X':
        out = site(space, n, pauli_x()) * out;
        break;
      case 'Y':
        out = site(space, n, pauli_y()) * out;
        break;
      case 'Z':
        out = site(space, n, pauli_z()) * out;
        break;
      default:
        throw InvalidArgument("Pauli string '" + std::string(letters) +
                              "' contains a letter outside {I,X,Y,Z}");
    }
  }
  return out;
}

int excitations(std::size_t basis_index) noexcept { return std::popcount(basis_index); }

CMatrix total_spin_squared(const HilbertSpec& space) {
  const std::vector<double> half(static_cast<std::size_t>(space.n_qubits), 0.5);
  const CMatrix jx = collective(space, pauli_x(), half);
  const CMatrix jy = collective(space, pauli_y(), half);
  const CMatrix jz = collective(space, pauli_z(), half);
  return jx * jx + jy * jy + jz * jz;
}

}  // namespace op
}  // namespace ddprep
