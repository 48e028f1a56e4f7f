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
#include <random>
#include <vector>

#include "ddprep/liouville.hpp"

namespace ddprep::testing {

inline CMatrix random_matrix(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  const auto n = static_cast<Eigen::Index>(d);
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline CMatrix random_hermitian(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  const CMatrix m = random_matrix(d, rng, scale);
  return 0.5 * (m + m.adjoint());
}

inline DensityMatrix random_state(HilbertSpec space, std::mt19937_64& rng) {
  const CMatrix m = random_matrix(space.dim(), rng);
  CMatrix rho = m * m.adjoint();
  rho /= rho.trace();
  return {space, rho};
}

inline LindbladChannel random_channel(HilbertSpec space, int n_jumps, std::mt19937_64& rng) {
  LindbladChannel ch;
  ch.hamiltonian = random_hermitian(space.dim(), rng);
  for (int k = 0; k < n_jumps; ++k) ch.jumps.push_back(random_matrix(space.dim(), rng, 0.5));
  return ch;
}

/// Column-stacked Lindblad generator built straight from the Kronecker formula.
inline CMatrix kron_lindbladian(const LindbladChannel& ch) {
  const auto d = ch.hamiltonian.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  auto kron = [](const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  // vec(A X B) = (B^T kron A) vec(X)
  CMatrix out = Complex(0, -1) * (kron(id, ch.hamiltonian) - kron(ch.hamiltonian.transpose(), id));
  for (const auto& l : ch.jumps) {
    const CMatrix ldl = l.adjoint() * l;
    out += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return out;
}

}  // namespace ddprep::testing
