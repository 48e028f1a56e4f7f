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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ddprep/magnus.hpp"
#include "ddprep/singlet.hpp"

namespace ddprep {
namespace {

TEST(Singlet, SpecValidation) {
  EXPECT_THROW((SingletChannelSpec{5, 1.0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((SingletChannelSpec{4, 0.0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((SingletChannelSpec{4, 1.0, -1.0}.validate()), InvalidArgument);
  EXPECT_NO_THROW((SingletChannelSpec{4, 1.0, 1.0}.validate()));
}

TEST(Singlet, ProjectorAndMixedStateFraction) {
  const auto space = HilbertSpec::qubits(6);
  const CMatrix p = singlet_projector(space);
  EXPECT_LT((p * p - p).norm(), 1e-10);
  EXPECT_NEAR(p.trace().real(), 5.0, 1e-10);
  EXPECT_LT((op::total_spin_squared(space) * p).norm(), 1e-9);
  // maximally mixed state: 5 singlets out of 64 states
  EXPECT_NEAR(singlet_population(DensityMatrix::maximally_mixed(space)), 5.0 / 64.0, 1e-12);
  EXPECT_NEAR(singlet_population(DensityMatrix::fully_polarized(space)), 0.0, 1e-12);

  const auto two = HilbertSpec::qubits(2);
  CVector s(4);
  s << 0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0;
  EXPECT_NEAR(singlet_population(DensityMatrix::pure(two, s)), 1.0, 1e-12);
}

TEST(Singlet, ChannelStaysInBalancedSector) {
  const SingletChannelSpec spec{4, 10.0, 1.0};
  const auto space = HilbertSpec::qubits(4);
  const auto full = OperatorBasis::full(space);
  const auto sector = OperatorBasis::excitation_balanced(space);
  const auto gen = lindblad_generator(build_pump_channel(spec, Parity::kEven), full);
  // image of every sector element stays in the sector
  for (std::size_t k = 0; k < sector->size(); ++k) {
    RVector e = RVector::Zero(static_cast<Eigen::Index>(sector->size()));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    const CMatrix op = sector->to_operator(e);
    EXPECT_LT(sector->leakage(gen.apply(op)), 1e-12);
  }
}

TEST(Singlet, NoBroadeningMakesPulsesIrrelevant) {
  const SingletChannelSpec spec{4, 10.0, 1.0};
  const auto noise = InhomogeneousNoiseSpec::linear_profile(4, 0.0);
  const auto a = run_protected_preparation(spec, noise, repeat(free_unit(0.1), 20));
  const auto b = run_protected_preparation(spec, noise, repeat(cpmg_unit(0.1), 20));
  EXPECT_NEAR(a.p_j0, b.p_j0, 1e-12);
  EXPECT_GT(a.p_j0, 0.0);
  EXPECT_TRUE(a.state.check().ok);
}

TEST(Singlet, DecouplingRecoversPopulation) {
  const SingletChannelSpec spec{4, 10.0, 1.0};
  const double horizon = 20.0;
  const auto clean = run_protected_preparation(spec, InhomogeneousNoiseSpec::linear_profile(4, 0.0),
                                               repeat(free_unit(0.05), 400));
  const auto noise = InhomogeneousNoiseSpec::linear_profile(4, 20.0);
  const auto bare = run_protected_preparation(spec, noise, repeat(free_unit(0.05), 400));
  const auto dd = run_protected_preparation(spec, noise, repeat(cpmg_unit(0.002), 10000));
  EXPECT_NEAR(dd.duration, horizon, 1e-9);
  EXPECT_LT(bare.p_j0, clean.p_j0 - 0.05);
  EXPECT_GT(dd.p_j0, bare.p_j0 + 0.05);
  EXPECT_NEAR(dd.p_j0, clean.p_j0, 0.02);
}

TEST(Singlet, LeadingGeneratorTracksExactDynamics) {
  const SingletChannelSpec spec{4, 10.0, 1.0};
  const auto noise = InhomogeneousNoiseSpec::linear_profile(4, 30.0);
  const auto unit = udd_unit(3, 0.01);
  const auto sched = repeat(unit, 1000);
  const auto exact = run_protected_preparation(spec, noise, sched);
  const double leading = leading_magnus_population(spec, noise, unit, sched.duration);
  EXPECT_NEAR(exact.p_j0, leading, 2e-3);
  EXPECT_THROW(leading_magnus_population(spec, noise, free_unit(0.01), 1.0), InvalidArgument);
}

}  // namespace
}  // namespace ddprep
