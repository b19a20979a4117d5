// Copyright 2026 The iontrans Authors
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

#include <cmath>

#include <gtest/gtest.h>

#include "iontrans/protocol/step3.hpp"

namespace iontrans::protocol {
namespace {

// Two-ion chain whose ions both see carrier weight c and sideband weight -sqrt(1 - c^2).
ChainSetup uniform_setup(const ProtocolParams& p, double carrier) {
  ChainSetup s = make_homogeneous_setup(p, 2);
  s.phases.phases.assign(2, std::acos(carrier));
  s.coupling = chain::cavity_coupling_profile(s.phases, p.g0);
  s.quad = chain::quadrupole_weight_profile(s.phases, {}, p.eta, p.eta_spurious, p.nbar_spurious);
  return s;
}

TEST(Step3, ResonantPiPulseInRotatingWaveLimit) {
  ProtocolParams p;
  p.rwa = true;
  p.eta_spurious = 0.0;
  const auto setup = make_chain_setup(p, 3, 4);
  const auto r = run_step3(p, setup, -1, {false, 0.0});
  EXPECT_GT(r.fidelity, 1.0 - 1e-8);
  EXPECT_EQ(r.addressed_ion, strongest_sideband_ion(setup));
  EXPECT_NEAR(r.duration, step3_duration(p, setup, r.addressed_ion), 0.0);
  EXPECT_NEAR(r.channel_fidelity, 1.0, 1e-8);
}

TEST(Step3, CalibrationNeverHurts) {
  ProtocolParams p;
  const auto setup = make_chain_setup(p, 10, derive_seed(1, 10, 0));
  const int ion = central_ion_above(setup, 0.5);
  ASSERT_GE(ion, 0);
  const auto calibrated = run_step3(p, setup, ion);
  const auto bare = run_step3(p, setup, ion, {false, 0.0});
  EXPECT_GE(calibrated.fidelity, bare.fidelity);
  EXPECT_GT(calibrated.fidelity, 0.99);
  EXPECT_FALSE(calibrated.weak_coupling_warning);
  EXPECT_LT(calibrated.diagnostics.max_norm_drift, 1e-8);
  EXPECT_LT(calibrated.hermiticity_defect, 1e-15);
}

TEST(Step3, OffsetIsALocalMaximum) {
  ProtocolParams p;
  const auto setup = uniform_setup(p, std::sqrt(0.5));
  const auto best = run_step3(p, setup, 0);
  for (double d : {-1e-5, 1e-5}) {
    const auto shifted = run_step3(p, setup, 0, {false, best.detuning_offset + d});
    EXPECT_LE(shifted.fidelity, best.fidelity) << d;
  }
}

TEST(Step3, OffsetMatchesPerturbativeStarkShift) {
  // Carrier coupling Omega c to |0> and |1> at distance ~omega pushes the
  // |1;0> - |0;1> splitting up by 2 Omega^2 c^2 / omega.
  ProtocolParams p;
  const double c2 = 0.9;
  const auto setup = uniform_setup(p, std::sqrt(c2));
  const double offset = calibrate_stark_shift(p, setup, 0);
  const double estimate = -2.0 * p.omega_max * p.omega_max * c2;
  EXPECT_NEAR(offset / estimate, 1.0, 0.2);
}

TEST(Step3, OffsetVanishesWithDrive) {
  ProtocolParams p;
  p.stark_grid = 11;
  const auto setup = uniform_setup(p, std::sqrt(0.5));
  const double strong = calibrate_stark_shift(p, setup, 0);
  p.omega_max = 0.005;
  const double weak = calibrate_stark_shift(p, setup, 0);
  EXPECT_LT(std::abs(weak), 0.35 * std::abs(strong));
  EXPECT_LT(std::abs(weak), 2.0 * 0.005 * 0.005);
}

TEST(Step3, ChannelAmplitudes) {
  ProtocolParams p;
  const auto setup = make_chain_setup(p, 6, derive_seed(1, 6, 0));
  const auto r = run_step3(p, setup);
  EXPECT_GT(r.transfer_amplitude, 0.99);
  EXPECT_GT(r.vacuum_amplitude, 0.99);
  EXPECT_GE(r.channel_fidelity, 0.99);
  EXPECT_LE(r.channel_fidelity, 1.0);
}

TEST(Step3, AddressingRules) {
  ProtocolParams p;
  const auto setup = make_chain_setup(p, 8, 3);
  const int best = strongest_sideband_ion(setup);
  for (double s : setup.quad.sideband) EXPECT_LE(std::abs(s), std::abs(setup.quad.sideband[best]));
  const int central = central_ion_above(setup, 0.5);
  ASSERT_GE(central, 0);
  EXPECT_GE(std::abs(setup.quad.sideband[central]), 0.5);
  EXPECT_EQ(central_ion_above(setup, 1.1), -1);
  EXPECT_THROW(resolve_addressed_ion(p, setup, 8), ValidationError);
  p.addressed_ion = 2;
  EXPECT_EQ(resolve_addressed_ion(p, setup, -1), 2);
}

}  // namespace
}  // namespace iontrans::protocol
