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

#include "iontrans/channel.hpp"
#include "iontrans/protocol/step2.hpp"

namespace iontrans::protocol {
namespace {

using space::BasisLabel;
using space::kUpper;

ChainSetup setup_for(const ProtocolParams& p, int n, int realization = 0) {
  return make_chain_setup(p, n, derive_seed(1, n, realization));
}

TEST(Step2Hamiltonian, NoDriveIsDiagonal) {
  ProtocolParams p;
  const auto setup = setup_for(p, 3);
  const SectorBasis basis(step2_sector(p, 3));
  const auto ops = assemble_sideband(step2_model(p, setup), basis);
  const double delta = 0.993;
  const auto h = sideband_hamiltonian(
      ops, [](double) { return 0.0; }, [delta](double) { return delta; });
  const Eigen::MatrixXcd m = h.at(0.0).dense();
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto& l = basis.label(i);
    const double want = l.bus + std::sqrt(3.0) * l.spurious + delta * l.ion_excitations();
    for (std::size_t j = 0; j < basis.dimension(); ++j)
      EXPECT_NEAR(std::abs(m(i, j) - Complex(i == j ? want : 0.0)), 0.0, 1e-9);
  }
}

TEST(Step2Hamiltonian, RedSidebandMatrixElement) {
  ProtocolParams p;
  const int n = 4;
  const auto setup = setup_for(p, n);
  const SectorBasis basis(step2_sector(p, n));
  const auto modes = chain::axial_mode_spectrum(setup.geometry);
  const double t = 0.5 * p.chirp_duration;
  const auto sched = step2_schedule(p);
  const double omega = sched.value("rabi", t);
  EXPECT_NEAR(omega, p.omega_max, 1e-15);
  const Eigen::MatrixXcd h = assemble_step2_hamiltonian(setup.quad, modes, p, basis, t).dense();
  const auto col = static_cast<Eigen::Index>(basis.index_of(basis.ground_label(1)));
  for (int i = 0; i < n; ++i) {
    BasisLabel l = basis.ground_label();
    l.ions[i] = kUpper;
    const double want = -omega * std::sin(setup.phases.phases[i]) * p.eta / std::sqrt(n);
    EXPECT_NEAR(h(static_cast<Eigen::Index>(basis.index_of(l)), col).real(), want, 1e-15);
  }
}

TEST(Step2Hamiltonian, RotatingWaveConservesExcitations) {
  ProtocolParams p;
  p.rwa = true;
  const int n = 4;
  const auto setup = setup_for(p, n);
  const SectorBasis basis(step2_sector(p, n));
  const auto modes = chain::axial_mode_spectrum(setup.geometry);
  const auto total = space::build_operator(space::TotalExcitation{}, basis);
  for (double t : {0.0, 0.3 * p.chirp_duration, 0.5 * p.chirp_duration}) {
    const auto h = assemble_step2_hamiltonian(setup.quad, modes, p, basis, t);
    EXPECT_LT(space::commutator(h, total).max_abs(), 1e-12);
    EXPECT_LT(h.hermiticity_defect(), 1e-15);
  }
  p.rwa = false;
  const auto full = assemble_step2_hamiltonian(setup.quad, modes, p, basis, 0.5 * p.chirp_duration);
  EXPECT_GT(space::commutator(full, total).max_abs(), 1e-4);
  EXPECT_LT(full.hermiticity_defect(), 1e-15);
}

TEST(Step2, AdiabaticLimit) {
  ProtocolParams p;
  p.rwa = true;
  p.eta_spurious = 0.0;
  p.chirp_duration = 1e5;
  const auto r = run_step2(p, setup_for(p, 2));
  EXPECT_GT(r.fidelity, 0.999);
  EXPECT_LT(r.diagnostics.max_norm_drift, 1e-8);
}

TEST(Step2, ReportIsConsistent) {
  ProtocolParams p;
  const auto setup = setup_for(p, 4);
  const auto r = run_step2(p, setup);
  EXPECT_GT(r.fidelity, 0.95);
  EXPECT_LE(r.fidelity, 1.0);
  EXPECT_GE(r.fidelity + 1e-14, r.fidelity_uncorrected);
  EXPECT_GE(r.leakage, 0.0);
  EXPECT_FALSE(r.adiabaticity_flag);
  EXPECT_GT(dyn::choi_min_eigenvalue(r.channel), -1e-8);
  EXPECT_LT(r.diagnostics.max_norm_drift, 1e-8);
  EXPECT_LT(r.hermiticity_defect, 1e-15);
  EXPECT_DOUBLE_EQ(r.duration, p.chirp_duration);
  EXPECT_EQ(r.seed, setup.seed);
  for (double o : r.input_overlaps) {
    EXPECT_GT(o, 0.9);
    EXPECT_LE(o, 1.0 + 1e-12);
  }
}

TEST(Step2, SeededRunsAreBitIdentical) {
  ProtocolParams p;
  const auto a = run_step2(p, setup_for(p, 3, 2));
  const auto b = run_step2(p, setup_for(p, 3, 2));
  EXPECT_EQ(a.fidelity, b.fidelity);
  EXPECT_EQ(a.phases, b.phases);
  const auto c = run_step2(p, setup_for(p, 3, 3));
  EXPECT_NE(a.fidelity, c.fidelity);
}

TEST(Step2, ThermalSpuriousModeIsNegligible) {
  ProtocolParams p;
  const auto setup = setup_for(p, 2);
  const double cold = run_step2(p, setup).fidelity;
  p.nbar_spurious = 0.2;
  const double warm = run_step2(p, setup).fidelity;
  EXPECT_LT(std::abs(warm - cold), 0.01);
}

TEST(Step2, PatternLockDegradesMonotonically) {
  auto mean_f1 = [](double mismatch) {
    ProtocolParams p;
    p.pattern_phase = mismatch;
    double sum = 0.0;
    for (int r = 0; r < 2; ++r) sum += run_step2(p, setup_for(p, 4, r)).fidelity;
    return sum / 2.0;
  };
  const double locked = mean_f1(0.0);
  const double quarter = mean_f1(0.25 * kPi);
  const double half = mean_f1(0.5 * kPi);
  EXPECT_GE(locked, quarter);
  EXPECT_GE(quarter, half);
}

TEST(Step2, CompressedBasisMatchesFull) {
  ProtocolParams p;
  const auto setup = setup_for(p, 5);
  const auto compressed = run_step2(p, setup);
  p.basis = BasisKind::full;
  const auto full = run_step2(p, setup);
  EXPECT_LT(compressed.dimension, full.dimension);
  EXPECT_NEAR(compressed.fidelity, full.fidelity, 1e-6);
}

TEST(Step2, CutoffIncrementIsConverged) {
  ProtocolParams p;
  const auto r = run_step2(p, setup_for(p, 4), {1, true});
  ASSERT_TRUE(r.cutoff_delta.has_value());
  EXPECT_LT(*r.cutoff_delta, 1e-3);
}

TEST(Step2, TwoPhononInput) {
  ProtocolParams p;
  const auto r = run_step2(p, setup_for(p, 3), {2, false});
  EXPECT_GT(r.transfer_amplitude, 0.5);
  EXPECT_LE(r.transfer_amplitude, 1.0 + 1e-12);
  EXPECT_LT(r.diagnostics.max_norm_drift, 1e-8);
  EXPECT_THROW(run_step2(p, setup_for(p, 3), {3, false}), ValidationError);
}

TEST(Step2, ChirpScanConverges) {
  ProtocolParams p;
  const auto scan = scan_chirp_duration(p, setup_for(p, 2), 1e4, 1e-3, 4);
  EXPECT_TRUE(scan.converged);
  ASSERT_GE(scan.points.size(), 2u);
  EXPECT_DOUBLE_EQ(scan.points[1].duration, 2.0 * scan.points[0].duration);
}

TEST(Step2, ScheduleWindowExtension) {
  ProtocolParams p;
  p.window_extension = 0.05;
  const auto s = step2_schedule(p);
  EXPECT_NEAR(s.duration, 1.1 * p.chirp_duration, 1e-9);
  EXPECT_NEAR(s.value("rabi", 0.5 * s.duration), p.omega_max, 1e-15);
  // The chirp keeps its slope and passes the original endpoints inside the window.
  const double t0 = 0.05 * p.chirp_duration;
  EXPECT_NEAR(s.value("detuning", t0), 1.0 - p.chirp_half_width, 1e-12);
  EXPECT_NEAR(s.value("detuning", t0 + p.chirp_duration), 1.0 + p.chirp_half_width, 1e-12);
}

}  // namespace
}  // namespace iontrans::protocol
