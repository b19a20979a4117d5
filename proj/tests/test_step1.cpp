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

#include "iontrans/protocol/step1.hpp"
#include "iontrans/validation/oracle_suite.hpp"

namespace iontrans::protocol {
namespace {

using space::BasisLabel;
using space::kUpper;

TEST(Step1System, VacuumRabiSplitting) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto r = validation::vacuum_rabi_oracle(7, seed);
    EXPECT_LT(r.error, 1e-9) << "seed " << seed;
  }
}

TEST(Step1System, HamiltonianIsHermitianAndUnitaryWithoutLoss) {
  ProtocolParams p;
  p.gamma = 0.0;
  const auto setup = make_chain_setup(p, 5, 3);
  const SectorBasis basis(step1_sector(5, 1));
  const auto sys = assemble_step1_system(setup.coupling, p, basis);
  for (double t : {0.0, 3.0, p.step1_ramp, 500.0}) EXPECT_LT(sys.hamiltonian.at(t).hermiticity_defect(), 1e-15);
  dyn::EvolveOptions eo;
  eo.tol = 1e-12;
  const auto traj = dyn::evolve_state(sys.hamiltonian, step1_initial_state(basis, setup.coupling, 1),
                                      dyn::linspace(0.0, 40.0, 5), eo);
  EXPECT_LT(traj.diagnostics.max_norm_drift, 1e-8);
}

TEST(Step1System, DarkStateAtAntinode) {
  ProtocolParams p;
  const int n = 5;
  const auto setup = make_homogeneous_setup(p, n);
  const SectorBasis basis(step1_sector(n, 1));
  const auto sys = assemble_step1_system(setup.coupling, p, basis);
  const double t = 2.0 * p.step1_ramp;
  const double rabi = step1_schedule(p, p.step1_max_time).value("rabi1", t);
  ASSERT_DOUBLE_EQ(rabi, p.rabi1);

  const SectorBasis ions = ion_only_basis(basis.config());
  const std::vector<double> ones(n, 1.0);
  const StateVector spin_wave = product_state(basis, ions, single_excitation(ions, ones), 0, 0, 0);
  const StateVector photon = basis.basis_state(basis.ground_label(0, 0, 1));
  const double collective = p.g0 * std::sqrt(static_cast<double>(n));
  const auto h = sys.hamiltonian.at(t);

  StateVector dark = collective * spin_wave - rabi * photon;
  dark.normalize();
  EXPECT_LT(h.apply(dark).norm(), 1e-10);

  // The weights swapped between the two components do not give a dark state.
  StateVector swapped = collective * photon - rabi * spin_wave;
  swapped.normalize();
  EXPECT_GT(h.apply(swapped).norm(), 1.0);
}

TEST(Step1, LosslessRetrievalIsPerfect) {
  ProtocolParams p;
  p.gamma = 0.0;
  for (int n_exc : {1, 2}) {
    const auto r = run_step1_retrieval(p, make_chain_setup(p, 6, 5), {n_exc, false});
    EXPECT_NEAR(r.fidelity, 1.0, 1e-8) << n_exc;
    EXPECT_NEAR(r.eta_out, 1.0, 1e-3) << n_exc;
  }
  EXPECT_TRUE(validation::lossless_retrieval_oracle().pass);
}

TEST(Step1, Bookkeeping) {
  ProtocolParams p;
  for (int n_exc : {1, 2}) {
    const auto r = run_step1_retrieval(p, make_chain_setup(p, 6, 7), {n_exc, true});
    EXPECT_NEAR(r.fidelity + 2.0 * p.gamma * r.excited_integral, 1.0, 1e-8);
    EXPECT_GE(1.0 - r.fidelity, r.eta_loss - 1e-9);
    EXPECT_NEAR(r.eta_out + r.eta_loss + r.residual / n_exc, 1.0, 1e-12);
    EXPECT_LT(r.residual, p.step1_residual * 1.01);
    EXPECT_GT(r.eta_coherent, 0.0);
    EXPECT_LE(r.eta_coherent, r.eta_out + 1e-9);
    EXPECT_LT(r.diagnostics.max_trace_drift, 1e-8);
    EXPECT_GE(r.diagnostics.min_eigenvalue, -1e-8);
    EXPECT_LT(r.hermiticity_defect, 1e-15);
    EXPECT_EQ(r.excitations, n_exc);
  }
}

TEST(Step1, TwoExcitationSpinWaveNormalisation) {
  const std::vector<double> g{1.3, -0.4, 2.2, 0.9, -1.7};
  const SectorBasis ions = ion_only_basis(step1_sector(5, 2));
  const Eigen::VectorXd v = double_excitation(ions, g);
  // Brute force over ordered pairs i != j; each unordered pair appears twice.
  double ordered = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) ordered += g[i] * g[i] * g[j] * g[j];
  const double norm = std::sqrt(ordered / 2.0);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      BasisLabel l = ions.ground_label();
      l.ions[i] = kUpper;
      l.ions[j] = kUpper;
      EXPECT_NEAR(v[static_cast<Eigen::Index>(ions.index_of(l))], g[i] * g[j] / norm, 1e-15);
    }
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(Step1, CollectiveEnhancementImprovesRetrieval) {
  ProtocolParams p;
  p.phase_mode = PhaseMode::antinode;
  const double small = run_step1_retrieval(p, make_chain_setup(p, 4, 0), {1, false}).fidelity;
  const double large = run_step1_retrieval(p, make_chain_setup(p, 16, 0), {1, false}).fidelity;
  EXPECT_GT(large, small);
  // Error scales roughly as 1/C with C = N g0^2 / (kappa Gamma).
  EXPECT_NEAR((1.0 - small) / (1.0 - large), 4.0, 1.0);
}

TEST(Step1, RampScanConverges) {
  ProtocolParams p;
  const auto scan = scan_step1_ramp(p, make_chain_setup(p, 6, 2));
  EXPECT_TRUE(scan.converged);
  EXPECT_GE(scan.chosen, 10.0);
  EXPECT_LT(std::abs(scan.points.back().fidelity - scan.points[scan.points.size() - 2].fidelity), 1e-3);
}

TEST(Step1, RejectsBadExcitationCount) {
  ProtocolParams p;
  const auto setup = make_chain_setup(p, 3, 1);
  EXPECT_THROW(run_step1_retrieval(p, setup, {3, false}), ValidationError);
  const auto one = make_chain_setup(p, 1, 1);
  EXPECT_THROW(run_step1_retrieval(p, one, {2, false}), BudgetError);
}

}  // namespace
}  // namespace iontrans::protocol
