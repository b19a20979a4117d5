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

// Spin wave -> cavity photon by a Raman (STIRAP-like) transition through the
// excited level |e>. Three-level ions, one cavity mode, cavity decay kappa
// and spontaneous decay of |e> into |0> and |1> at Gamma each:
//
//   H = sum_i [Omega1(t) (|e><1|_i + h.c.) + g_i (|e><0|_i a + h.c.)] + Delta sum_i |e><e|_i
//
// F2 = 1 - 2 Gamma int dt sum_i <e_i| rho |e_i>.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "iontrans/dynamics.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/sideband.hpp"
#include "iontrans/pulse.hpp"
#include "iontrans/statespace.hpp"

namespace iontrans::protocol {

struct Step1System {
  dyn::ParametricHamiltonian hamiltonian{0};
  std::vector<dyn::JumpOperator> jumps;
};

struct Step1Report {
  double fidelity = 0.0;  // F2
  double excited_integral = 0.0;
  /// kappa int <a^+ a> dt
  double eta_out = 0.0;
  /// Population left with an excitation in the sector at the end.
  double residual = 0.0;
  /// Excitations lost without a cavity photon, 1 - eta_out - residual.
  double eta_loss = 0.0;
  /// Probability that the photon left with no spontaneous emission at all.
  double eta_coherent = 0.0;
  int excitations = 1;
  double duration = 0.0;
  std::size_t dimension = 0;
  dyn::Diagnostics diagnostics;
  double hermiticity_defect = 0.0;
};

inline space::SectorConfig step1_sector(int n_ions, int excitations) {
  space::SectorConfig c;
  c.n_ions = n_ions;
  c.levels_per_ion = 3;
  c.max_ion_excitations = std::min(excitations, n_ions);
  c.photon_cutoff = excitations;
  c.total_cap = excitations;
  c.validate();
  return c;
}

inline dyn::PulseSchedule step1_schedule(const ProtocolParams& p, double duration) {
  dyn::PulseSchedule s;
  s.duration = duration;
  s.set("rabi1", dyn::SinSquaredRamp{p.rabi1, 0.0, p.step1_ramp}, true);
  s.set("detuning", dyn::Constant{p.delta_stirap}, false);
  s.validate();
  return s;
}

inline Step1System assemble_step1_system(const chain::CouplingProfile& coupling, const ProtocolParams& p,
                                         const SectorBasis& basis) {
  using namespace space;
  const auto& cfg = basis.config();
  if (cfg.levels_per_ion != 3) throw ValidationError("basis", "step 1 needs the excited level |e>");
  if (cfg.photon_cutoff < 1) throw ValidationError("basis", "step 1 needs the cavity mode");
  if (static_cast<int>(coupling.g.size()) != cfg.n_ions) throw ValidationError("coupling", "length != n_ions");

  const std::vector<double> ones(static_cast<std::size_t>(cfg.n_ions), 1.0);
  const SparseOperator pump = build_operator(IonTransition{kUpper, kExcited, ones}, basis);
  const SparseOperator cavity =
      build_operator(DressedTransition{IonTransition{kGround, kExcited, coupling.g}, {Mode::photon, false}}, basis);
  const SparseOperator excited = build_operator(LevelPopulation{kExcited}, basis);

  const auto sched = step1_schedule(p, p.step1_max_time);
  Step1System sys;
  sys.hamiltonian = dyn::ParametricHamiltonian(basis.dimension());
  sys.hamiltonian.add(cavity + cavity.adjoint());
  if (p.delta_stirap != 0.0) sys.hamiltonian.add(p.delta_stirap * excited);
  sys.hamiltonian.add(pump + pump.adjoint(), [sched](double t) { return sched.value("rabi1", t); });

  sys.jumps.push_back({build_operator(ModeLadder{Mode::photon, false}, basis), 1.0});
  for (int i = 0; i < cfg.n_ions; ++i) {
    const auto w = site_weights(cfg.n_ions, i);
    sys.jumps.push_back({build_operator(IonTransition{kExcited, kUpper, w}, basis), p.gamma});
    sys.jumps.push_back({build_operator(IonTransition{kExcited, kGround, w}, basis), p.gamma});
  }
  return sys;
}

struct Step1Options {
  int excitations = 1;
  /// Also run the evolution conditioned on no spontaneous emission.
  bool conditional = true;
};

namespace detail {

struct RetrievalRun {
  double excited_integral = 0.0;
  double photon_integral = 0.0;
  double ground = 0.0;
  double trace = 0.0;
  double duration = 0.0;
  dyn::Diagnostics diagnostics;
};

/// Evolves until the excitation left in the sector drops below the threshold.
inline RetrievalRun retrieve(const Step1System& sys, const SectorBasis& basis, const DensityMatrix& rho0,
                             const ProtocolParams& p, bool recycle_spontaneous) {
  std::vector<dyn::JumpOperator> jumps = sys.jumps;
  for (std::size_t j = 1; j < jumps.size(); ++j) jumps[j].recycle = recycle_spontaneous;
  dyn::EvolveOptions eo;
  eo.tol = p.lindblad_tol;
  eo.hermitian = recycle_spontaneous;
  eo.accumulate = {space::build_operator(space::LevelPopulation{space::kExcited}, basis),
                   space::build_operator(space::ModeNumber{space::Mode::photon}, basis)};
  dyn::DensityPropagator prop(sys.hamiltonian, jumps, rho0, 0.0, eo);
  const auto g = static_cast<Eigen::Index>(basis.index_of(basis.ground_label()));
  const double chunk = std::max(1.0, 0.25 * p.step1_ramp);

  RetrievalRun r;
  double t = 0.0;
  for (;;) {
    t = std::min(t + chunk, p.step1_max_time);
    prop.advance_to(t);
    const DensityMatrix rho = prop.density();
    r.ground = rho(g, g).real();
    r.trace = rho.trace().real();
    if (t >= p.step1_ramp && r.trace - r.ground < p.step1_residual) break;
    if (t >= p.step1_max_time)
      throw StiffnessError("step 1: excitation did not leave the cavity within step1_max_time", t);
  }
  const Eigen::VectorXd acc = prop.accumulators();
  r.excited_integral = acc[0];
  r.photon_integral = acc[1];
  r.duration = t;
  r.diagnostics = prop.diagnostics();
  return r;
}

}  // namespace detail

/// Initial spin wave |n; 0_ph> with |1> ~ sum_i g_i |1_i> and |2> ~ sum_{i<j} g_i g_j |1_i 1_j>.
inline StateVector step1_initial_state(const SectorBasis& basis, const chain::CouplingProfile& coupling, int n) {
  const SectorBasis ions = ion_only_basis(basis.config());
  const Eigen::VectorXd v = n == 1 ? single_excitation(ions, coupling.g) : double_excitation(ions, coupling.g);
  return product_state(basis, ions, v, 0, 0, 0);
}

inline Step1Report run_step1_retrieval(const ProtocolParams& p, const ChainSetup& setup, const Step1Options& opt = {}) {
  p.validate();
  if (opt.excitations < 1 || opt.excitations > 2) throw ValidationError("excitations", "must be 1 or 2");
  if (opt.excitations > setup.n_ions) throw BudgetError("step 1: more excitations than ions", 0);
  const SectorBasis basis(step1_sector(setup.n_ions, opt.excitations));
  const Step1System sys = assemble_step1_system(setup.coupling, p, basis);
  const DensityMatrix rho0 = space::pure_density(step1_initial_state(basis, setup.coupling, opt.excitations));

  Step1Report r;
  r.excitations = opt.excitations;
  r.dimension = basis.dimension();
  for (double t : {0.0, 0.5 * p.step1_ramp, p.step1_ramp})
    r.hermiticity_defect = std::max(r.hermiticity_defect, sys.hamiltonian.at(t).hermiticity_defect());

  const auto run = detail::retrieve(sys, basis, rho0, p, true);
  r.excited_integral = run.excited_integral;
  r.fidelity = 1.0 - 2.0 * p.gamma * run.excited_integral;
  r.eta_out = run.photon_integral / opt.excitations;
  r.residual = run.trace - run.ground;
  r.eta_loss = 1.0 - r.eta_out - r.residual / opt.excitations;
  r.duration = run.duration;
  r.diagnostics = run.diagnostics;

  if (opt.conditional) {
    const auto cond = detail::retrieve(sys, basis, rho0, p, false);
    r.eta_coherent = cond.ground;
    r.diagnostics.steps += cond.diagnostics.steps;
    r.diagnostics.rhs_evaluations += cond.diagnostics.rhs_evaluations;
  }
  return r;
}

/// Retrieval of the two-excitation spin wave; F2 bounds the probability of
/// no spontaneous emission from below.
inline Step1Report run_multi_excitation_retrieval(const ProtocolParams& p, const ChainSetup& setup, int n_exc = 2,
                                                  bool conditional = false) {
  return run_step1_retrieval(p, setup, {n_exc, conditional});
}

/// Doubles the Omega1 ramp from `start` until single-excitation F2 changes by
/// less than `delta`.
inline DurationScan scan_step1_ramp(const ProtocolParams& p, const ChainSetup& setup, double start = 10.0,
                                    double delta = 1e-3, int max_doublings = 5) {
  return doubling_scan(start, delta, max_doublings, [&](double t) {
    ProtocolParams q = p;
    q.step1_ramp = t;
    return run_step1_retrieval(q, setup, {1, false}).fidelity;
  });
}

}  // namespace iontrans::protocol
