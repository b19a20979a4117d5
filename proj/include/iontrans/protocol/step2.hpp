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

// Phonon -> collective spin wave: a chirped red-sideband sweep with a
// Gaussian drive envelope maps |0...0; n=1> onto the cavity-matched spin
// wave |1> ~ sum_i g_i |1_i> with the bus left in vacuum.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "iontrans/channel.hpp"
#include "iontrans/collective.hpp"
#include "iontrans/dynamics.hpp"
#include "iontrans/ionchain.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/sideband.hpp"
#include "iontrans/pulse.hpp"

namespace iontrans::protocol {

struct Step2Report {
  /// Average fidelity after correcting the known relative output phase.
  double fidelity = 0.0;
  double fidelity_uncorrected = 0.0;
  double correction_phase = 0.0;
  double leakage = 0.0;
  /// Final leakage above 0.2 signals a non-adiabatic sweep.
  bool adiabaticity_flag = false;
  /// State fidelities for the |0>, |1>, |+>, |+i> logical inputs.
  std::array<double, 4> input_overlaps{};
  /// |F1(caps + 1) - F1| when requested.
  std::optional<double> cutoff_delta;
  /// Amplitudes of |0;0> -> |0;0> and |0;n> -> target, spurious traced.
  double vacuum_amplitude = 0.0;
  double transfer_amplitude = 0.0;
  double duration = 0.0;
  std::size_t dimension = 0;
  std::vector<double> phases;
  std::uint64_t seed = 0;
  dyn::ChannelEstimate channel;
  dyn::Diagnostics diagnostics;
  double hermiticity_defect = 0.0;
};

struct Step2Options {
  /// Phonons in the logical |1> input; 2 maps onto the two-excitation spin wave.
  int phonons = 1;
  bool cutoff_check = false;
};

inline dyn::PulseSchedule step2_schedule(const ProtocolParams& p) {
  dyn::PulseSchedule s;
  const double stretch = 1.0 + 2.0 * p.window_extension;
  s.duration = stretch * p.chirp_duration;
  s.set("rabi", dyn::Gaussian{p.omega_max, 0.5 * s.duration, p.gaussian_width_fraction * p.chirp_duration}, true);
  s.set("detuning", dyn::LinearChirp{1.0 - stretch * p.chirp_half_width, 1.0 + stretch * p.chirp_half_width}, false);
  s.validate();
  return s;
}

inline SidebandModel step2_model(const ProtocolParams& p, const ChainSetup& setup) {
  SidebandModel m;
  m.carrier = setup.quad.carrier;
  m.sideband = setup.quad.sideband;
  m.bus_factor = setup.quad.com_factor();
  m.spurious_factor = setup.quad.spurious_factor();
  m.spurious_frequency = p.spurious_frequency;
  m.rwa = p.rwa;
  return m;
}

inline space::SectorConfig step2_sector(const ProtocolParams& p, int n_ions, int extra = 0) {
  space::SectorConfig c;
  c.n_ions = n_ions;
  c.levels_per_ion = 2;
  c.max_ion_excitations = std::min(p.max_ion_excitations, n_ions);
  c.bus_cutoff = p.bus_cutoff;
  c.spurious_cutoff = p.spurious_cutoff + extra;
  c.photon_cutoff = 0;
  c.total_cap = p.total_cap + extra;
  c.max_dimension = p.max_dimension;
  c.validate();
  return c;
}

/// H(t) of the sweep on a full sector basis.
inline SparseOperator assemble_step2_hamiltonian(const chain::QuadrupoleProfile& quad, const chain::ModeTable& modes,
                                                 const ProtocolParams& p, const SectorBasis& basis, double t) {
  SidebandModel m;
  m.carrier = quad.carrier;
  m.sideband = quad.sideband;
  m.bus_factor = quad.com_factor();
  m.spurious_factor = quad.spurious_factor();
  if (!modes.frequencies.empty()) m.bus_frequency = modes.frequencies[0];
  m.spurious_frequency = modes.frequencies.size() > 1 ? modes.frequencies[1] : p.spurious_frequency;
  m.rwa = p.rwa;
  const auto sched = step2_schedule(p);
  const auto ops = assemble_sideband(m, basis);
  const auto values = dyn::pulse_value(sched, t);
  return ops.modes + values.at("detuning") * ops.upper + values.at("rabi") * ops.drive;
}

namespace detail {

inline void merge(dyn::Diagnostics& into, const dyn::Diagnostics& d) {
  into.steps += d.steps;
  into.rejected += d.rejected;
  into.rhs_evaluations += d.rhs_evaluations;
  into.max_norm_drift = std::max(into.max_norm_drift, d.max_norm_drift);
  into.max_trace_drift = std::max(into.max_trace_drift, d.max_trace_drift);
  into.min_eigenvalue = std::min(into.min_eigenvalue, d.min_eigenvalue);
  into.max_hermiticity_defect = std::max(into.max_hermiticity_defect, d.max_hermiticity_defect);
}

template <class Basis>
Step2Report run_step2_on(const ProtocolParams& p, const ChainSetup& setup, const Basis& basis,
                         const SectorBasis& ion_basis, const Step2Options& opt) {
  const auto sched = step2_schedule(p);
  const SidebandOperators ops = assemble_sideband(step2_model(p, setup), basis);
  auto rabi = [sched](double t) { return sched.value("rabi", t); };
  auto detuning = [sched](double t) { return sched.value("detuning", t); };
  const dyn::ParametricHamiltonian h = sideband_hamiltonian(ops, rabi, detuning);

  Step2Report r;
  r.duration = sched.duration;
  r.dimension = ops.modes.dimension();
  r.phases = setup.phases.phases;
  r.seed = setup.seed;
  for (double t : {0.0, 0.5 * sched.duration, sched.duration})
    r.hermiticity_defect = std::max(r.hermiticity_defect, h.at(t).hermiticity_defect());

  const Eigen::VectorXd ground = ion_ground_vector(ion_basis);
  const Eigen::VectorXd target1 = opt.phonons == 1 ? single_excitation(ion_basis, setup.coupling.g)
                                                   : double_excitation(ion_basis, setup.coupling.g);
  const auto weights = thermal_weights(p.nbar_spurious);
  const int sp_cut = basis.sector().spurious_cutoff;

  dyn::EvolveOptions eo;
  eo.tol = p.tol;
  eo.frame = ops.frame;
  r.diagnostics.min_eigenvalue = 0.0;

  std::vector<std::vector<Eigen::MatrixXcd>> amp;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    std::vector<Eigen::MatrixXcd> per_input;
    for (int x = 0; x < 2; ++x) {
      const StateVector psi0 = product_state(basis, ion_basis, ground, x == 0 ? 0 : opt.phonons, static_cast<int>(k), 0);
      if (std::abs(psi0.norm() - 1.0) > 1e-12) throw BudgetError("step2: input state outside the sector", r.dimension);
      dyn::StatePropagator prop(h, psi0, 0.0, eo);
      prop.advance_to(sched.duration);
      merge(r.diagnostics, prop.diagnostics());
      const StateVector psi = prop.state();
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, sp_cut + 1);
      for (int m = 0; m <= sp_cut; ++m) {
        a(0, m) = product_state(basis, ion_basis, ground, 0, m, 0).dot(psi);
        a(1, m) = product_state(basis, ion_basis, target1, 0, m, 0).dot(psi);
      }
      per_input.push_back(std::move(a));
    }
    amp.push_back(std::move(per_input));
  }

  r.channel = channel_from_amplitudes(weights, amp);
  r.leakage = r.channel.leakage;
  r.adiabaticity_flag = r.leakage > 0.2;
  r.fidelity_uncorrected = dyn::average_channel_fidelity(r.channel);
  const auto pc = dyn::phase_corrected_fidelity(r.channel);
  r.fidelity = pc.fidelity;
  r.correction_phase = pc.phase;
  r.vacuum_amplitude = std::sqrt(std::max(0.0, r.channel.block(0, 0)(0, 0).real()));
  r.transfer_amplitude = std::sqrt(std::max(0.0, r.channel.block(1, 1)(1, 1).real()));

  const auto corrected = dyn::apply_phase_correction(r.channel, pc.phase);
  const double s = 1.0 / std::sqrt(2.0);
  const std::array<Eigen::Vector2cd, 4> inputs{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1), Eigen::Vector2cd(s, s),
                                               Eigen::Vector2cd(s, Complex(0, s))};
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& v = inputs[i];
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) out += v[x] * std::conj(v[y]) * corrected.block(x, y);
    r.input_overlaps[i] = (v.adjoint() * out * v)(0, 0).real();
  }
  return r;
}

}  // namespace detail

inline Step2Report run_step2(const ProtocolParams& p, const ChainSetup& setup, const Step2Options& opt = {}) {
  p.validate();
  if (opt.phonons != 1 && opt.phonons != 2) throw ValidationError("phonons", "must be 1 or 2");
  const int extra = static_cast<int>(thermal_weights(p.nbar_spurious).size()) - 1;
  ProtocolParams q = p;
  if (opt.phonons == 2) {
    q.max_ion_excitations = std::max(q.max_ion_excitations, 2);
    q.total_cap = std::max(q.total_cap, 3);
    q.bus_cutoff = std::max(q.bus_cutoff, 2);
  }
  const space::SectorConfig sector = step2_sector(q, setup.n_ions, extra);

  Step2Report r;
  if (p.basis == BasisKind::full) {
    const SectorBasis basis(sector);
    const SectorBasis ions = ion_only_basis(sector);
    r = detail::run_step2_on(q, setup, basis, ions, opt);
  } else {
    space::CollectiveConfig cc;
    cc.sector = sector;
    cc.generators = space::ladder_generators({setup.quad.carrier, setup.quad.sideband});
    cc.depth = p.collective_depth;
    const space::CollectiveBasis basis(cc);
    r = detail::run_step2_on(q, setup, basis, basis.ion_basis(), opt);
  }

  if (opt.cutoff_check) {
    ProtocolParams raised = q;
    raised.total_cap += 1;
    raised.bus_cutoff += 1;
    raised.spurious_cutoff += 1;
    Step2Options o = opt;
    o.cutoff_check = false;
    r.cutoff_delta = std::abs(run_step2(raised, setup, o).fidelity - r.fidelity);
  }
  return r;
}

/// Doubles the chirp duration from `start` until F1 changes by less than `delta`.
inline DurationScan scan_chirp_duration(const ProtocolParams& p, const ChainSetup& setup, double start = 2e4,
                                        double delta = 1e-3, int max_doublings = 4) {
  return doubling_scan(start, delta, max_doublings, [&](double t) {
    ProtocolParams q = p;
    q.chirp_duration = t;
    return run_step2(q, setup).fidelity;
  });
}

}  // namespace iontrans::protocol
