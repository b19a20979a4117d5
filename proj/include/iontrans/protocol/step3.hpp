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

// Single addressed ion -> COM phonon by a red-sideband pi pulse. The
// off-resonant carrier Stark-shifts the sideband; the laser detuning is
// offset by a calibrated amount to cancel it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "iontrans/channel.hpp"
#include "iontrans/dynamics.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/sideband.hpp"
#include "iontrans/protocol/step2.hpp"

namespace iontrans::protocol {

struct Step3Report {
  double fidelity = 0.0;  // F0
  double detuning_offset = 0.0;
  int addressed_ion = 0;
  double duration = 0.0;
  /// |s_j| below the weak-coupling threshold.
  bool weak_coupling_warning = false;
  dyn::ChannelEstimate channel;
  double channel_fidelity = 0.0;
  double correction_phase = 0.0;
  /// Amplitudes of |0;0> -> |0;0> and |1;0> -> |0;1>, spurious traced.
  double vacuum_amplitude = 0.0;
  double transfer_amplitude = 0.0;
  dyn::Diagnostics diagnostics;
  double hermiticity_defect = 0.0;
};

/// Ion with the largest |s_i|; ties resolve to the lower index.
inline int strongest_sideband_ion(const ChainSetup& setup) {
  const auto& s = setup.quad.sideband;
  int best = 0;
  for (int i = 1; i < static_cast<int>(s.size()); ++i)
    if (std::abs(s[i]) > std::abs(s[best])) best = i;
  return best;
}

/// Ion closest to the chain centre with |s_i| >= threshold, or -1.
inline int central_ion_above(const ChainSetup& setup, double threshold) {
  const int n = setup.n_ions;
  int best = -1;
  double dist = 1e300;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(i - 0.5 * (n - 1));
    if (std::abs(setup.quad.sideband[i]) >= threshold && d < dist) {
      best = i;
      dist = d;
    }
  }
  return best;
}

inline int resolve_addressed_ion(const ProtocolParams& p, const ChainSetup& setup, int ion) {
  if (ion < 0) ion = p.addressed_ion;
  if (ion < 0) ion = strongest_sideband_ion(setup);
  if (ion >= setup.n_ions) throw ValidationError("addressed_ion", "outside the chain");
  return ion;
}

/// Duration of a sideband pi pulse at constant Omega_max on ion j.
inline double step3_duration(const ProtocolParams& p, const ChainSetup& setup, int ion) {
  const double coupling = p.omega_max * setup.quad.com_factor() * std::abs(setup.quad.sideband[ion]);
  if (!(coupling > 0)) throw ValidationError("addressed_ion", "ion does not couple to the sideband");
  return 0.5 * kPi / coupling;
}

namespace detail {

/// The single-ion system; one instance per (params, ion) so calibration can
/// reuse the operators.
class Step3System {
 public:
  Step3System(const ProtocolParams& p, const ChainSetup& setup, int ion)
      : p_(p), basis_(sector(p)), ions_(ion_only_basis(basis_.sector())) {
    SidebandModel m;
    m.carrier = {setup.quad.carrier[ion]};
    m.sideband = {setup.quad.sideband[ion]};
    m.bus_factor = setup.quad.com_factor();
    m.spurious_factor = setup.quad.spurious_factor();
    m.spurious_frequency = p.spurious_frequency;
    m.rwa = p.rwa;
    ops_ = assemble_sideband(m, basis_);
    duration_ = step3_duration(p, setup, ion);
    ground_ = ion_ground_vector(ions_);
    excited_ = single_excitation(ions_, {1.0});
  }

  double duration() const { return duration_; }
  const SectorBasis& basis() const { return basis_; }

  dyn::ParametricHamiltonian hamiltonian(double offset) const {
    const double rabi = p_.omega_max;
    const double detuning = 1.0 + offset;
    return sideband_hamiltonian(ops_, [rabi](double) { return rabi; }, [detuning](double) { return detuning; });
  }

  /// Final state for the ion in |x>, bus and spurious mode in |0> and |k>.
  StateVector evolve(double offset, int x, int k, dyn::Diagnostics* diag = nullptr) const {
    const auto h = hamiltonian(offset);
    dyn::EvolveOptions eo;
    eo.tol = p_.tol;
    eo.frame = ops_.frame;
    dyn::StatePropagator prop(h, product_state(basis_, ions_, x == 0 ? ground_ : excited_, 0, k, 0), 0.0, eo);
    prop.advance_to(duration_);
    if (diag) merge(*diag, prop.diagnostics());
    return prop.state();
  }

  /// |<0; 1, 0|psi>|^2 for the |1; 0, 0> input.
  double transfer_fidelity(double offset, dyn::Diagnostics* diag = nullptr) const {
    const StateVector psi = evolve(offset, 1, 0, diag);
    return std::norm(product_state(basis_, ions_, ground_, 1, 0, 0).dot(psi));
  }

  Eigen::MatrixXcd amplitudes(const StateVector& psi) const {
    const int cut = basis_.sector().spurious_cutoff;
    Eigen::MatrixXcd a(2, cut + 1);
    for (int m = 0; m <= cut; ++m) {
      a(0, m) = product_state(basis_, ions_, ground_, 0, m, 0).dot(psi);
      a(1, m) = product_state(basis_, ions_, ground_, 1, m, 0).dot(psi);
    }
    return a;
  }

  double hermiticity_defect(double offset) const { return hamiltonian(offset).at(0.0).hermiticity_defect(); }

 private:
  static space::SectorConfig sector(const ProtocolParams& p) {
    ProtocolParams q = p;
    q.max_ion_excitations = 1;
    const int extra = static_cast<int>(thermal_weights(p.nbar_spurious).size()) - 1;
    return step2_sector(q, 1, extra);
  }

  ProtocolParams p_;
  SectorBasis basis_;
  SectorBasis ions_;
  SidebandOperators ops_;
  double duration_ = 0.0;
  Eigen::VectorXd ground_;
  Eigen::VectorXd excited_;
};

inline double calibrate(const Step3System& sys, const ProtocolParams& p, dyn::Diagnostics* diag) {
  const double half = p.stark_bracket * p.omega_max * p.omega_max;
  if (half == 0.0) return 0.0;
  const int n = p.stark_grid;
  std::vector<double> xs(static_cast<std::size_t>(n));
  std::vector<double> fs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[i] = -half + 2.0 * half * i / (n - 1);
    fs[i] = sys.transfer_fidelity(xs[i], diag);
  }
  const auto best = static_cast<int>(std::max_element(fs.begin(), fs.end()) - fs.begin());
  if (best == 0 || best == n - 1) throw SolverError("calibrate_stark_shift: maximum at the bracket edge", fs[best]);
  auto neg = [&](double x) { return -sys.transfer_fidelity(x, diag); };
  const auto r = boost::math::tools::brent_find_minima(neg, xs[best - 1], xs[best + 1], 40);
  return -r.second >= fs[best] ? r.first : xs[best];
}

}  // namespace detail

/// Detuning offset (units of omega) that maximises the single-pulse transfer.
inline double calibrate_stark_shift(const ProtocolParams& p, const ChainSetup& setup, int ion = -1) {
  p.validate();
  ion = resolve_addressed_ion(p, setup, ion);
  const detail::Step3System sys(p, setup, ion);
  return detail::calibrate(sys, p, nullptr);
}

struct Step3Options {
  /// Skip the calibration and use `offset` as the detuning offset.
  bool calibrate = true;
  double offset = 0.0;
};

inline Step3Report run_step3(const ProtocolParams& p, const ChainSetup& setup, int ion = -1,
                             const Step3Options& opt = {}) {
  p.validate();
  ion = resolve_addressed_ion(p, setup, ion);
  const detail::Step3System sys(p, setup, ion);

  Step3Report r;
  r.addressed_ion = ion;
  r.duration = sys.duration();
  r.weak_coupling_warning = std::abs(setup.quad.sideband[ion]) < p.weak_coupling_threshold;
  r.diagnostics.min_eigenvalue = 0.0;
  r.detuning_offset = opt.calibrate ? detail::calibrate(sys, p, &r.diagnostics) : opt.offset;
  r.hermiticity_defect = sys.hermiticity_defect(r.detuning_offset);
  r.fidelity = sys.transfer_fidelity(r.detuning_offset, &r.diagnostics);

  const auto weights = thermal_weights(p.nbar_spurious);
  std::vector<std::vector<Eigen::MatrixXcd>> amp;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    std::vector<Eigen::MatrixXcd> per_input;
    for (int x = 0; x < 2; ++x)
      per_input.push_back(sys.amplitudes(sys.evolve(r.detuning_offset, x, static_cast<int>(k), &r.diagnostics)));
    amp.push_back(std::move(per_input));
  }
  r.channel = channel_from_amplitudes(weights, amp);
  const auto pc = dyn::phase_corrected_fidelity(r.channel);
  r.channel_fidelity = pc.fidelity;
  r.correction_phase = pc.phase;
  r.vacuum_amplitude = std::sqrt(std::max(0.0, r.channel.block(0, 0)(0, 0).real()));
  r.transfer_amplitude = std::sqrt(std::max(0.0, r.channel.block(1, 1)(1, 1).real()));
  return r;
}

}  // namespace iontrans::protocol
