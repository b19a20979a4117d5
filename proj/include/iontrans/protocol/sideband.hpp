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

// Quadrupole-driven ions coupled to the COM bus mode and one spurious mode:
//
//   H = w n_b + w_s n_s + Delta(t) N_1
//     + Omega(t) sum_i sx_i [c_i + s_i (eta/sqrt(N) (b + b^+) + eta_s/sqrt(N) (bs + bs^+))]
//
// used for the phonon -> spin-wave sweep (all ions) and for the
// single-ion sideband pulse (one addressed ion).

#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "iontrans/channel.hpp"
#include "iontrans/collective.hpp"
#include "iontrans/dynamics.hpp"
#include "iontrans/statespace.hpp"

namespace iontrans::protocol {

using space::SectorBasis;
using space::SparseOperator;

struct SidebandModel {
  std::vector<double> carrier;
  std::vector<double> sideband;
  /// eta / sqrt(N) and eta_s / sqrt(N), with N the chain size.
  double bus_factor = 0.0;
  double spurious_factor = 0.0;
  double bus_frequency = 1.0;
  double spurious_frequency = std::sqrt(3.0);
  /// Keep only excitation-conserving sideband terms and drop the carrier.
  bool rwa = false;
};

struct SidebandOperators {
  SparseOperator modes;  // w n_b + w_s n_s
  SparseOperator upper;  // N_1
  SparseOperator drive;  // coefficient of Omega(t)
  /// Diagonal reference energies w (n_b + N_1) + w_s n_s for the interaction picture.
  Eigen::VectorXd frame;
};

inline SparseOperator build_on(const SectorBasis& b, const space::OperatorSpec& s) { return space::build_operator(s, b); }
inline SparseOperator build_on(const space::CollectiveBasis& b, const space::OperatorSpec& s) { return b.build(s); }

template <class Basis>
SidebandOperators assemble_sideband(const SidebandModel& m, const Basis& basis) {
  using space::DressedTransition;
  using space::IonTransition;
  using space::Mode;
  using space::ModeLadder;
  const auto& cfg = basis.sector();
  if (cfg.bus_cutoff < 1 || cfg.spurious_cutoff < 1)
    throw ValidationError("basis", "sideband model needs the bus and spurious modes");
  if (cfg.levels_per_ion != 2) throw ValidationError("basis", "sideband model uses two-level ions");

  SidebandOperators ops;
  ops.modes = m.bus_frequency * build_on(basis, space::ModeNumber{Mode::bus}) +
              m.spurious_frequency * build_on(basis, space::ModeNumber{Mode::spurious});
  ops.upper = build_on(basis, space::LevelPopulation{space::kUpper});

  const IonTransition up_s{space::kGround, space::kUpper, m.sideband};
  const IonTransition down_s{space::kUpper, space::kGround, m.sideband};
  auto quadrature = [&](Mode mode) {
    SparseOperator q = build_on(basis, DressedTransition{up_s, {mode, false}}) +
                       build_on(basis, DressedTransition{down_s, {mode, true}});
    if (!m.rwa)
      q = q + build_on(basis, DressedTransition{up_s, {mode, true}}) +
          build_on(basis, DressedTransition{down_s, {mode, false}});
    return q;
  };
  ops.drive = m.bus_factor * quadrature(Mode::bus) + m.spurious_factor * quadrature(Mode::spurious);
  if (!m.rwa) {
    const SparseOperator up_c = build_on(basis, IonTransition{space::kGround, space::kUpper, m.carrier});
    ops.drive = ops.drive + up_c + up_c.adjoint();
  }

  const auto d = static_cast<Eigen::Index>(ops.modes.dimension());
  ops.frame.resize(d);
  const SparseOperator ref = ops.modes + m.bus_frequency * ops.upper;
  for (Eigen::Index i = 0; i < d; ++i) ops.frame[i] = ref.matrix().coeff(i, i).real();
  return ops;
}

/// H(t) = modes + Delta(t) N_1 + Omega(t) drive.
inline dyn::ParametricHamiltonian sideband_hamiltonian(const SidebandOperators& ops, std::function<double(double)> rabi,
                                                       std::function<double(double)> detuning) {
  dyn::ParametricHamiltonian h(ops.modes.dimension());
  h.add(ops.modes);
  h.add(ops.upper, std::move(detuning));
  h.add(ops.drive, std::move(rabi));
  return h;
}

/// Ion-only sector (modes removed) matching a full or compressed basis.
inline SectorBasis ion_only_basis(space::SectorConfig s) {
  s.bus_cutoff = 0;
  s.spurious_cutoff = 0;
  s.photon_cutoff = 0;
  s.total_cap = s.max_ion_excitations;
  return SectorBasis(s);
}

/// Ion-only vector sum_i w_i |1_i>, normalised.
inline Eigen::VectorXd single_excitation(const SectorBasis& ion_basis, const std::vector<double>& w) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ion_basis.dimension()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    space::BasisLabel l = ion_basis.ground_label();
    l.ions[i] = space::kUpper;
    v[static_cast<Eigen::Index>(ion_basis.index_of(l))] = w[i];
  }
  const double n = v.norm();
  if (n == 0.0) throw ValidationError("weights", "vanishing collective state");
  return v / n;
}

/// Ion-only vector sum_{i<j} w_i w_j |1_i 1_j>, normalised.
inline Eigen::VectorXd double_excitation(const SectorBasis& ion_basis, const std::vector<double>& w) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ion_basis.dimension()));
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      space::BasisLabel l = ion_basis.ground_label();
      l.ions[i] = space::kUpper;
      l.ions[j] = space::kUpper;
      v[static_cast<Eigen::Index>(ion_basis.index_of(l))] = w[i] * w[j];
    }
  const double n = v.norm();
  if (n == 0.0) throw ValidationError("weights", "vanishing collective state");
  return v / n;
}

inline Eigen::VectorXd ion_ground_vector(const SectorBasis& ion_basis) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ion_basis.dimension()));
  v[static_cast<Eigen::Index>(ion_basis.index_of(ion_basis.ground_label()))] = 1.0;
  return v;
}

/// |ion> (x) |bus, spurious, photon> in a full sector basis.
inline StateVector product_state(const SectorBasis& basis, const SectorBasis& ion_basis, const Eigen::VectorXd& ion,
                                 int bus, int spurious, int photon) {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t j = 0; j < ion_basis.dimension(); ++j) {
    const double a = ion[static_cast<Eigen::Index>(j)];
    if (a == 0.0) continue;
    space::BasisLabel l = ion_basis.label(j);
    l.bus = bus;
    l.spurious = spurious;
    l.photon = photon;
    if (auto i = basis.find(l)) v[static_cast<Eigen::Index>(*i)] = a;
  }
  return v;
}

inline StateVector product_state(const space::CollectiveBasis& basis, const SectorBasis&, const Eigen::VectorXd& ion,
                                 int bus, int spurious, int photon) {
  return basis.product_state(ion, bus, spurious, photon);
}

inline const SectorBasis& ion_basis_of(const space::CollectiveBasis& b) { return b.ion_basis(); }

/// Block of a channel from pure outputs: for each thermal weight p_k and
/// logical input x, amp[k][x](a, m) = <target_a, m| psi_x^k>; the spurious
/// occupation m is traced out.
inline dyn::ChannelEstimate channel_from_amplitudes(const std::vector<double>& weights,
                                                    const std::vector<std::vector<Eigen::MatrixXcd>>& amp) {
  const int d = static_cast<int>(amp.at(0).size());
  std::vector<Eigen::MatrixXcd> blocks(static_cast<std::size_t>(d * d), Eigen::MatrixXcd::Zero(d, d));
  for (std::size_t k = 0; k < weights.size(); ++k)
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y)
        blocks[static_cast<std::size_t>(x * d + y)] += weights[k] * amp[k][x] * amp[k][y].adjoint();
  return dyn::ChannelEstimate::from_blocks(d, std::move(blocks));
}

}  // namespace iontrans::protocol
