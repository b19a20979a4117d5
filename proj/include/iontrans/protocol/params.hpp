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

// Protocol parameters and the per-realization chain setup shared by all
// three transfer steps.
//
// Units: steps II and III use the axial trap frequency omega = 1, step I uses
// the cavity decay rate kappa = 1. The two scales are joined only when
// converting durations to seconds.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "iontrans/common.hpp"
#include "iontrans/ionchain.hpp"

namespace iontrans::protocol {

/// sampled: i.i.d. uniform phases; physical: k z_i from the equilibrium
/// positions; antinode: every ion at k z_i + phi = pi/2 (uniform coupling g0).
enum class PhaseMode { sampled, physical, antinode };
enum class BasisKind { compressed, full };

struct ProtocolParams {
  // Step II / III, units of omega.
  double omega_max = 0.01;
  double eta = 0.1;
  double eta_spurious = 0.4;
  double spurious_frequency = std::sqrt(3.0);
  double chirp_half_width = 8e-3;
  double chirp_duration = 2e4;
  /// Gaussian standard deviation as a fraction of the chirp duration.
  double gaussian_width_fraction = 1.0 / 6.0;
  /// Extra integration time before and after the pulse, as a fraction of
  /// chirp_duration; the Gaussian tail and the chirp continue into it.
  double window_extension = 0.0;
  double nbar_spurious = 0.0;
  bool rwa = false;

  // Step I, units of kappa.
  double rabi1 = 50.0;
  double gamma = 10.0;
  double g0 = 8.0;
  double delta_stirap = 0.0;
  double step1_ramp = 80.0;
  double step1_residual = 1e-4;
  double step1_max_time = 2000.0;

  // Step III.
  double stark_bracket = 10.0;
  int stark_grid = 21;
  /// Addressed ion for step III; negative selects the ion with the largest |s_i|.
  int addressed_ion = -1;
  double weak_coupling_threshold = 0.5;

  // Geometry and phases.
  PhaseMode phase_mode = PhaseMode::sampled;
  /// Cavity wavelength in units of the chain length scale (physical mode).
  double wavelength_over_ell = 0.05;
  double cavity_phase = 0.0;
  double pattern_phase = 0.0;

  // Truncation for step II.
  BasisKind basis = BasisKind::compressed;
  int max_ion_excitations = 3;
  int total_cap = 3;
  int bus_cutoff = 3;
  int spurious_cutoff = 3;
  int collective_depth = 4;
  std::size_t max_dimension = 4'000'000;

  // Integration.
  /// Relative/absolute tolerance for state vectors (steps II, III).
  double tol = 1e-13;
  /// Tolerance for density matrices (step I).
  double lindblad_tol = 1e-10;

  // Physical scales for reporting.
  double omega_over_2pi_hz = 1e6;
  double kappa_over_omega = 1.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0) || !std::isfinite(v)) throw ValidationError(name, "must be positive");
    };
    auto non_negative = [](double v, const char* name) {
      if (!(v >= 0) || !std::isfinite(v)) throw ValidationError(name, "must be non-negative");
    };
    positive(omega_max, "omega_max");
    positive(eta, "eta");
    if (eta >= 1) throw ValidationError("eta", "must be well below 1");
    non_negative(eta_spurious, "eta_spurious");
    positive(spurious_frequency, "spurious_frequency");
    positive(chirp_half_width, "chirp_half_width");
    positive(chirp_duration, "chirp_duration");
    positive(gaussian_width_fraction, "gaussian_width_fraction");
    non_negative(window_extension, "window_extension");
    non_negative(nbar_spurious, "nbar_spurious");
    non_negative(rabi1, "rabi1");
    non_negative(gamma, "gamma");
    positive(g0, "g0");
    if (!std::isfinite(delta_stirap)) throw ValidationError("delta_stirap", "must be finite");
    positive(step1_ramp, "step1_ramp");
    positive(step1_residual, "step1_residual");
    positive(step1_max_time, "step1_max_time");
    positive(stark_bracket, "stark_bracket");
    if (stark_grid < 3) throw ValidationError("stark_grid", "must be >= 3");
    positive(wavelength_over_ell, "wavelength_over_ell");
    if (max_ion_excitations < 1) throw ValidationError("max_ion_excitations", "must be >= 1");
    if (total_cap < max_ion_excitations) throw ValidationError("total_cap", "must be >= max_ion_excitations");
    if (bus_cutoff < 1) throw ValidationError("bus_cutoff", "must be >= 1");
    if (spurious_cutoff < 1) throw ValidationError("spurious_cutoff", "must be >= 1");
    if (collective_depth < 1) throw ValidationError("collective_depth", "must be >= 1");
    positive(tol, "tol");
    positive(lindblad_tol, "lindblad_tol");
    positive(omega_over_2pi_hz, "omega_over_2pi_hz");
    positive(kappa_over_omega, "kappa_over_omega");
  }

  double omega_si() const { return kTwoPi * omega_over_2pi_hz; }
  double kappa_si() const { return kappa_over_omega * omega_si(); }
};

/// Per-realization seed from the run seed, chain size and realization index.
inline std::uint64_t derive_seed(std::uint64_t base, int n_ions, int realization) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ static_cast<std::uint64_t>(n_ions)) ^ static_cast<std::uint64_t>(realization));
}

/// Everything about one chain realization that the steps consume.
struct ChainSetup {
  int n_ions = 0;
  std::uint64_t seed = 0;
  chain::ChainGeometry geometry;
  chain::PhaseProfile phases;
  chain::CouplingProfile coupling;
  chain::QuadrupoleProfile quad;
};

/// Homogeneous setup with every ion at a cavity antinode (k z_i + phi = pi/2).
inline ChainSetup make_homogeneous_setup(const ProtocolParams& p, int n_ions) {
  ChainSetup s;
  s.n_ions = n_ions;
  s.geometry = chain::equilibrium_positions(n_ions);
  s.phases.phases.assign(static_cast<std::size_t>(n_ions), 0.5 * kPi);
  s.coupling = chain::cavity_coupling_profile(s.phases, p.g0, 0.0);
  s.quad = chain::quadrupole_weight_profile(s.phases, {}, p.eta, p.eta_spurious, p.nbar_spurious);
  return s;
}

inline ChainSetup make_chain_setup(const ProtocolParams& p, int n_ions, std::uint64_t seed) {
  p.validate();
  ChainSetup s;
  s.n_ions = n_ions;
  s.seed = seed;
  if (p.phase_mode == PhaseMode::antinode) {
    s = make_homogeneous_setup(p, n_ions);
    s.seed = seed;
    return s;
  }
  s.geometry = chain::equilibrium_positions(n_ions);
  if (p.phase_mode == PhaseMode::physical) {
    s.phases = chain::physical_phases(s.geometry, kTwoPi / p.wavelength_over_ell);
  } else {
    std::mt19937_64 rng(seed);
    s.phases = chain::sampled_phases(n_ions, rng);
  }
  s.coupling = chain::cavity_coupling_profile(s.phases, p.g0, p.cavity_phase);
  chain::QuadrupoleFieldConfig q;
  // The quadrupole pattern follows the cavity pattern up to the lock error.
  q.pattern_phase = p.cavity_phase + p.pattern_phase;
  s.quad = chain::quadrupole_weight_profile(s.phases, q, p.eta, p.eta_spurious, p.nbar_spurious);
  return s;
}

/// Thermal weights p_k = nbar^k / (1 + nbar)^(k+1), truncated once the tail
/// drops below `tail` and renormalised.
inline std::vector<double> thermal_weights(double nbar, double tail = 1e-4, int max_k = 8) {
  if (nbar <= 0) return {1.0};
  std::vector<double> w;
  double sum = 0.0;
  const double r = nbar / (1.0 + nbar);
  double pk = 1.0 / (1.0 + nbar);
  for (int k = 0; k <= max_k; ++k) {
    w.push_back(pk);
    sum += pk;
    if (1.0 - sum < tail) break;
    pk *= r;
  }
  for (double& x : w) x /= sum;
  return w;
}

struct ScanPoint {
  double duration = 0.0;
  double fidelity = 0.0;
};

struct DurationScan {
  std::vector<ScanPoint> points;
  double chosen = 0.0;
  bool converged = false;
};

/// Doubles a duration from `start` until fidelity(duration) changes by less
/// than `delta`; `chosen` is the shorter of the last two.
inline DurationScan doubling_scan(double start, double delta, int max_doublings,
                                  const std::function<double(double)>& fidelity) {
  DurationScan scan;
  double t = start;
  double prev = fidelity(t);
  scan.points.push_back({t, prev});
  scan.chosen = t;
  for (int i = 0; i < max_doublings; ++i) {
    t *= 2.0;
    const double f = fidelity(t);
    scan.points.push_back({t, f});
    if (std::abs(f - prev) < delta) {
      scan.chosen = t / 2.0;
      scan.converged = true;
      break;
    }
    prev = f;
    scan.chosen = t;
  }
  return scan;
}

}  // namespace iontrans::protocol
