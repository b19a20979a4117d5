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

// Linear ion chain in a harmonic axial trap: equilibrium positions, axial
// normal modes and the per-ion standing-wave weights seen by the cavity and
// by the quadrupole drive.
//
// Lengths are in units of ell = (e^2 / (4 pi eps0 m omega^2))^(1/3) and
// frequencies in units of the axial trap frequency omega, so the potential is
//   V(u) = sum_i u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iontrans/common.hpp"

namespace iontrans::chain {

struct ChainGeometry {
  int n_ions = 0;
  /// Physical length unit in metres; 0 when the chain is purely dimensionless.
  double length_scale = 0.0;
  std::vector<double> positions;
};

struct ModeTable {
  /// Axial mode frequencies in units of omega, ascending.
  std::vector<double> frequencies;
  /// Column k holds the normalised displacement pattern of mode k.
  Eigen::MatrixXd mode_vectors;
};

/// Standing-wave phase k z_i (physical) or a sampled surrogate, one per ion.
struct PhaseProfile {
  std::vector<double> phases;
};

struct CouplingProfile {
  std::vector<double> g;
  double g0 = 0.0;
  double k = 0.0;
  double phase_offset = 0.0;
};

struct QuadrupoleFieldConfig {
  double theta = 0.0;
  double k_x = 0.0;
  double omega0 = 0.0;
  /// Phase of the quadrupole pattern relative to the cavity pattern; 0 is a perfect lock.
  double pattern_phase = 0.0;
};

struct QuadrupoleProfile {
  std::vector<double> carrier;   // c_i
  std::vector<double> sideband;  // s_i
  double eta_com = 0.0;
  double eta_spurious = 0.0;
  double nbar_spurious = 0.0;

  /// Lamb-Dicke factor of one ion on the centre-of-mass mode, eta / sqrt(N).
  double com_factor() const { return eta_com / std::sqrt(static_cast<double>(carrier.size())); }
  double spurious_factor() const {
    return eta_spurious / std::sqrt(static_cast<double>(carrier.size()));
  }
};

/// Gradient of the dimensionless potential.
inline Eigen::VectorXd potential_gradient(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::VectorXd f = u;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = u[i] - u[j];
      f[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  }
  return f;
}

/// Hessian of the dimensionless potential; its eigenvalues are (nu_k / omega)^2.
inline Eigen::MatrixXd potential_hessian(std::span<const double> u) {
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) += c;
      h(i, j) = -c;
    }
  }
  return h;
}

/// Equilibrium of N ions by damped Newton iteration from a uniform-spacing ansatz.
/// Throws SolverError if the force residual does not drop below `tol`.
inline ChainGeometry equilibrium_positions(int n_ions, double tol = 5e-13) {
  if (n_ions < 1) throw ValidationError("n_ions", "must be >= 1");
  if (!(tol > 0)) throw ValidationError("tol", "must be positive");

  ChainGeometry geom;
  geom.n_ions = n_ions;
  const auto n = static_cast<Eigen::Index>(n_ions);
  if (n_ions == 1) {
    geom.positions = {0.0};
    return geom;
  }

  // Spacing at the centre scales roughly as 2.02 N^-0.56.
  const double spacing = 2.018 * std::pow(static_cast<double>(n_ions), -0.559);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = (static_cast<double>(i) - 0.5 * (n - 1)) * spacing;

  auto residual = [](const Eigen::VectorXd& f) { return f.cwiseAbs().maxCoeff(); };
  auto ordered = [n](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 1; i < n; ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };

  Eigen::VectorXd f = potential_gradient(u);
  double res = residual(f);
  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations && res >= tol; ++it) {
    const Eigen::MatrixXd h = potential_hessian(std::span<const double>(u.data(), u.size()));
    const Eigen::VectorXd step = h.ldlt().solve(f);
    double lambda = 1.0;
    for (int backtrack = 0; backtrack < 40; ++backtrack, lambda *= 0.5) {
      Eigen::VectorXd trial = u - lambda * step;
      if (!ordered(trial)) continue;
      const Eigen::VectorXd ft = potential_gradient(trial);
      const double rt = residual(ft);
      if (rt < res || lambda < 1e-6) {
        u = trial;
        f = ft;
        res = rt;
        break;
      }
    }
    // Mirror symmetry of the symmetric trap.
    for (Eigen::Index i = 0; i < n / 2; ++i) {
      const double a = 0.5 * (u[i] - u[n - 1 - i]);
      u[i] = a;
      u[n - 1 - i] = -a;
    }
    if (n % 2 == 1) u[n / 2] = 0.0;
    f = potential_gradient(u);
    res = residual(f);
  }
  if (!(res < tol)) throw SolverError("equilibrium_positions did not converge", res);

  geom.positions.assign(u.data(), u.data() + n);
  return geom;
}

/// Physical length unit ell in metres for a singly charged ion.
inline double length_scale_meters(double mass_amu, double trap_frequency_hz) {
  constexpr double kCoulomb = 8.9875517923e9;  // 1 / (4 pi eps0)
  constexpr double kCharge = 1.602176634e-19;
  constexpr double kAmu = 1.66053906660e-27;
  const double omega = kTwoPi * trap_frequency_hz;
  return std::cbrt(kCoulomb * kCharge * kCharge / (mass_amu * kAmu * omega * omega));
}

/// Axial normal modes from the Hessian at equilibrium.
inline ModeTable axial_mode_spectrum(const ChainGeometry& geom) {
  if (geom.n_ions < 1 || static_cast<int>(geom.positions.size()) != geom.n_ions)
    throw GeometryError("axial_mode_spectrum: positions do not match n_ions");
  const Eigen::MatrixXd h = potential_hessian(geom.positions);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw GeometryError("axial_mode_spectrum: eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0) throw GeometryError("axial_mode_spectrum: Hessian is not positive definite");

  ModeTable modes;
  modes.frequencies.resize(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index k = 0; k < lambda.size(); ++k) modes.frequencies[k] = std::sqrt(lambda[k]);
  modes.mode_vectors = eig.eigenvectors();
  for (Eigen::Index k = 0; k < modes.mode_vectors.cols(); ++k) {
    // Sign convention: first non-negligible component positive.
    auto col = modes.mode_vectors.col(k);
    Eigen::Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-8) {
        pivot = i;
        break;
      }
    }
    if (col[pivot] < 0) col = -col;
  }
  return modes;
}

inline PhaseProfile physical_phases(const ChainGeometry& geom, double k) {
  PhaseProfile p;
  p.phases.reserve(geom.positions.size());
  for (double z : geom.positions) p.phases.push_back(k * z);
  return p;
}

/// Uniform phases on [0, 2 pi). Uses the top 53 bits of a 64-bit draw so the
/// sequence is identical across standard library implementations.
template <class Engine>
PhaseProfile sampled_phases(int n_ions, Engine& rng) {
  static_assert(Engine::word_size >= 53 || sizeof(typename Engine::result_type) == 8);
  PhaseProfile p;
  p.phases.reserve(static_cast<std::size_t>(n_ions));
  for (int i = 0; i < n_ions; ++i) {
    const std::uint64_t bits = static_cast<std::uint64_t>(rng()) >> 11;
    p.phases.push_back(kTwoPi * static_cast<double>(bits) * 0x1.0p-53);
  }
  return p;
}

/// g_i = g0 sin(phase_i + phase_offset).
inline CouplingProfile cavity_coupling_profile(const PhaseProfile& phases, double g0,
                                               double phase_offset = 0.0) {
  if (!(g0 > 0)) throw ValidationError("g0", "must be positive");
  CouplingProfile prof;
  prof.g0 = g0;
  prof.phase_offset = phase_offset;
  prof.g.reserve(phases.phases.size());
  for (double ph : phases.phases) prof.g.push_back(g0 * std::sin(ph + phase_offset));
  return prof;
}

inline CouplingProfile cavity_coupling_profile(const ChainGeometry& geom, double g0, double k,
                                               double phase_offset) {
  CouplingProfile prof = cavity_coupling_profile(physical_phases(geom, k), g0, phase_offset);
  prof.k = k;
  return prof;
}

/// Carrier weights c_i = cos(phase_i + phi_q) and sideband weights
/// s_i = -sin(phase_i + phi_q), from expanding cos(k z_i) to first order in
/// the displacement about equilibrium.
inline QuadrupoleProfile quadrupole_weight_profile(const PhaseProfile& phases,
                                                   const QuadrupoleFieldConfig& cfg, double eta,
                                                   double eta_spurious,
                                                   double nbar_spurious = 0.0) {
  if (!(eta > 0)) throw ValidationError("eta", "must be positive");
  if (eta_spurious < 0) throw ValidationError("eta_spurious", "must be non-negative");
  if (nbar_spurious < 0) throw ValidationError("nbar_spurious", "must be non-negative");
  QuadrupoleProfile q;
  q.eta_com = eta;
  q.eta_spurious = eta_spurious;
  q.nbar_spurious = nbar_spurious;
  for (double ph : phases.phases) {
    q.carrier.push_back(std::cos(ph + cfg.pattern_phase));
    q.sideband.push_back(-std::sin(ph + cfg.pattern_phase));
  }
  return q;
}

inline QuadrupoleProfile quadrupole_weight_profile(const ChainGeometry& geom, double k,
                                                   const QuadrupoleFieldConfig& cfg, double eta,
                                                   double eta_spurious) {
  return quadrupole_weight_profile(physical_phases(geom, k), cfg, eta, eta_spurious);
}

}  // namespace iontrans::chain
