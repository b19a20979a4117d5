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

// Closed-form checks of the solvers and the channel algebra.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "iontrans/channel.hpp"
#include "iontrans/dynamics.hpp"
#include "iontrans/ionchain.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/step1.hpp"
#include "iontrans/statespace.hpp"

namespace iontrans::validation {

struct OracleResult {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  /// Absolute or relative error, whichever the oracle is judged on.
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline space::SparseOperator dense2(Complex a, Complex b, Complex c, Complex d) {
  Eigen::Matrix2cd m;
  m << a, b, c, d;
  return space::SparseOperator::from_dense(m);
}

inline OracleResult judge(std::string name, double value, double reference, double error, double tolerance) {
  return {std::move(name), value, reference, error, tolerance, error <= tolerance};
}

}  // namespace detail

/// H = Omega sigma_x from |0>: P1(t) = sin^2(Omega t).
inline OracleResult resonant_rabi_oracle(double omega = 0.37, double tol = 1e-12) {
  dyn::ParametricHamiltonian h(2);
  h.add(detail::dense2(0, omega, omega, 0));
  StateVector psi0(2);
  psi0 << 1, 0;
  const auto grid = dyn::linspace(0.0, 3.0 * kPi / omega, 31);
  dyn::EvolveOptions eo;
  eo.tol = tol;
  const auto traj = dyn::evolve_state(h, psi0, grid, eo);
  double worst = 0.0;
  double at_worst = 0.0;
  double ref_worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double p1 = std::norm(traj.states[k][1]);
    const double ref = std::pow(std::sin(omega * grid[k]), 2);
    if (std::abs(p1 - ref) >= worst) {
      worst = std::abs(p1 - ref);
      at_worst = p1;
      ref_worst = ref;
    }
  }
  return detail::judge("resonant_rabi", at_worst, ref_worst, worst, 1e-6);
}

/// H = (v t / 2) sz + (delta / 2) sx swept from -T to T; the diabatic
/// survival tends to exp(-pi delta^2 / (2 v)). Starting and ending in the
/// adiabatic states that join |0> at t -> -+inf removes the O(1/vT) ripple of
/// a sudden start.
inline OracleResult landau_zener_oracle(double delta = 1.0, double rate = 1.0, std::string name = "landau_zener") {
  // Sweep far enough that the bias exceeds the gap by a factor 200.
  const double half_span = 400.0 * delta / rate;
  dyn::ParametricHamiltonian h(2);
  h.add(detail::dense2(0, 0.5 * delta, 0.5 * delta, 0));
  h.add(detail::dense2(0.5, 0, 0, -0.5), [rate](double t) { return rate * t; });
  auto eigvec = [&](double t, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(h.at(t).matrix()));
    return StateVector(eig.eigenvectors().col(k));
  };
  dyn::EvolveOptions eo;
  eo.tol = 1e-12;
  dyn::StatePropagator prop(h, eigvec(-half_span, 0), -half_span, eo);
  prop.advance_to(half_span);
  const double survival = std::norm(eigvec(half_span, 1).dot(prop.state()));
  const double ref = std::exp(-kPi * delta * delta / (2.0 * rate));
  return detail::judge(std::move(name), survival, ref, std::abs(survival - ref), 1e-3);
}

/// Free cavity decay <n>(t) = exp(-kappa t) and free decay of |e> at 2 Gamma.
inline std::vector<OracleResult> decay_oracles(double kappa = 1.0, double gamma = 0.7) {
  std::vector<OracleResult> out;
  const auto cfg = protocol::step1_sector(1, 1);
  const space::SectorBasis basis(cfg);
  const auto dim = basis.dimension();
  dyn::ParametricHamiltonian h(dim);
  const std::vector<dyn::JumpOperator> jumps{
      {space::build_operator(space::ModeLadder{space::Mode::photon, false}, basis), kappa},
      {space::build_operator(space::IonTransition{space::kExcited, space::kUpper, {1.0}}, basis), gamma},
      {space::build_operator(space::IonTransition{space::kExcited, space::kGround, {1.0}}, basis), gamma}};
  const auto n_op = space::build_operator(space::ModeNumber{space::Mode::photon}, basis);
  const auto e_op = space::build_operator(space::LevelPopulation{space::kExcited}, basis);
  dyn::EvolveOptions eo;
  eo.tol = 1e-12;

  auto run = [&](const space::BasisLabel& start, const space::SparseOperator& obs, double rate, const char* name) {
    DensityMatrix rho0 = DensityMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto i = static_cast<Eigen::Index>(basis.index_of(start));
    rho0(i, i) = 1.0;
    const auto grid = dyn::linspace(0.0, 4.0 / rate, 21);
    const auto traj = dyn::evolve_density(h, jumps, rho0, grid, eo);
    double worst = 0.0;
    double val = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double v = space::expectation(traj.densities[k], obs).real();
      const double r = std::exp(-rate * grid[k]);
      if (std::abs(v - r) >= worst) {
        worst = std::abs(v - r);
        val = v;
        ref = r;
      }
    }
    out.push_back(detail::judge(name, val, ref, worst, 1e-6));
  };

  space::BasisLabel photon = basis.ground_label();
  photon.photon = 1;
  run(photon, n_op, kappa, "cavity_decay");
  space::BasisLabel excited = basis.ground_label();
  excited.ions[0] = space::kExcited;
  run(excited, e_op, 2.0 * gamma, "atomic_decay");
  return out;
}

/// Single-excitation spectrum of the cavity + ions at Omega1 = 0: the bright
/// pair sits at +-sqrt(sum g_i^2).
inline OracleResult vacuum_rabi_oracle(int n_ions = 7, std::uint64_t seed = 11) {
  protocol::ProtocolParams p;
  const auto setup = protocol::make_chain_setup(p, n_ions, seed);
  p.rabi1 = 0.0;
  const space::SectorBasis basis(protocol::step1_sector(n_ions, 1));
  const auto sys = protocol::assemble_step1_system(setup.coupling, p, basis);
  const Eigen::MatrixXcd hd = Eigen::MatrixXcd(sys.hamiltonian.at(0.0).matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hd, Eigen::EigenvaluesOnly);
  const double split = eig.eigenvalues().maxCoeff() - eig.eigenvalues().minCoeff();
  double sum = 0.0;
  for (double g : setup.coupling.g) sum += g * g;
  const double ref = 2.0 * std::sqrt(sum);
  return detail::judge("vacuum_rabi_splitting", split, ref, std::abs(split - ref) / ref, 1e-9);
}

inline OracleResult lossless_retrieval_oracle(int n_ions = 6, std::uint64_t seed = 5) {
  protocol::ProtocolParams p;
  p.gamma = 0.0;
  const auto setup = protocol::make_chain_setup(p, n_ions, seed);
  const auto r = protocol::run_step1_retrieval(p, setup, {1, false});
  return detail::judge("f2_without_spontaneous_emission", r.fidelity, 1.0, std::abs(r.fidelity - 1.0), 1e-8);
}

/// Complete dephasing rho -> diag(rho): analytic average fidelity against a
/// Monte-Carlo average over Haar-random pure states.
inline OracleResult dephasing_oracle(std::size_t samples = 400000, std::uint64_t seed = 3) {
  std::vector<Eigen::MatrixXcd> blocks(4, Eigen::MatrixXcd::Zero(2, 2));
  blocks[0](0, 0) = 1.0;
  blocks[3](1, 1) = 1.0;
  const auto c = dyn::ChannelEstimate::from_blocks(2, blocks);
  const double analytic = dyn::average_channel_fidelity(c);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double sum = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Complex a(normal(rng), normal(rng));
    const Complex b(normal(rng), normal(rng));
    const double n = std::norm(a) + std::norm(b);
    const double pa = std::norm(a) / n;
    sum += pa * pa + (1.0 - pa) * (1.0 - pa);
  }
  const double mc = sum / static_cast<double>(samples);
  const double err = std::max(std::abs(analytic - mc), std::abs(analytic - 2.0 / 3.0));
  return detail::judge("dephasing_average_fidelity", analytic, mc, err, 1e-3);
}

/// u = +-(1/4)^(1/3) for two ions, 0 and +-(5/4)^(1/3) for three.
inline OracleResult equilibrium_oracle() {
  const auto g2 = chain::equilibrium_positions(2);
  const auto g3 = chain::equilibrium_positions(3);
  const double a = std::cbrt(0.25);
  const double b = std::cbrt(1.25);
  const std::vector<double> ref2{-a, a};
  const std::vector<double> ref3{-b, 0.0, b};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(g2.positions[i] - ref2[i]));
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(g3.positions[i] - ref3[i]));
  return detail::judge("equilibrium_positions", g3.positions[2], b, worst, 1e-10);
}

inline std::vector<OracleResult> run_oracle_suite() {
  std::vector<OracleResult> r;
  r.push_back(resonant_rabi_oracle());
  r.push_back(landau_zener_oracle());
  r.push_back(landau_zener_oracle(1.0, 0.1, "landau_zener_adiabatic"));
  r.push_back(landau_zener_oracle(1.0, 50.0, "landau_zener_diabatic"));
  for (auto& d : decay_oracles()) r.push_back(std::move(d));
  r.push_back(vacuum_rabi_oracle());
  r.push_back(lossless_retrieval_oracle());
  r.push_back(dephasing_oracle());
  r.push_back(equilibrium_oracle());
  return r;
}

}  // namespace iontrans::validation
