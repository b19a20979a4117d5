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
#include <random>

#include <gtest/gtest.h>

#include "iontrans/ionchain.hpp"

namespace iontrans::chain {
namespace {

TEST(Equilibrium, SingleIonSitsAtCentre) {
  const auto g = equilibrium_positions(1);
  ASSERT_EQ(g.positions.size(), 1u);
  EXPECT_EQ(g.positions[0], 0.0);
}

TEST(Equilibrium, TwoIons) {
  const auto g = equilibrium_positions(2);
  const double a = std::pow(2.0, -2.0 / 3.0);
  EXPECT_NEAR(g.positions[0], -a, 1e-12);
  EXPECT_NEAR(g.positions[1], a, 1e-12);
  EXPECT_NEAR(a, 0.6300, 1e-4);
}

TEST(Equilibrium, ThreeIons) {
  const auto g = equilibrium_positions(3);
  const double b = std::cbrt(1.25);
  EXPECT_NEAR(g.positions[0], -b, 1e-12);
  EXPECT_NEAR(g.positions[1], 0.0, 1e-12);
  EXPECT_NEAR(g.positions[2], b, 1e-12);
}

TEST(Equilibrium, ResidualAndSymmetryUpTo60) {
  for (int n = 1; n <= 60; ++n) {
    const auto g = equilibrium_positions(n);
    const Eigen::Map<const Eigen::VectorXd> u(g.positions.data(), n);
    EXPECT_LT(potential_gradient(u).cwiseAbs().maxCoeff(), 1e-12) << "N=" << n;
    for (int i = 0; i < n; ++i) EXPECT_NEAR(g.positions[i], -g.positions[n - 1 - i], 1e-10) << "N=" << n;
    for (int i = 1; i < n; ++i) EXPECT_LT(g.positions[i - 1], g.positions[i]);
  }
}

TEST(Equilibrium, RejectsEmptyChain) { EXPECT_THROW(equilibrium_positions(0), Error); }

TEST(Modes, TwoIonSpectrum) {
  const auto m = axial_mode_spectrum(equilibrium_positions(2));
  EXPECT_NEAR(m.frequencies[0], 1.0, 1e-12);
  EXPECT_NEAR(m.frequencies[1], std::sqrt(3.0), 1e-9 * std::sqrt(3.0));
}

TEST(Modes, SingleIon) {
  const auto m = axial_mode_spectrum(equilibrium_positions(1));
  ASSERT_EQ(m.frequencies.size(), 1u);
  EXPECT_NEAR(m.frequencies[0], 1.0, 1e-12);
  EXPECT_NEAR(std::abs(m.mode_vectors(0, 0)), 1.0, 1e-12);
}

TEST(Modes, CentreOfMassIsUniform) {
  const auto m = axial_mode_spectrum(equilibrium_positions(5));
  EXPECT_NEAR(m.frequencies[0], 1.0, 1e-12);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(m.mode_vectors(i, 0), 1.0 / std::sqrt(5.0), 1e-12);
}

TEST(Modes, PropertiesUpTo60) {
  for (int n : {2, 3, 7, 18, 33, 60}) {
    const auto m = axial_mode_spectrum(equilibrium_positions(n));
    EXPECT_NEAR(m.frequencies[0], 1.0, 1e-12) << "N=" << n;
    EXPECT_NEAR(m.frequencies[1] / std::sqrt(3.0), 1.0, 1e-9) << "N=" << n;
    for (std::size_t k = 1; k < m.frequencies.size(); ++k) EXPECT_GT(m.frequencies[k] - m.frequencies[k - 1], 1e-9);
    const Eigen::MatrixXd gram = m.mode_vectors.transpose() * m.mode_vectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << "N=" << n;
  }
}

TEST(Coupling, HomogeneousAntinode) {
  PhaseProfile ph;
  ph.phases.assign(6, 0.5 * kPi);
  const auto c = cavity_coupling_profile(ph, 8.0);
  for (double g : c.g) EXPECT_DOUBLE_EQ(g, 8.0);
}

TEST(Coupling, BoundedByPeakCoupling) {
  std::mt19937_64 rng(42);
  const auto c = cavity_coupling_profile(sampled_phases(200, rng), 8.0);
  for (double g : c.g) EXPECT_LE(std::abs(g), 8.0);
  const auto geom = equilibrium_positions(25);
  const auto d = cavity_coupling_profile(geom, 8.0, kTwoPi / 0.05, 0.4);
  for (double g : d.g) EXPECT_LE(std::abs(g), 8.0);
}

TEST(Coupling, TwoIonDirectEvaluation) {
  const auto geom = equilibrium_positions(2);
  const double k = 0.3 / geom.positions[0];
  const auto c = cavity_coupling_profile(geom, 8.0, k, 0.0);
  EXPECT_NEAR(c.g[0], 8.0 * std::sin(0.3), 1e-14);
  EXPECT_NEAR(c.g[1], 8.0 * std::sin(k * geom.positions[1]), 1e-14);
  EXPECT_NEAR(c.g[1], -8.0 * std::sin(0.3), 1e-12);
}

TEST(Coupling, RejectsNonPositivePeak) {
  PhaseProfile ph;
  ph.phases = {0.1};
  EXPECT_THROW(cavity_coupling_profile(ph, 0.0), ValidationError);
}

TEST(SampledPhases, SeededAndInRange) {
  std::mt19937_64 a(9), b(9);
  const auto pa = sampled_phases(50, a);
  const auto pb = sampled_phases(50, b);
  EXPECT_EQ(pa.phases, pb.phases);
  for (double p : pa.phases) {
    EXPECT_GE(p, 0.0);
    EXPECT_LT(p, kTwoPi);
  }
}

TEST(Quadrupole, UnitCircleWeights) {
  std::mt19937_64 rng(1);
  const auto q = quadrupole_weight_profile(sampled_phases(40, rng), {}, 0.1, 0.4);
  for (std::size_t i = 0; i < q.carrier.size(); ++i)
    EXPECT_NEAR(q.carrier[i] * q.carrier[i] + q.sideband[i] * q.sideband[i], 1.0, 4e-16);
}

TEST(Quadrupole, LockedPatternFollowsCavity) {
  std::mt19937_64 rng(2);
  const auto ph = sampled_phases(12, rng);
  const auto g = cavity_coupling_profile(ph, 8.0);
  const auto q = quadrupole_weight_profile(ph, {}, 0.1, 0.4);
  for (std::size_t i = 0; i < ph.phases.size(); ++i) EXPECT_NEAR(q.sideband[i], -g.g[i] / 8.0, 1e-15);
}

TEST(Quadrupole, LambDickeFactors) {
  PhaseProfile ph;
  ph.phases.assign(9, 0.3);
  const auto q = quadrupole_weight_profile(ph, {}, 0.1, 0.4);
  EXPECT_DOUBLE_EQ(q.eta_spurious / q.eta_com, 4.0);
  EXPECT_NEAR(q.com_factor(), 0.1 / 3.0, 1e-16);
  EXPECT_NEAR(q.spurious_factor(), 0.4 / 3.0, 1e-16);
}

TEST(Quadrupole, PatternMismatchReducesCorrelation) {
  const auto geom = equilibrium_positions(10);
  const auto ph = physical_phases(geom, kTwoPi / 0.05);
  auto correlation = [&](double mismatch) {
    QuadrupoleFieldConfig cfg;
    cfg.pattern_phase = mismatch;
    const auto q = quadrupole_weight_profile(ph, cfg, 0.1, 0.4);
    double c = 0.0;
    for (std::size_t i = 0; i < ph.phases.size(); ++i) c += q.sideband[i] * std::sin(ph.phases[i]);
    return std::abs(c);
  };
  EXPECT_LT(correlation(0.5 * kPi), correlation(0.0));
}

TEST(Quadrupole, RejectsBadLambDicke) {
  PhaseProfile ph;
  ph.phases = {0.0};
  EXPECT_THROW(quadrupole_weight_profile(ph, {}, 0.0, 0.4), ValidationError);
  EXPECT_THROW(quadrupole_weight_profile(ph, {}, 0.1, -0.1), ValidationError);
}

}  // namespace
}  // namespace iontrans::chain
