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
#include <optional>

#include <gtest/gtest.h>

#include "iontrans/protocol/gate.hpp"
#include "iontrans/protocol/joint.hpp"

namespace iontrans::protocol {
namespace {

ProtocolParams ideal_params() {
  ProtocolParams p;
  p.rwa = true;
  p.eta_spurious = 0.0;
  p.chirp_duration = 1e5;
  p.gamma = 0.0;
  p.phase_mode = PhaseMode::antinode;
  return p;
}

TEST(Joint, IdealChannelsComposeToOne) {
  const auto id = dyn::ChannelEstimate::from_amplitudes({Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)});
  const auto c = dyn::compose(step1_channel(1.0), dyn::compose(id, id));
  EXPECT_NEAR(dyn::average_channel_fidelity(c), 1.0, 1e-15);
}

TEST(Joint, IdealLimitsGiveUnitFidelity) {
  const auto p = ideal_params();
  const auto r = run_joint_protocol(p, make_chain_setup(p, 2, 0));
  EXPECT_GT(r.fidelity, 0.999);
  EXPECT_TRUE(r.composition_consistent);
}

TEST(Joint, DefaultParametersSmallChain) {
  ProtocolParams p;
  const auto setup = make_chain_setup(p, 6, derive_seed(1, 6, 0));
  const auto r = run_joint_protocol(p, setup);
  EXPECT_TRUE(r.composition_consistent);
  const double weakest = std::min({r.channel_fidelity_step1, r.channel_fidelity_step2, r.channel_fidelity_step3});
  EXPECT_LE(r.fidelity, weakest + 1e-6);
  EXPECT_GT(r.fidelity, 0.8);
  EXPECT_EQ(r.f0, r.step3.fidelity);
  EXPECT_EQ(r.f1, r.step2.fidelity);
  EXPECT_EQ(r.f2, r.step1.fidelity);
  EXPECT_NEAR(r.duration_seconds, total_duration_seconds(p, r.duration_step3, r.duration_step2, r.duration_step1),
              0.0);
  EXPECT_NEAR(r.duration_seconds,
              (r.duration_step3 + r.duration_step2) / p.omega_si() + r.duration_step1 / p.kappa_si(), 1e-18);
  EXPECT_LT(r.diagnostics.max_norm_drift, 1e-8);
  EXPECT_LT(r.diagnostics.max_trace_drift, 1e-8);
  EXPECT_GE(r.diagnostics.min_eigenvalue, -1e-8);
  EXPECT_LT(r.hermiticity_defect, 1e-15);
}

TEST(Joint, FailuresNameTheStep) {
  ProtocolParams p;
  p.max_dimension = 40;
  const auto setup = make_chain_setup(p, 6, 1);
  try {
    run_joint_protocol(p, setup);
    FAIL() << "expected a step failure";
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), "step II");
    bool nested_budget = false;
    try {
      std::rethrow_if_nested(e);
    } catch (const BudgetError& inner) {
      nested_budget = true;
      EXPECT_GT(inner.dimension(), 40u);
    }
    EXPECT_TRUE(nested_budget);
  }
}

TEST(Gate, TrivialWithoutTwoPhotonComponent) {
  GateStepAmplitudes ideal;
  for (auto& s : ideal.amplitude) s = {1.0, 1.0, 1.0};
  const std::array<Complex, 3> alpha{Complex(0.6, 0.0), Complex(0.0, 0.8), 0.0};
  const auto r = run_photonic_phase_gate(ideal, alpha);
  for (int n = 0; n < 3; ++n) EXPECT_EQ(r.output[n], alpha[n]);
  EXPECT_NEAR(r.overlap, 1.0, 1e-15);
}

TEST(Gate, IdealTwoPhotonSignFlip) {
  GateStepAmplitudes ideal;
  for (auto& s : ideal.amplitude) s = {1.0, 1.0, 1.0};
  const auto r = run_photonic_phase_gate(ideal, {0.0, 0.0, 1.0});
  EXPECT_EQ(r.output[2], Complex(-1.0));
  EXPECT_NEAR(r.success_probability, 1.0, 1e-15);
}

TEST(Gate, RejectsUnnormalisedInput) {
  GateStepAmplitudes ideal;
  EXPECT_THROW(run_photonic_phase_gate(ideal, {1.0, 1.0, 0.0}), ValidationError);
}

class SimulatedGate : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ProtocolParams p;
    steps_ = gate_step_amplitudes(p, make_chain_setup(p, 6, derive_seed(1, 6, 0)));
  }
  static std::optional<GateStepAmplitudes> steps_;
};

std::optional<GateStepAmplitudes> SimulatedGate::steps_;

// Superoperator of rho -> K rho K^+ on column-stacked 3x3 matrices.
Eigen::MatrixXcd superop(const Eigen::Matrix3cd& k) {
  Eigen::MatrixXcd s(9, 9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) s(a + 3 * b, c + 3 * d) = k(a, c) * std::conj(k(b, d));
  return s;
}

TEST_F(SimulatedGate, AmplitudesArePhysical) {
  const auto& g = *steps_;
  for (const auto& s : g.amplitude)
    for (double a : s) {
      EXPECT_GT(a, 0.5);
      EXPECT_LE(a, 1.0 + 1e-9);
    }
  EXPECT_EQ(g.amplitude[0][0], 1.0);
  EXPECT_GT(g.one_way_seconds, 0.0);
}

TEST_F(SimulatedGate, BalancedInputMatchesComposedChannels) {
  const double s = 1.0 / std::sqrt(3.0);
  const std::array<Complex, 3> alpha{s, s, s};
  const auto r = run_photonic_phase_gate(*steps_, alpha);

  // Storage runs steps I, II, III, then the ideal phase flip, then III, II, I.
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(9, 9);
  auto step = [](const std::array<double, 3>& a) {
    return superop(Eigen::Vector3cd(a[0], a[1], a[2]).asDiagonal().toDenseMatrix());
  };
  for (int k = 0; k < 3; ++k) total = step(steps_->amplitude[k]) * total;
  total = superop(Eigen::Vector3cd(1.0, 1.0, -1.0).asDiagonal().toDenseMatrix()) * total;
  for (int k = 2; k >= 0; --k) total = step(steps_->amplitude[k]) * total;

  const Eigen::Vector3cd in(alpha[0], alpha[1], alpha[2]);
  const Eigen::Matrix3cd rho_in = in * in.adjoint();
  const Eigen::VectorXcd vec_out = total * Eigen::Map<const Eigen::VectorXcd>(rho_in.data(), 9);
  const Eigen::Map<const Eigen::Matrix3cd> rho_out(vec_out.data());
  const Eigen::Vector3cd target(alpha[0], alpha[1], -alpha[2]);
  const double oracle = (target.adjoint() * rho_out * target)(0, 0).real();

  EXPECT_NEAR(r.overlap, oracle, 1e-2);
  EXPECT_NEAR(r.overlap, oracle, 1e-12);
  EXPECT_NEAR(r.success_probability, rho_out.trace().real(), 1e-12);
  EXPECT_LT(r.overlap, 1.0);
  EXPECT_DOUBLE_EQ(r.duration_seconds, 2.0 * steps_->one_way_seconds);
}

}  // namespace
}  // namespace iontrans::protocol
