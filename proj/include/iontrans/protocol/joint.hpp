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

// Ion -> phonon -> spin wave -> photon on one logical qubit. Each step is
// simulated on its own and contributes a qubit channel; the channels are
// composed in retrieval order (III, II, I).

#pragma once

#include <algorithm>
#include <exception>
#include <string>
#include <utility>

#include "iontrans/channel.hpp"
#include "iontrans/protocol/params.hpp"
#include "iontrans/protocol/step1.hpp"
#include "iontrans/protocol/step2.hpp"
#include "iontrans/protocol/step3.hpp"

namespace iontrans::protocol {

struct JointReport {
  ProtocolParams params;
  int n_ions = 0;
  std::uint64_t seed = 0;

  double f0 = 0.0;  // step III transfer fidelity
  double f1 = 0.0;  // step II channel fidelity
  double f2 = 0.0;  // step I, 1 - 2 Gamma int <e>
  /// Phase-corrected average fidelities of the per-step channels.
  double channel_fidelity_step3 = 0.0;
  double channel_fidelity_step2 = 0.0;
  double channel_fidelity_step1 = 0.0;
  double fidelity = 0.0;
  double leakage = 0.0;
  /// Composed fidelity does not exceed the weakest step by more than 1e-6.
  bool composition_consistent = true;

  /// Step durations in their own units (omega for II and III, kappa for I).
  double duration_step3 = 0.0;
  double duration_step2 = 0.0;
  double duration_step1 = 0.0;
  /// Total duration in seconds.
  double duration_seconds = 0.0;

  Step3Report step3;
  Step2Report step2;
  Step1Report step1;
  dyn::Diagnostics diagnostics;
  double hermiticity_defect = 0.0;
};

/// Qubit channel of the retrieval: |1> survives with amplitude sqrt(eta_coherent),
/// everything else leaves the logical space.
inline dyn::ChannelEstimate step1_channel(double eta_coherent) {
  Eigen::VectorXcd u0 = Eigen::VectorXcd::Zero(2);
  Eigen::VectorXcd u1 = Eigen::VectorXcd::Zero(2);
  u0[0] = 1.0;
  u1[1] = std::sqrt(std::clamp(eta_coherent, 0.0, 1.0));
  return dyn::ChannelEstimate::from_amplitudes({u0, u1});
}

inline double total_duration_seconds(const ProtocolParams& p, double t3, double t2, double t1) {
  return (t3 + t2) / p.omega_si() + t1 / p.kappa_si();
}

/// Failure inside one step of the joint protocol; the original error is
/// nested (std::rethrow_if_nested).
class StepError : public Error {
 public:
  StepError(std::string step, const std::string& what) : Error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

namespace detail {

template <class F>
auto tagged(const char* step, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::throw_with_nested(StepError(step, e.what()));
  }
}

}  // namespace detail

inline JointReport run_joint_protocol(const ProtocolParams& p, const ChainSetup& setup) {
  p.validate();
  JointReport r;
  r.params = p;
  r.n_ions = setup.n_ions;
  r.seed = setup.seed;

  r.step3 = detail::tagged("step III", [&] { return run_step3(p, setup); });
  r.step2 = detail::tagged("step II", [&] { return run_step2(p, setup); });
  r.step1 = detail::tagged("step I", [&] { return run_step1_retrieval(p, setup, {1, true}); });

  r.f0 = r.step3.fidelity;
  r.f1 = r.step2.fidelity;
  r.f2 = r.step1.fidelity;

  const auto c3 = dyn::apply_phase_correction(r.step3.channel, r.step3.correction_phase);
  const auto c2 = dyn::apply_phase_correction(r.step2.channel, r.step2.correction_phase);
  const auto c1 = step1_channel(r.step1.eta_coherent);
  r.channel_fidelity_step3 = dyn::average_channel_fidelity(c3);
  r.channel_fidelity_step2 = dyn::average_channel_fidelity(c2);
  r.channel_fidelity_step1 = dyn::average_channel_fidelity(c1);

  const auto composed = dyn::compose(c1, dyn::compose(c2, c3));
  r.fidelity = dyn::average_channel_fidelity(composed);
  r.leakage = composed.leakage;
  const double weakest = std::min({r.channel_fidelity_step1, r.channel_fidelity_step2, r.channel_fidelity_step3});
  r.composition_consistent = r.fidelity <= weakest + 1e-6;

  r.duration_step3 = r.step3.duration;
  r.duration_step2 = r.step2.duration;
  r.duration_step1 = r.step1.duration;
  r.duration_seconds = total_duration_seconds(p, r.duration_step3, r.duration_step2, r.duration_step1);

  r.diagnostics = r.step2.diagnostics;
  detail::merge(r.diagnostics, r.step3.diagnostics);
  detail::merge(r.diagnostics, r.step1.diagnostics);
  r.hermiticity_defect =
      std::max({r.step1.hermiticity_defect, r.step2.hermiticity_defect, r.step3.hermiticity_defect});
  return r;
}

}  // namespace iontrans::protocol
