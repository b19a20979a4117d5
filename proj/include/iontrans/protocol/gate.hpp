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

// Two-photon phase gate alpha0|0> + alpha1|1> + alpha2|2> -> alpha0|0> + alpha1|1> - alpha2|2>.
// The photon is stored (the time reverse of retrieval), mapped down to the
// ions, hit with an ideal controlled phase on two neighbouring ions, and
// mapped back out. Every mapping is modelled by its number-diagonal transfer
// amplitudes; storage reuses the retrieval amplitudes.

#pragma once

#include <array>
#include <cmath>

#include "iontrans/protocol/step1.hpp"
#include "iontrans/protocol/step2.hpp"
#include "iontrans/protocol/step3.hpp"

namespace iontrans::protocol {

/// amplitude[s][n]: survival amplitude of the n-excitation component in
/// step s (0 = I, 1 = II, 2 = III).
struct GateStepAmplitudes {
  std::array<std::array<double, 3>, 3> amplitude{};
  /// Addressed ions i1 and i1 + 1.
  int first_ion = 0;
  /// Duration of one mapping (photon -> ions or back) in seconds.
  double one_way_seconds = 0.0;
};

struct GateReport {
  std::array<Complex, 3> input{};
  std::array<Complex, 3> target{};
  /// Unnormalised photonic output; the missing norm is loss.
  std::array<Complex, 3> output{};
  double success_probability = 0.0;
  /// |<target|output>|^2
  double overlap = 0.0;
  /// Storage plus retrieval, the internal gate excluded.
  double duration_seconds = 0.0;
  GateStepAmplitudes steps;
};

inline GateStepAmplitudes gate_step_amplitudes(const ProtocolParams& p, const ChainSetup& setup) {
  if (setup.n_ions < 2) throw ValidationError("n_ions", "the gate needs two ions");
  GateStepAmplitudes g;
  g.first_ion = resolve_addressed_ion(p, setup, -1);
  if (g.first_ion + 1 >= setup.n_ions) g.first_ion -= 1;

  const auto r1 = run_step1_retrieval(p, setup, {1, true});
  const auto r1b = run_step1_retrieval(p, setup, {2, true});
  g.amplitude[0] = {1.0, std::sqrt(r1.eta_coherent), std::sqrt(r1b.eta_coherent)};

  const auto r2 = run_step2(p, setup, {1, false});
  const auto r2b = run_step2(p, setup, {2, false});
  g.amplitude[1] = {r2.vacuum_amplitude, r2.transfer_amplitude, r2b.transfer_amplitude};

  // The two addressed ions are transferred one after the other; each pulse is
  // treated as the single-ion transfer from the vacuum.
  const auto a = run_step3(p, setup, g.first_ion);
  const auto b = run_step3(p, setup, g.first_ion + 1);
  g.amplitude[2] = {a.vacuum_amplitude * b.vacuum_amplitude, a.transfer_amplitude,
                    a.transfer_amplitude * b.transfer_amplitude};
  g.one_way_seconds = (a.duration + b.duration + r2b.duration) / p.omega_si() + r1b.duration / p.kappa_si();
  return g;
}

inline void check_gate_input(const std::array<Complex, 3>& alpha) {
  const double norm = std::norm(alpha[0]) + std::norm(alpha[1]) + std::norm(alpha[2]);
  if (std::abs(norm - 1.0) > 1e-9) throw ValidationError("alpha", "input amplitudes must be normalised");
}

inline GateReport run_photonic_phase_gate(const GateStepAmplitudes& steps, const std::array<Complex, 3>& alpha) {
  check_gate_input(alpha);
  GateReport r;
  r.input = alpha;
  r.steps = steps;
  r.duration_seconds = 2.0 * steps.one_way_seconds;
  r.target = {alpha[0], alpha[1], -alpha[2]};
  Complex dot = 0.0;
  for (int n = 0; n < 3; ++n) {
    double t = 1.0;
    for (const auto& s : steps.amplitude) t *= s[n] * s[n];
    r.output[n] = (n == 2 ? -1.0 : 1.0) * t * alpha[n];
    r.success_probability += std::norm(r.output[n]);
    dot += std::conj(r.target[n]) * r.output[n];
  }
  r.overlap = std::norm(dot);
  return r;
}

inline GateReport run_photonic_phase_gate(const ProtocolParams& p, const ChainSetup& setup,
                                          const std::array<Complex, 3>& alpha) {
  p.validate();
  check_gate_input(alpha);
  return run_photonic_phase_gate(gate_step_amplitudes(p, setup), alpha);
}

}  // namespace iontrans::protocol
