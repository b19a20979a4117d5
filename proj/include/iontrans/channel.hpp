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

// Logical-subspace channels. A channel on a d-dimensional logical space is
// stored through its action on matrix units: block(x, y) = P E(|x><y|) P,
// expressed in the output logical basis. Population that leaves the output
// subspace is reported as leakage.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "iontrans/common.hpp"

namespace iontrans::dyn {

struct ChannelEstimate {
  int dim = 2;
  /// blocks[x * dim + y] = P E(|x><y|) P  (dim x dim)
  std::vector<Eigen::MatrixXcd> blocks;
  /// 1 - average trace of P E(|x><x|) P over basis inputs.
  double leakage = 0.0;
  bool leakage_warning = false;

  const Eigen::MatrixXcd& block(int x, int y) const { return blocks.at(static_cast<std::size_t>(x * dim + y)); }
  Eigen::MatrixXcd& block(int x, int y) { return blocks.at(static_cast<std::size_t>(x * dim + y)); }

  void finalize() {
    double kept = 0.0;
    for (int x = 0; x < dim; ++x) kept += block(x, x).trace().real();
    leakage = std::clamp(1.0 - kept / dim, 0.0, 1.0);
    leakage_warning = leakage > 0.5;
  }

  /// Identity-sized channel from Kraus-like output amplitudes: for a pure map
  /// |x> -> |u_x> + (leaked part), block(x, y) = |u_x><u_y|.
  static ChannelEstimate from_amplitudes(const std::vector<Eigen::VectorXcd>& outputs) {
    ChannelEstimate c;
    c.dim = static_cast<int>(outputs.size());
    for (int x = 0; x < c.dim; ++x)
      for (int y = 0; y < c.dim; ++y) c.blocks.push_back(outputs[x] * outputs[y].adjoint());
    c.finalize();
    return c;
  }

  static ChannelEstimate from_blocks(int d, std::vector<Eigen::MatrixXcd> blocks) {
    if (static_cast<int>(blocks.size()) != d * d) throw ValidationError("blocks", "need d*d blocks");
    ChannelEstimate c;
    c.dim = d;
    c.blocks = std::move(blocks);
    c.finalize();
    return c;
  }
};

/// Reconstructs a qubit channel from outputs for |0>, |1>, |+> and |+i> inputs,
/// using |0><1| = P+ + i P+i - (1+i)/2 (P0 + P1).
inline ChannelEstimate reconstruct_channel(const Eigen::MatrixXcd& out0, const Eigen::MatrixXcd& out1,
                                           const Eigen::MatrixXcd& out_plus, const Eigen::MatrixXcd& out_plus_i) {
  const Eigen::MatrixXcd e01 = out_plus + kI * out_plus_i - Complex(0.5, 0.5) * (out0 + out1);
  return ChannelEstimate::from_blocks(2, {out0, e01, e01.adjoint(), out1});
}

/// Superoperator on column-stacked d x d matrices.
inline Eigen::MatrixXcd liouville(const ChannelEstimate& c) {
  const int d = c.dim;
  Eigen::MatrixXcd s(d * d, d * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) s.col(x + d * y) = Eigen::Map<const Eigen::VectorXcd>(c.block(x, y).data(), d * d);
  return s;
}

inline ChannelEstimate from_liouville(const Eigen::MatrixXcd& s, int d) {
  std::vector<Eigen::MatrixXcd> blocks;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) blocks.push_back(Eigen::Map<const Eigen::MatrixXcd>(s.col(x + d * y).data(), d, d));
  return ChannelEstimate::from_blocks(d, std::move(blocks));
}

/// Channel `second` applied after `first`.
inline ChannelEstimate compose(const ChannelEstimate& second, const ChannelEstimate& first) {
  if (second.dim != first.dim) throw ValidationError("dim", "channel dimensions differ");
  return from_liouville(liouville(second) * liouville(first), first.dim);
}

/// Uniform pure-state average of <psi| V^+ E(|psi><psi|) V |psi> over the
/// logical space, using the Haar fourth moment
///   F = (sum_xy (V^+ E_xy V)_xy + sum_x tr E_xx) / (d (d + 1)).
inline double average_channel_fidelity(const ChannelEstimate& c, const Eigen::MatrixXcd& target) {
  const int d = c.dim;
  if (target.rows() != d || target.cols() != d) throw ValidationError("target", "dimension mismatch");
  double a = 0.0;
  double b = 0.0;
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) a += (target.adjoint() * c.block(x, y) * target)(x, y).real();
    b += c.block(x, x).trace().real();
  }
  return std::clamp((a + b) / (d * (d + 1.0)), 0.0, 1.0);
}

inline double average_channel_fidelity(const ChannelEstimate& c) {
  return average_channel_fidelity(c, Eigen::MatrixXcd::Identity(c.dim, c.dim));
}

struct PhaseCorrectedFidelity {
  double fidelity = 0.0;
  /// Relative phase theta of the target V diag(1, e^{i theta}).
  double phase = 0.0;
};

/// Qubit fidelity maximised over a relative phase of the target basis, i.e.
/// up to a known local Z rotation of the output.
inline PhaseCorrectedFidelity phase_corrected_fidelity(const ChannelEstimate& c, const Eigen::MatrixXcd& target) {
  if (c.dim != 2) throw ValidationError("dim", "phase correction is implemented for qubits");
  const Eigen::MatrixXcd m00 = target.adjoint() * c.block(0, 0) * target;
  const Eigen::MatrixXcd m11 = target.adjoint() * c.block(1, 1) * target;
  const Eigen::MatrixXcd m01 = target.adjoint() * c.block(0, 1) * target;
  const Complex a01 = m01(0, 1);
  const double a = m00(0, 0).real() + m11(1, 1).real() + 2.0 * std::abs(a01);
  const double b = m00.trace().real() + m11.trace().real();
  // With V diag(1, e^{i theta}) the cross term becomes 2 Re(a01 e^{i theta}).
  return {std::clamp((a + b) / 6.0, 0.0, 1.0), -std::arg(a01)};
}

inline PhaseCorrectedFidelity phase_corrected_fidelity(const ChannelEstimate& c) {
  return phase_corrected_fidelity(c, Eigen::MatrixXcd::Identity(2, 2));
}

/// The channel followed by the relative phase correction diag(1, e^{-i theta}).
inline ChannelEstimate apply_phase_correction(const ChannelEstimate& c, double theta) {
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Identity(c.dim, c.dim);
  z(1, 1) = std::polar(1.0, -theta);
  std::vector<Eigen::MatrixXcd> blocks;
  for (const auto& b : c.blocks) blocks.push_back(z * b * z.adjoint());
  return ChannelEstimate::from_blocks(c.dim, std::move(blocks));
}

/// Smallest eigenvalue of the Choi matrix sum_xy |x><y| (x) E(|x><y|),
/// negative values indicate a reconstruction that is not completely positive.
inline double choi_min_eigenvalue(const ChannelEstimate& c) {
  const int d = c.dim;
  Eigen::MatrixXcd choi(d * d, d * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) choi.block(x * d, y * d, d, d) = c.block(x, y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (choi + choi.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace iontrans::dyn
