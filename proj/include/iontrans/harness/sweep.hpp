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

// Seeded sweeps over chain sizes and phase realizations.

#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "iontrans/harness/config.hpp"
#include "iontrans/protocol/gate.hpp"
#include "iontrans/protocol/joint.hpp"
#include "iontrans/protocol/step1.hpp"
#include "iontrans/protocol/step2.hpp"
#include "iontrans/protocol/step3.hpp"

namespace iontrans::harness {

struct SweepRow {
  int n_ions = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double leakage = std::numeric_limits<double>::quiet_NaN();
  /// Seconds.
  double duration = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;

  // Diagnostics.
  double max_norm_drift = 0.0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double hermiticity_defect = 0.0;
  /// Step fidelities of a joint run (F0, F1, F2); NaN otherwise.
  double f0 = std::numeric_limits<double>::quiet_NaN();
  double f1 = std::numeric_limits<double>::quiet_NaN();
  double f2 = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateRow {
  int n_ions = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  /// Successful realizations.
  int count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<AggregateRow> aggregate;

  std::vector<const SweepRow*> failures() const {
    std::vector<const SweepRow*> f;
    for (const auto& r : rows)
      if (!r.ok) f.push_back(&r);
    return f;
  }
};

namespace detail {

inline void copy_diagnostics(SweepRow& row, const dyn::Diagnostics& d, double hermiticity) {
  row.max_norm_drift = d.max_norm_drift;
  row.max_trace_drift = d.max_trace_drift;
  row.min_eigenvalue = std::isfinite(d.min_eigenvalue) ? d.min_eigenvalue : 0.0;
  row.hermiticity_defect = hermiticity;
}

inline void run_point(const RunConfig& cfg, SweepRow& row) {
  using namespace protocol;
  const ProtocolParams& p = cfg.params;
  const ChainSetup setup = make_chain_setup(p, row.n_ions, row.seed);
  switch (cfg.mode) {
    case Mode::step1_sweep:
    case Mode::two_photon: {
      const int n = cfg.mode == Mode::two_photon ? 2 : 1;
      const auto r = run_step1_retrieval(p, setup, {n, false});
      row.fidelity = r.fidelity;
      row.leakage = r.eta_loss;
      row.duration = r.duration / p.kappa_si();
      copy_diagnostics(row, r.diagnostics, r.hermiticity_defect);
      break;
    }
    case Mode::step2_sweep: {
      const auto r = run_step2(p, setup);
      row.fidelity = r.fidelity;
      row.leakage = r.leakage;
      row.duration = r.duration / p.omega_si();
      copy_diagnostics(row, r.diagnostics, r.hermiticity_defect);
      break;
    }
    case Mode::step3: {
      const auto r = run_step3(p, setup);
      row.fidelity = r.fidelity;
      row.leakage = r.channel.leakage;
      row.duration = r.duration / p.omega_si();
      copy_diagnostics(row, r.diagnostics, r.hermiticity_defect);
      break;
    }
    case Mode::joint: {
      const auto r = run_joint_protocol(p, setup);
      row.fidelity = r.fidelity;
      row.leakage = r.leakage;
      row.duration = r.duration_seconds;
      row.f0 = r.f0;
      row.f1 = r.f1;
      row.f2 = r.f2;
      copy_diagnostics(row, r.diagnostics, r.hermiticity_defect);
      break;
    }
    case Mode::gate: {
      const std::array<Complex, 3> alpha{cfg.alpha[0], cfg.alpha[1], cfg.alpha[2]};
      const auto r = run_photonic_phase_gate(p, setup, alpha);
      row.fidelity = r.overlap;
      row.leakage = 1.0 - r.success_probability;
      row.duration = r.duration_seconds;
      break;
    }
    case Mode::oracle_suite:
      throw ValidationError("mode", "oracle-suite is not a sweep");
  }
  row.ok = true;
}

}  // namespace detail

/// Mean and standard error per chain size over the successful rows.
inline std::vector<AggregateRow> aggregate(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  std::vector<AggregateRow> out;
  for (int n : cfg.n_ions) {
    AggregateRow a;
    a.n_ions = n;
    double sum = 0.0;
    for (const auto& r : rows)
      if (r.n_ions == n && r.ok) {
        sum += r.fidelity;
        ++a.count;
      }
    if (a.count == 0) {
      a.mean = std::numeric_limits<double>::quiet_NaN();
      a.stderr_ = std::numeric_limits<double>::quiet_NaN();
      out.push_back(a);
      continue;
    }
    a.mean = sum / a.count;
    double ss = 0.0;
    for (const auto& r : rows)
      if (r.n_ions == n && r.ok) ss += (r.fidelity - a.mean) * (r.fidelity - a.mean);
    a.stderr_ = a.count > 1 ? std::sqrt(ss / (a.count - 1) / a.count) : 0.0;
    out.push_back(a);
  }
  return out;
}

/// Runs every (N, realization) point on `cfg.workers` threads. Failing points
/// are recorded in their rows; the sweep continues.
inline SweepResult run_sweep(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.mode == Mode::oracle_suite) throw ValidationError("mode", "oracle-suite is not a sweep");
  SweepResult result;
  for (int n : cfg.n_ions)
    for (int r = 0; r < cfg.realizations; ++r) {
      SweepRow row;
      row.n_ions = n;
      row.realization = r;
      row.seed = protocol::derive_seed(cfg.seed, n, r);
      result.rows.push_back(row);
    }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < result.rows.size(); i = next++) {
      SweepRow& row = result.rows[i];
      try {
        detail::run_point(cfg, row);
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const int w = std::min<int>(cfg.workers, static_cast<int>(result.rows.size()));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  result.aggregate = aggregate(cfg, result.rows);
  return result;
}

}  // namespace iontrans::harness
