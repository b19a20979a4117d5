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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "iontrans/protocol/joint.hpp"
#include "iontrans/protocol/step1.hpp"
#include "iontrans/protocol/step2.hpp"
#include "iontrans/protocol/step3.hpp"
#include "iontrans/validation/oracle_suite.hpp"

namespace {

using namespace iontrans;
using namespace iontrans::protocol;

constexpr std::uint64_t kBaseSeed = 1;

struct Conservation {
  double norm_drift = 0.0;
  double trace_drift = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double hermiticity = 0.0;
  int runs = 0;

  void add(const dyn::Diagnostics& d, double herm) {
    norm_drift = std::max(norm_drift, d.max_norm_drift);
    trace_drift = std::max(trace_drift, d.max_trace_drift);
    min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
    hermiticity = std::max({hermiticity, herm, d.max_hermiticity_defect});
    ++runs;
  }
  void add(const JointReport& r) {
    add(r.step3.diagnostics, r.step3.hermiticity_defect);
    add(r.step2.diagnostics, r.step2.hermiticity_defect);
    add(r.step1.diagnostics, r.step1.hermiticity_defect);
  }
};

struct MeanErr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanErr mean_err(const std::vector<double>& v) {
  MeanErr m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
  std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main() {
  const ProtocolParams p;
  Conservation cons;

  // 1. Step III at N = 20, mid-chain ion with |sin| >= 0.5, calibrated offset.
  {
    Timer t;
    const auto setup = make_chain_setup(p, 20, derive_seed(kBaseSeed, 20, 0));
    const int ion = central_ion_above(setup, 0.5);
    bool pass = ion >= 0;
    std::string detail = "no ion with |sin(kz)| >= 0.5";
    if (pass) {
      const auto r = run_step3(p, setup, ion);
      cons.add(r.diagnostics, r.hermiticity_defect);
      pass = r.fidelity > 0.99 && t.seconds() < 300.0;
      detail = fmt("F0 = %.6f at ion %d, |sin| = %.3f, offset %.3e (need > 0.99, < 300 s)", r.fidelity, ion,
                   std::abs(setup.quad.sideband[ion]), r.detuning_offset);
    }
    report(1, "step-III fidelity", pass, detail, t.seconds());
  }

  // 2. Joint fidelity at N = 18 over 20 phase realizations.
  {
    Timer t;
    std::vector<double> f;
    int consistent = 0;
    for (int r = 0; r < 20; ++r) {
      const auto j = run_joint_protocol(p, make_chain_setup(p, 18, derive_seed(kBaseSeed, 18, r)));
      cons.add(j);
      f.push_back(j.fidelity);
      consistent += j.composition_consistent ? 1 : 0;
    }
    const auto m = mean_err(f);
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    const bool pass = m.mean >= 0.96 && m.mean <= 1.00 && consistent == 20;
    report(2, "joint fidelity", pass,
           fmt("mean F = %.5f +- %.5f over 20 realizations, range [%.5f, %.5f], %d/20 consistent (need 0.98 +- 0.02)",
               m.mean, m.stderr_, *lo, *hi, consistent),
           t.seconds());
  }

  // 3. Two-excitation retrieval at N = 12, evaluated at the antinode; the
  // random-phase ensemble is printed alongside.
  {
    Timer t;
    ProtocolParams q = p;
    q.phase_mode = PhaseMode::antinode;
    const auto a = run_multi_excitation_retrieval(q, make_chain_setup(q, 12, 0), 2);
    cons.add(a.diagnostics, a.hermiticity_defect);
    std::vector<double> random;
    for (int r = 0; r < 10; ++r) {
      const auto s = run_multi_excitation_retrieval(p, make_chain_setup(p, 12, derive_seed(kBaseSeed, 12, r)), 2);
      cons.add(s.diagnostics, s.hermiticity_defect);
      random.push_back(s.fidelity);
    }
    const auto m = mean_err(random);
    const bool pass = a.fidelity >= 0.95 && a.fidelity <= 0.99;
    report(3, "two-excitation retrieval", pass,
           fmt("F2 = %.5f at antinode (need 0.97 +- 0.02); random phases %.5f +- %.5f over 10", a.fidelity, m.mean,
               m.stderr_),
           t.seconds());
  }

  // 4. Single-excitation F2(N) ensemble mean nondecreasing within 1 stderr.
  {
    Timer t;
    const std::vector<int> ns{4, 8, 12, 16, 20, 24};
    std::vector<MeanErr> means;
    std::string detail;
    for (int n : ns) {
      std::vector<double> f;
      for (int r = 0; r < 10; ++r) {
        const auto s = run_step1_retrieval(p, make_chain_setup(p, n, derive_seed(kBaseSeed, n, r)), {1, false});
        cons.add(s.diagnostics, s.hermiticity_defect);
        f.push_back(s.fidelity);
      }
      means.push_back(mean_err(f));
      detail += fmt("%sN=%d %.4f+-%.4f", detail.empty() ? "" : ", ", n, means.back().mean, means.back().stderr_);
    }
    bool pass = true;
    for (std::size_t k = 1; k < means.size(); ++k) {
      const double se = std::hypot(means[k].stderr_, means[k - 1].stderr_);
      if (means[k].mean < means[k - 1].mean - se) pass = false;
    }
    report(4, "F2 trend in N", pass, detail, t.seconds());
  }

  // 5, 8: reference joint run at N = 20.
  Timer t20;
  const auto setup20 = make_chain_setup(p, 20, derive_seed(kBaseSeed, 20, 0));
  const auto base20 = run_joint_protocol(p, setup20);
  cons.add(base20);
  const double base20_seconds = t20.seconds();

  {
    const double ms = base20.duration_seconds * 1e3;
    const bool pass = ms >= 2.3 / 2.0 && ms <= 2.3 * 2.0;
    report(5, "schedule duration", pass,
           fmt("%.3f ms at omega/2pi = %.3g MHz (III %.3f, II %.3f, I %.3f ms; need 1.15 to 4.6 ms)", ms,
               p.omega_si() / (2.0 * kPi) * 1e-6, base20.duration_step3 / p.omega_si() * 1e3,
               base20.duration_step2 / p.omega_si() * 1e3, base20.duration_step1 / p.kappa_si() * 1e3),
           base20_seconds);
  }

  // 6. Oracle suite.
  {
    Timer t;
    const auto results = validation::run_oracle_suite();
    int passed = 0;
    std::string failed;
    for (const auto& r : results) {
      if (r.pass) {
        ++passed;
      } else {
        failed += fmt(" %s(err %.3e > %.1e)", r.name.c_str(), r.error, r.tolerance);
      }
    }
    const bool pass = passed == static_cast<int>(results.size());
    report(6, "oracle suite", pass,
           fmt("%d/%zu oracles within tolerance%s", passed, results.size(), failed.empty() ? "" : ";") + failed,
           t.seconds());
  }

  // 8. Convergence at N = 20.
  Conservation conv_cons;
  {
    Timer t;
    const auto cut = run_step2(p, setup20, {1, true});
    conv_cons.add(cut.diagnostics, cut.hermiticity_defect);
    const double d_cut = cut.cutoff_delta.value_or(1.0);

    ProtocolParams w = p;
    w.window_extension = 0.05;
    const auto wide = run_step2(w, setup20);
    conv_cons.add(wide.diagnostics, wide.hermiticity_defect);
    const double d_window = std::abs(wide.fidelity - base20.f1);

    ProtocolParams h = p;
    h.tol = 0.5 * p.tol;
    h.lindblad_tol = 0.5 * p.lindblad_tol;
    const auto half = run_joint_protocol(h, setup20);
    conv_cons.add(half);
    const double d_tol = std::max({std::abs(half.f0 - base20.f0), std::abs(half.f1 - base20.f1),
                                   std::abs(half.f2 - base20.f2), std::abs(half.fidelity - base20.fidelity)});

    const bool pass = d_cut < 1e-3 && d_window < 1e-3 && d_tol < 1e-4;
    report(8, "convergence", pass,
           fmt("dF1 total cap and phonon cutoffs +1: %.2e, window +10%%: %.2e (need < 1e-3); "
               "tolerance halving max dF: %.2e (need < 1e-4)",
               d_cut, d_window, d_tol),
           t.seconds());
  }

  // 7. Conservation over every run above.
  {
    cons.runs += conv_cons.runs;
    cons.norm_drift = std::max(cons.norm_drift, conv_cons.norm_drift);
    cons.trace_drift = std::max(cons.trace_drift, conv_cons.trace_drift);
    cons.min_eigenvalue = std::min(cons.min_eigenvalue, conv_cons.min_eigenvalue);
    cons.hermiticity = std::max(cons.hermiticity, conv_cons.hermiticity);
    const bool pass = cons.norm_drift < 1e-8 && cons.trace_drift < 1e-8 && cons.min_eigenvalue >= -1e-8 &&
                      cons.hermiticity < 1e-15;
    report(7, "conservation", pass,
           fmt("%d evolutions: norm drift %.2e, trace drift %.2e, min eigenvalue %.2e, Hermiticity %.2e", cons.runs,
               cons.norm_drift, cons.trace_drift, cons.min_eigenvalue, cons.hermiticity),
           0.0);
  }

  std::printf("%s\n", failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures).c_str());
  return failures == 0 ? 0 : 1;
}
