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

// Adaptive propagation of state vectors (Schroedinger equation) and density
// matrices (Lindblad master equation) under Hamiltonians of the form
//   H(t) = sum_k f_k(t) A_k.
//
// Stepping uses an embedded Runge-Kutta-Fehlberg 7(8) pair with error control
// on every component. Time integrals of observables ride along as extra
// components of the integrated state, so they share the stepper's order and
// error control. State propagation can run in the interaction picture of a
// constant diagonal "frame" D: the stepper then integrates
//   phi = exp(iDt) psi,  i dphi/dt = exp(iDt) (H - D) exp(-iDt) phi,
// which removes the large, exactly known phases from the error budget.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

#include "iontrans/statespace.hpp"

namespace iontrans::dyn {

using space::SparseOperator;

namespace detail {

/// y += alpha * M x for a row-major sparse matrix.
template <class Scalar>
inline void csr_axpy(const SparseOperator::Matrix& m, Scalar alpha, const Complex* x, Complex* y) {
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const auto* val = m.valuePtr();
  const auto rows = m.outerSize();
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    Complex acc = 0.0;
    for (auto k = outer[r]; k < outer[r + 1]; ++k) acc += val[k] * x[inner[k]];
    y[r] += alpha * acc;
  }
}

}  // namespace detail

class ParametricHamiltonian {
 public:
  using Coefficient = std::function<double(double)>;

  explicit ParametricHamiltonian(std::size_t dim) : dim_(dim) {}

  /// Adds f(t) * op; a missing coefficient means f = 1.
  void add(const SparseOperator& op, Coefficient coefficient = {}) {
    op.check_dim(dim_);
    if (!coefficient) {
      if (static_.rows() == 0) {
        static_ = op.matrix();
      } else {
        static_ = SparseOperator::Matrix(static_ + op.matrix());
      }
      static_.makeCompressed();
    } else {
      dynamic_.push_back({op.matrix(), std::move(coefficient)});
    }
  }

  std::size_t dimension() const { return dim_; }

  /// H(t) materialised as a sparse operator.
  SparseOperator at(double t) const {
    const double tt = map_time(t);
    SparseOperator::Matrix m(static_cast<std::ptrdiff_t>(dim_), static_cast<std::ptrdiff_t>(dim_));
    if (static_.rows() != 0) m = static_;
    for (const auto& [op, f] : dynamic_) m = SparseOperator::Matrix(m + f(tt) * op);
    return SparseOperator(SparseOperator::Matrix(sign_ * m));
  }

  /// out = H(t) in
  void apply(double t, const Complex* in, Complex* out) const {
    std::fill(out, out + dim_, Complex(0.0));
    const double tt = map_time(t);
    if (static_.rows() != 0) detail::csr_axpy(static_, sign_, in, out);
    for (const auto& [op, f] : dynamic_) {
      const double c = f(tt);
      if (c != 0.0) detail::csr_axpy(op, sign_ * c, in, out);
    }
  }

  /// -H(T - t): propagating with it undoes propagation with H over [0, T].
  ParametricHamiltonian time_reversed(double total_time) const {
    ParametricHamiltonian r = *this;
    r.sign_ = -sign_;
    r.reverse_total_ = reverse_total_ ? std::nullopt : std::optional<double>(total_time);
    return r;
  }

 private:
  double map_time(double t) const { return reverse_total_ ? *reverse_total_ - t : t; }

  std::size_t dim_;
  SparseOperator::Matrix static_;
  std::vector<std::pair<SparseOperator::Matrix, Coefficient>> dynamic_;
  double sign_ = 1.0;
  std::optional<double> reverse_total_;
};

struct EvolveOptions {
  double tol = 1e-10;
  /// Constant diagonal reference energies for the interaction picture; empty = none.
  Eigen::VectorXd frame;
  /// Observables whose expectation values are integrated over time.
  std::vector<SparseOperator> accumulate;
  /// Skip norm bookkeeping for non-Hermitian (e.g. no-jump) Hamiltonians.
  bool hermitian = true;
  /// Eigen-decompose densities at every sample to track the minimum eigenvalue.
  bool check_positivity = true;
  double initial_step = 0.0;
};

struct Diagnostics {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double max_norm_drift = 0.0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double max_hermiticity_defect = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<DensityMatrix> densities;
  /// accumulators[k][j]: integral of observable j from the first sample to times[k].
  std::vector<Eigen::VectorXd> accumulators;
  Diagnostics diagnostics;
};

namespace detail {

using OdeState = std::vector<Complex>;
using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<OdeState>;
using Controlled = boost::numeric::odeint::controlled_runge_kutta<Stepper>;

/// Error control on the state only: |err_i| <= tol (1 + |x_i|).
inline Controlled make_stepper(double tol) {
  namespace odeint = boost::numeric::odeint;
  using Checker = odeint::default_error_checker<double, odeint::range_algebra, odeint::default_operations>;
  return Controlled(Checker(tol, tol, 1.0, 0.0));
}

/// Adaptive stepping loop shared by both propagators.
template <class System>
void integrate_to(System& sys, Controlled& stepper, OdeState& x, double& t, double& dt, double t_end,
                  Diagnostics& diag) {
  namespace odeint = boost::numeric::odeint;
  const double span = std::max(std::abs(t_end), 1.0);
  int consecutive_failures = 0;
  while (t < t_end) {
    const double proposed = dt;
    const bool truncated = t + dt >= t_end;
    if (truncated) dt = t_end - t;
    const double before = t;
    const auto result = stepper.try_step(std::ref(sys), x, t, dt);
    if (result == odeint::success) {
      ++diag.steps;
      consecutive_failures = 0;
      if (truncated) {
        t = t_end;
        dt = std::max(dt, proposed);
      }
    } else {
      ++diag.rejected;
      if (++consecutive_failures > 500 || dt < 1e-14 * span)
        throw StiffnessError("step size underflow", before);
    }
  }
}

}  // namespace detail

/// Propagates a state vector; can be advanced repeatedly.
class StatePropagator {
 public:
  StatePropagator(const ParametricHamiltonian& h, const StateVector& psi0, double t0, EvolveOptions opt = {})
      : h_(h), opt_(std::move(opt)), t_(t0), dim_(h.dimension()) {
    if (static_cast<std::size_t>(psi0.size()) != dim_) throw ValidationError("psi0", "dimension mismatch");
    if (!(opt_.tol > 0)) throw ValidationError("tol", "must be positive");
    if (opt_.frame.size() != 0 && static_cast<std::size_t>(opt_.frame.size()) != dim_)
      throw ValidationError("frame", "dimension mismatch");
    for (const auto& o : opt_.accumulate) o.check_dim(dim_);
    norm0_ = psi0.squaredNorm();
    setup_frame();
    x_.assign(dim_ + opt_.accumulate.size(), Complex(0.0));
    for (std::size_t a = 0; a < dim_; ++a) x_[a] = psi0[static_cast<Eigen::Index>(a)];
    // phi(t0) = exp(i D t0) psi(t0)
    if (has_frame_) {
      compute_phases(t0);
      for (std::size_t a = 0; a < dim_; ++a) x_[a] *= std::conj(phase_[index_[a]]);
    }
    u_.resize(dim_);
    w_.resize(dim_);
    dt_ = opt_.initial_step > 0 ? opt_.initial_step : 1e-3;
  }

  void advance_to(double t_end) {
    if (t_end < t_) throw ValidationError("t", "cannot advance backwards");
    auto sys = [this](const detail::OdeState& x, detail::OdeState& dxdt, double t) { rhs(x, dxdt, t); };
    detail::integrate_to(sys, stepper_, x_, t_, dt_, t_end, diag_);
    if (opt_.hermitian) diag_.max_norm_drift = std::max(diag_.max_norm_drift, std::abs(state().squaredNorm() - norm0_));
  }

  double time() const { return t_; }

  /// Schroedinger-picture state at the current time.
  StateVector state() const {
    StateVector psi(static_cast<Eigen::Index>(dim_));
    if (has_frame_) compute_phases(t_);
    for (std::size_t a = 0; a < dim_; ++a)
      psi[static_cast<Eigen::Index>(a)] = has_frame_ ? phase_[index_[a]] * x_[a] : x_[a];
    return psi;
  }

  Eigen::VectorXd accumulators() const {
    Eigen::VectorXd acc(static_cast<Eigen::Index>(opt_.accumulate.size()));
    for (std::size_t j = 0; j < opt_.accumulate.size(); ++j) acc[static_cast<Eigen::Index>(j)] = x_[dim_ + j].real();
    return acc;
  }

  const Diagnostics& diagnostics() const { return diag_; }

 private:
  void setup_frame() {
    has_frame_ = opt_.frame.size() != 0;
    if (!has_frame_) return;
    energies_.assign(opt_.frame.data(), opt_.frame.data() + opt_.frame.size());
    std::sort(energies_.begin(), energies_.end());
    energies_.erase(std::unique(energies_.begin(), energies_.end()), energies_.end());
    index_.resize(dim_);
    for (std::size_t a = 0; a < dim_; ++a)
      index_[a] = static_cast<std::size_t>(
          std::lower_bound(energies_.begin(), energies_.end(), opt_.frame[static_cast<Eigen::Index>(a)]) -
          energies_.begin());
    phase_.resize(energies_.size());
  }

  /// phase_[u] = exp(-i E_u t)
  void compute_phases(double t) const {
    for (std::size_t u = 0; u < energies_.size(); ++u) phase_[u] = std::polar(1.0, -energies_[u] * t);
  }

  void rhs(const detail::OdeState& x, detail::OdeState& dxdt, double t) {
    ++diag_.rhs_evaluations;
    const Complex* psi = x.data();
    if (has_frame_) {
      compute_phases(t);
      for (std::size_t a = 0; a < dim_; ++a) u_[a] = phase_[index_[a]] * x[a];
      psi = u_.data();
    }
    h_.apply(t, psi, w_.data());
    if (has_frame_) {
      for (std::size_t a = 0; a < dim_; ++a) {
        const Complex hw = w_[a] - opt_.frame[static_cast<Eigen::Index>(a)] * u_[a];
        dxdt[a] = -kI * std::conj(phase_[index_[a]]) * hw;
      }
    } else {
      for (std::size_t a = 0; a < dim_; ++a) dxdt[a] = -kI * w_[a];
    }
    for (std::size_t j = 0; j < opt_.accumulate.size(); ++j) {
      // <psi|O|psi> in the Schroedinger picture
      std::fill(w_.begin(), w_.end(), Complex(0.0));
      detail::csr_axpy(opt_.accumulate[j].matrix(), 1.0, psi, w_.data());
      Complex acc = 0.0;
      for (std::size_t a = 0; a < dim_; ++a) acc += std::conj(psi[a]) * w_[a];
      dxdt[dim_ + j] = Complex(acc.real(), 0.0);
    }
  }

  ParametricHamiltonian h_;
  EvolveOptions opt_;
  double t_;
  double dt_;
  std::size_t dim_;
  double norm0_ = 1.0;
  detail::OdeState x_;
  detail::Controlled stepper_ = detail::make_stepper(opt_.tol);
  bool has_frame_ = false;
  std::vector<double> energies_;
  std::vector<std::size_t> index_;
  mutable std::vector<Complex> phase_;
  std::vector<Complex> u_;
  std::vector<Complex> w_;
  Diagnostics diag_;
};

inline void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("grid", "must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] >= grid[i - 1])) throw ValidationError("grid", "must be non-decreasing");
}

/// Solves i dpsi/dt = H(t) psi and records the state at every grid time.
inline Trajectory evolve_state(const ParametricHamiltonian& h, const StateVector& psi0, std::span<const double> grid,
                               const EvolveOptions& opt = {}) {
  check_grid(grid);
  StatePropagator prop(h, psi0, grid.front(), opt);
  Trajectory traj;
  for (double t : grid) {
    prop.advance_to(t);
    traj.times.push_back(t);
    traj.states.push_back(prop.state());
    traj.accumulators.push_back(prop.accumulators());
  }
  traj.diagnostics = prop.diagnostics();
  return traj;
}

struct JumpOperator {
  SparseOperator op;
  double rate = 0.0;
  /// false keeps only the loss (anticommutator) part: the trace then tracks
  /// the probability that this channel never fired.
  bool recycle = true;
};

/// Propagates a density matrix under the Lindblad equation
///   drho/dt = -i[H, rho] + sum_k rate_k (L_k rho L_k^+ - {L_k^+ L_k, rho}/2).
class DensityPropagator {
 public:
  DensityPropagator(const ParametricHamiltonian& h, std::vector<JumpOperator> jumps, const DensityMatrix& rho0,
                    double t0, EvolveOptions opt = {})
      : h_(h), jumps_(std::move(jumps)), opt_(std::move(opt)), t_(t0), dim_(h.dimension()) {
    if (static_cast<std::size_t>(rho0.rows()) != dim_ || rho0.rows() != rho0.cols())
      throw ValidationError("rho0", "dimension mismatch");
    if (!(opt_.tol > 0)) throw ValidationError("tol", "must be positive");
    if (opt_.frame.size() != 0) throw ValidationError("frame", "not supported for density propagation");
    for (const auto& j : jumps_) {
      j.op.check_dim(dim_);
      if (j.rate < 0 || !std::isfinite(j.rate)) throw ValidationError("rate", "jump rates must be non-negative");
    }
    for (const auto& o : opt_.accumulate) o.check_dim(dim_);

    SparseOperator::Matrix loss(static_cast<std::ptrdiff_t>(dim_), static_cast<std::ptrdiff_t>(dim_));
    for (const auto& j : jumps_) {
      if (j.rate == 0.0) continue;
      loss = SparseOperator::Matrix(loss + j.rate * SparseOperator::Matrix(j.op.matrix().adjoint() * j.op.matrix()));
    }
    half_loss_ = SparseOperator::Matrix(Complex(0.0, -0.5) * loss);
    half_loss_.makeCompressed();
    for (const auto& j : jumps_)
      if (j.recycle && j.rate > 0) recycled_.push_back({j.op.entries(), j.rate});

    const std::size_t n = dim_ * dim_;
    x_.assign(n + opt_.accumulate.size(), Complex(0.0));
    std::copy(rho0.data(), rho0.data() + n, x_.begin());
    trace0_ = rho0.trace().real();
    hbuf_.resize(dim_);
    dt_ = opt_.initial_step > 0 ? opt_.initial_step : 1e-3;
    record(rho0);
  }

  void advance_to(double t_end) {
    if (t_end < t_) throw ValidationError("t", "cannot advance backwards");
    auto sys = [this](const detail::OdeState& x, detail::OdeState& dxdt, double t) { rhs(x, dxdt, t); };
    detail::integrate_to(sys, stepper_, x_, t_, dt_, t_end, diag_);
    record(density());
  }

  double time() const { return t_; }

  DensityMatrix density() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    return Eigen::Map<const DensityMatrix>(x_.data(), d, d);
  }

  Eigen::VectorXd accumulators() const {
    Eigen::VectorXd acc(static_cast<Eigen::Index>(opt_.accumulate.size()));
    const std::size_t n = dim_ * dim_;
    for (std::size_t j = 0; j < opt_.accumulate.size(); ++j) acc[static_cast<Eigen::Index>(j)] = x_[n + j].real();
    return acc;
  }

  const Diagnostics& diagnostics() const { return diag_; }

 private:
  void record(const DensityMatrix& rho) {
    diag_.max_hermiticity_defect = std::max(diag_.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (!opt_.hermitian) return;
    diag_.max_trace_drift = std::max(diag_.max_trace_drift, std::abs(rho.trace().real() - trace0_));
    if (opt_.check_positivity) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
      diag_.min_eigenvalue = std::min(diag_.min_eigenvalue, eig.eigenvalues().minCoeff());
    }
  }

  void rhs(const detail::OdeState& x, detail::OdeState& dxdt, double t) {
    ++diag_.rhs_evaluations;
    const auto d = static_cast<Eigen::Index>(dim_);
    Eigen::Map<const DensityMatrix> rho(x.data(), d, d);
    Eigen::Map<DensityMatrix> out(dxdt.data(), d, d);

    // X = H_eff rho with H_eff = H - (i/2) sum rate L^+ L, applied column by column.
    for (Eigen::Index c = 0; c < d; ++c) {
      h_.apply(t, rho.col(c).data(), hbuf_.data());
      detail::csr_axpy(half_loss_, 1.0, rho.col(c).data(), hbuf_.data());
      out.col(c) = -kI * Eigen::Map<Eigen::VectorXcd>(hbuf_.data(), d);
    }
    // drho = -i X + (-i X)^+  for Hermitian rho
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r <= c; ++r) {
        const Complex v = out(r, c) + std::conj(out(c, r));
        out(r, c) = v;
        out(c, r) = std::conj(v);
      }
    // L rho L^+ summed entry by entry; jump operators are very sparse.
    for (const auto& [entries, rate] : recycled_)
      for (const auto& a : entries)
        for (const auto& b : entries)
          out(static_cast<Eigen::Index>(a.row), static_cast<Eigen::Index>(b.row)) +=
              rate * a.value * std::conj(b.value) *
              rho(static_cast<Eigen::Index>(a.col), static_cast<Eigen::Index>(b.col));
    for (std::size_t j = 0; j < opt_.accumulate.size(); ++j) {
      Complex acc = 0.0;
      const auto& m = opt_.accumulate[j].matrix();
      for (std::ptrdiff_t r = 0; r < m.outerSize(); ++r)
        for (SparseOperator::Matrix::InnerIterator it(m, r); it; ++it) acc += it.value() * rho(it.col(), it.row());
      dxdt[dim_ * dim_ + j] = Complex(acc.real(), 0.0);
    }
  }

  ParametricHamiltonian h_;
  std::vector<JumpOperator> jumps_;
  EvolveOptions opt_;
  double t_;
  double dt_;
  std::size_t dim_;
  double trace0_ = 1.0;
  SparseOperator::Matrix half_loss_;
  std::vector<std::pair<std::vector<SparseOperator::Entry>, double>> recycled_;
  detail::OdeState x_;
  detail::Controlled stepper_ = detail::make_stepper(opt_.tol);
  std::vector<Complex> hbuf_;
  Diagnostics diag_;
};

/// Lindblad evolution with samples at every grid time.
inline Trajectory evolve_density(const ParametricHamiltonian& h, const std::vector<JumpOperator>& jumps,
                                 const DensityMatrix& rho0, std::span<const double> grid, const EvolveOptions& opt = {}) {
  check_grid(grid);
  DensityPropagator prop(h, jumps, rho0, grid.front(), opt);
  Trajectory traj;
  for (double t : grid) {
    prop.advance_to(t);
    traj.times.push_back(t);
    traj.densities.push_back(prop.density());
    traj.accumulators.push_back(prop.accumulators());
  }
  traj.diagnostics = prop.diagnostics();
  return traj;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

/// CSV with a leading `t` column, 17 significant digits, LF line endings.
inline void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                                 const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw ValidationError("columns", "name count mismatch");
  os << "t";
  for (const auto& n : names) os << ',' << n;
  os << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k];
    for (const auto& c : columns) os << ',' << c.at(k);
    os << '\n';
  }
}

}  // namespace iontrans::dyn
