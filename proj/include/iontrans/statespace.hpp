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

// Excitation-truncated Hilbert spaces for N ions (two or three levels each),
// two phonon modes (the bus mode and one spurious mode) and a cavity photon,
// together with sparse operators on them.
//
// Matrix elements that would leave the truncated sector are dropped.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "iontrans/common.hpp"

namespace iontrans::space {

enum class Mode { bus, spurious, photon };

/// Ion levels: |0>, |1> and the optically excited |e>.
enum Level : std::uint8_t { kGround = 0, kUpper = 1, kExcited = 2 };

struct SectorConfig {
  int n_ions = 1;
  int levels_per_ion = 2;
  /// Maximum number of ions not in |0>.
  int max_ion_excitations = 1;
  /// Fock cutoffs; 0 means the mode is frozen in vacuum.
  int bus_cutoff = 0;
  int spurious_cutoff = 0;
  int photon_cutoff = 0;
  /// Cap on ion excitations + phonons + photons.
  int total_cap = 1;
  std::size_t max_dimension = 4'000'000;

  void validate() const {
    if (n_ions < 1) throw ValidationError("n_ions", "must be >= 1");
    if (levels_per_ion != 2 && levels_per_ion != 3)
      throw ValidationError("levels_per_ion", "must be 2 or 3");
    if (max_ion_excitations < 1) throw ValidationError("max_ion_excitations", "must be >= 1");
    if (total_cap < max_ion_excitations)
      throw ValidationError("total_cap", "must be >= max_ion_excitations");
    if (bus_cutoff < 0 || spurious_cutoff < 0 || photon_cutoff < 0)
      throw ValidationError("cutoff", "must be non-negative");
  }
};

struct BasisLabel {
  std::vector<std::uint8_t> ions;
  int bus = 0;
  int spurious = 0;
  int photon = 0;

  int ion_excitations() const {
    return static_cast<int>(std::count_if(ions.begin(), ions.end(), [](auto l) { return l != kGround; }));
  }
  int total_excitations() const { return ion_excitations() + bus + spurious + photon; }
  int& mode(Mode m) { return m == Mode::bus ? bus : m == Mode::spurious ? spurious : photon; }
  int mode(Mode m) const { return m == Mode::bus ? bus : m == Mode::spurious ? spurious : photon; }

  auto operator<=>(const BasisLabel&) const = default;
};

namespace detail {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline int cutoff_of(const SectorConfig& cfg, Mode m) {
  return m == Mode::bus ? cfg.bus_cutoff : m == Mode::spurious ? cfg.spurious_cutoff : cfg.photon_cutoff;
}

inline std::string label_key(const BasisLabel& l) {
  std::string key(l.ions.begin(), l.ions.end());
  key.push_back(static_cast<char>(l.bus));
  key.push_back(static_cast<char>(l.spurious));
  key.push_back(static_cast<char>(l.photon));
  return key;
}

/// Number of (bus, spurious, photon) occupations with sum <= budget.
inline std::size_t count_mode_states(const SectorConfig& cfg, int budget) {
  std::size_t count = 0;
  for (int n = 0; n <= cfg.bus_cutoff; ++n)
    for (int s = 0; s <= cfg.spurious_cutoff; ++s)
      for (int p = 0; p <= cfg.photon_cutoff; ++p)
        if (n + s + p <= budget) ++count;
  return count;
}

}  // namespace detail

/// Lexicographically ordered basis of all labels within the caps of a SectorConfig.
class SectorBasis {
 public:
  explicit SectorBasis(SectorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::size_t dim = count(cfg_);
    if (dim > cfg_.max_dimension) throw BudgetError("sector basis exceeds memory budget", dim);
    labels_.reserve(dim);
    BasisLabel current;
    current.ions.assign(static_cast<std::size_t>(cfg_.n_ions), kGround);
    enumerate(current, 0, 0);
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(detail::label_key(labels_[i]), i);
  }

  /// Dimension from closed-form counting, without enumerating.
  static std::size_t count(const SectorConfig& cfg) {
    cfg.validate();
    const int m_max = std::min(cfg.max_ion_excitations, std::min(cfg.n_ions, cfg.total_cap));
    double total = 0.0;
    for (int m = 0; m <= m_max; ++m) {
      const double patterns = detail::binomial(cfg.n_ions, m) * std::pow(cfg.levels_per_ion - 1, m);
      total += patterns * static_cast<double>(detail::count_mode_states(cfg, cfg.total_cap - m));
    }
    return static_cast<std::size_t>(total);
  }

  const SectorConfig& config() const { return cfg_; }
  const SectorConfig& sector() const { return cfg_; }
  std::size_t dimension() const { return labels_.size(); }
  int n_ions() const { return cfg_.n_ions; }
  const BasisLabel& label(std::size_t i) const { return labels_[i]; }
  const std::vector<BasisLabel>& labels() const { return labels_; }

  std::optional<std::size_t> find(const BasisLabel& l) const {
    auto it = index_.find(detail::label_key(l));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const BasisLabel& l) const {
    auto i = find(l);
    if (!i) throw ValidationError("label", "not in sector basis");
    return *i;
  }

  /// All ions in |0>, given mode occupations.
  BasisLabel ground_label(int bus = 0, int spurious = 0, int photon = 0) const {
    BasisLabel l;
    l.ions.assign(static_cast<std::size_t>(cfg_.n_ions), kGround);
    l.bus = bus;
    l.spurious = spurious;
    l.photon = photon;
    return l;
  }

  StateVector basis_state(const BasisLabel& l) const {
    StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dimension()));
    v[static_cast<Eigen::Index>(index_of(l))] = 1.0;
    return v;
  }

 private:
  void enumerate(BasisLabel& current, int ion, int excited) {
    if (ion == cfg_.n_ions) {
      const int budget = cfg_.total_cap - excited;
      for (int n = 0; n <= cfg_.bus_cutoff; ++n)
        for (int s = 0; s <= cfg_.spurious_cutoff; ++s)
          for (int p = 0; p <= cfg_.photon_cutoff; ++p) {
            if (n + s + p > budget) continue;
            current.bus = n;
            current.spurious = s;
            current.photon = p;
            labels_.push_back(current);
          }
      return;
    }
    for (int level = 0; level < cfg_.levels_per_ion; ++level) {
      const int e = excited + (level != kGround ? 1 : 0);
      if (e > cfg_.max_ion_excitations || e > cfg_.total_cap) continue;
      current.ions[static_cast<std::size_t>(ion)] = static_cast<std::uint8_t>(level);
      enumerate(current, ion + 1, e);
    }
    current.ions[static_cast<std::size_t>(ion)] = kGround;
  }

  SectorConfig cfg_;
  std::vector<BasisLabel> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Sparse complex operator in canonical (row-major, sorted, pruned) form.
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, std::ptrdiff_t>;
  using Triplet = Eigen::Triplet<Complex, std::ptrdiff_t>;

  struct Entry {
    std::size_t row;
    std::size_t col;
    Complex value;
  };

  static constexpr double kPruneTolerance = 1e-15;

  SparseOperator() = default;
  explicit SparseOperator(Matrix m) : m_(std::move(m)) {
    m_.prune(Complex(0.0), kPruneTolerance);
    m_.makeCompressed();
  }

  static SparseOperator from_triplets(std::size_t dim, const std::vector<Triplet>& triplets) {
    Matrix m(static_cast<std::ptrdiff_t>(dim), static_cast<std::ptrdiff_t>(dim));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SparseOperator(std::move(m));
  }

  static SparseOperator identity(std::size_t dim) {
    Matrix m(static_cast<std::ptrdiff_t>(dim), static_cast<std::ptrdiff_t>(dim));
    m.setIdentity();
    return SparseOperator(std::move(m));
  }

  static SparseOperator diagonal(const Eigen::VectorXd& d) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (d[i] != 0.0) t.emplace_back(i, i, Complex(d[i]));
    return from_triplets(static_cast<std::size_t>(d.size()), t);
  }

  static SparseOperator from_dense(const Eigen::MatrixXcd& a) {
    return SparseOperator(Matrix(a.sparseView(Complex(0.0), kPruneTolerance)));
  }

  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t nonzeros() const { return static_cast<std::size_t>(m_.nonZeros()); }
  const Matrix& matrix() const { return m_; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(nonzeros());
    for (std::ptrdiff_t r = 0; r < m_.outerSize(); ++r)
      for (Matrix::InnerIterator it(m_, r); it; ++it)
        out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value()});
    return out;
  }

  SparseOperator adjoint() const { return SparseOperator(Matrix(m_.adjoint())); }

  /// max |A - A^dagger|
  double hermiticity_defect() const {
    Matrix d = m_ - Matrix(m_.adjoint());
    double worst = 0.0;
    for (std::ptrdiff_t r = 0; r < d.outerSize(); ++r)
      for (Matrix::InnerIterator it(d, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
  }

  double max_abs() const {
    double worst = 0.0;
    for (std::ptrdiff_t r = 0; r < m_.outerSize(); ++r)
      for (Matrix::InnerIterator it(m_, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
  }

  StateVector apply(const StateVector& v) const {
    check_dim(static_cast<std::size_t>(v.size()));
    return m_ * v;
  }

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b.dimension());
    return SparseOperator(Matrix(a.m_ + b.m_));
  }
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b.dimension());
    return SparseOperator(Matrix(a.m_ - b.m_));
  }
  friend SparseOperator operator*(Complex s, const SparseOperator& a) { return SparseOperator(Matrix(s * a.m_)); }
  friend SparseOperator operator*(double s, const SparseOperator& a) { return Complex(s) * a; }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b.dimension());
    return SparseOperator(Matrix(a.m_ * b.m_));
  }

  /// Coordinate-list dump: row col re im per line, 17 significant digits.
  void write_coo(std::ostream& os) const {
    os << std::setprecision(17);
    for (const auto& e : entries()) os << e.row << ' ' << e.col << ' ' << e.value.real() << ' ' << e.value.imag() << '\n';
  }

  void check_dim(std::size_t d) const {
    if (d != dimension())
      throw ValidationError("dimension", "mismatch: " + std::to_string(d) + " vs " + std::to_string(dimension()));
  }

 private:
  Matrix m_;
};

inline SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------
// Operator specifications

/// sum_i w_i |to>_i <from|; a single-site operator uses a unit weight vector.
struct IonTransition {
  int from = kGround;
  int to = kUpper;
  std::vector<double> weights;
};

struct ModeLadder {
  Mode mode = Mode::bus;
  bool raise = false;
};

struct ModeNumber {
  Mode mode = Mode::bus;
};

/// Ion transition times a ladder operator, with matrix elements taken
/// directly between in-sector labels.
struct DressedTransition {
  IonTransition ion;
  ModeLadder ladder;
};

/// sum_i |level>_i <level|
struct LevelPopulation {
  int level = kUpper;
};

struct Projector {
  BasisLabel label;
};

/// Diagonal operator counting ion excitations plus all quanta.
struct TotalExcitation {};

using OperatorSpec = std::variant<IonTransition, ModeLadder, ModeNumber, DressedTransition,
                                  LevelPopulation, Projector, TotalExcitation>;

inline std::vector<double> site_weights(int n_ions, int ion) {
  std::vector<double> w(static_cast<std::size_t>(n_ions), 0.0);
  w.at(static_cast<std::size_t>(ion)) = 1.0;
  return w;
}

namespace detail {

inline void check_weights(const IonTransition& t, int n_ions, int levels) {
  if (static_cast<int>(t.weights.size()) != n_ions)
    throw ValidationError("weights", "length " + std::to_string(t.weights.size()) + " != n_ions " +
                                         std::to_string(n_ions));
  if (t.from < 0 || t.from >= levels || t.to < 0 || t.to >= levels)
    throw ValidationError("level", "transition level outside the ion level set");
}

inline void check_mode(Mode m, const SectorConfig& cfg) {
  if (cutoff_of(cfg, m) == 0) throw ValidationError("mode", "basis does not include the requested mode");
}

/// Ladder action on the mode occupations; nullopt if annihilated.
inline std::optional<double> apply_ladder(const ModeLadder& l, BasisLabel& label) {
  int& n = label.mode(l.mode);
  if (l.raise) {
    ++n;
    return std::sqrt(static_cast<double>(n));
  }
  if (n == 0) return std::nullopt;
  const double amp = std::sqrt(static_cast<double>(n));
  --n;
  return amp;
}

template <class Emit>
void ion_action(const IonTransition& t, const BasisLabel& in, Emit&& emit) {
  for (std::size_t i = 0; i < in.ions.size(); ++i) {
    if (in.ions[i] != t.from || t.weights[i] == 0.0) continue;
    BasisLabel out = in;
    out.ions[i] = static_cast<std::uint8_t>(t.to);
    emit(std::move(out), t.weights[i]);
  }
}

}  // namespace detail

inline SparseOperator build_operator(const OperatorSpec& spec, const SectorBasis& basis) {
  const auto& cfg = basis.config();
  const std::size_t dim = basis.dimension();
  std::vector<SparseOperator::Triplet> trip;

  auto push = [&](std::size_t col, const BasisLabel& target, Complex amp) {
    if (auto row = basis.find(target)) trip.emplace_back(*row, col, amp);
  };

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IonTransition>) {
          detail::check_weights(s, cfg.n_ions, cfg.levels_per_ion);
          for (std::size_t c = 0; c < dim; ++c)
            detail::ion_action(s, basis.label(c), [&](BasisLabel out, double w) { push(c, out, w); });
        } else if constexpr (std::is_same_v<T, ModeLadder>) {
          detail::check_mode(s.mode, cfg);
          for (std::size_t c = 0; c < dim; ++c) {
            BasisLabel out = basis.label(c);
            if (auto amp = detail::apply_ladder(s, out)) push(c, out, *amp);
          }
        } else if constexpr (std::is_same_v<T, ModeNumber>) {
          for (std::size_t c = 0; c < dim; ++c) {
            const int n = basis.label(c).mode(s.mode);
            if (n != 0) trip.emplace_back(c, c, Complex(n));
          }
        } else if constexpr (std::is_same_v<T, DressedTransition>) {
          detail::check_weights(s.ion, cfg.n_ions, cfg.levels_per_ion);
          detail::check_mode(s.ladder.mode, cfg);
          for (std::size_t c = 0; c < dim; ++c) {
            BasisLabel moved = basis.label(c);
            auto amp = detail::apply_ladder(s.ladder, moved);
            if (!amp) continue;
            detail::ion_action(s.ion, moved, [&](BasisLabel out, double w) { push(c, out, w * *amp); });
          }
        } else if constexpr (std::is_same_v<T, LevelPopulation>) {
          if (s.level < 0 || s.level >= cfg.levels_per_ion) throw ValidationError("level", "outside level set");
          for (std::size_t c = 0; c < dim; ++c) {
            const auto& ions = basis.label(c).ions;
            const auto n = std::count(ions.begin(), ions.end(), static_cast<std::uint8_t>(s.level));
            if (n != 0) trip.emplace_back(c, c, Complex(static_cast<double>(n)));
          }
        } else if constexpr (std::is_same_v<T, Projector>) {
          const std::size_t i = basis.index_of(s.label);
          trip.emplace_back(i, i, Complex(1.0));
        } else if constexpr (std::is_same_v<T, TotalExcitation>) {
          for (std::size_t c = 0; c < dim; ++c) {
            const int n = basis.label(c).total_excitations();
            if (n != 0) trip.emplace_back(c, c, Complex(n));
          }
        }
      },
      spec);
  return SparseOperator::from_triplets(dim, trip);
}

/// sum_i w_i (|1>_i<0| + |0>_i<1|)
inline SparseOperator collective_sigma_x(const std::vector<double>& weights, const SectorBasis& basis) {
  const SparseOperator up = build_operator(IonTransition{kGround, kUpper, weights}, basis);
  return up + up.adjoint();
}

/// sum_i w_i (|1>_i<0| + |0>_i<1|)(b + b^dagger) on the given mode.
inline SparseOperator collective_sigma_x_quadrature(const std::vector<double>& weights, Mode mode,
                                                    const SectorBasis& basis) {
  const IonTransition up{kGround, kUpper, weights};
  const IonTransition down{kUpper, kGround, weights};
  SparseOperator out = build_operator(DressedTransition{up, {mode, false}}, basis);
  out = out + build_operator(DressedTransition{up, {mode, true}}, basis);
  out = out + build_operator(DressedTransition{down, {mode, false}}, basis);
  out = out + build_operator(DressedTransition{down, {mode, true}}, basis);
  return out;
}

// ---------------------------------------------------------------------------
// States

inline Complex expectation(const StateVector& psi, const SparseOperator& op) {
  op.check_dim(static_cast<std::size_t>(psi.size()));
  return psi.dot(op.matrix() * psi);
}

inline Complex expectation(const DensityMatrix& rho, const SparseOperator& op) {
  op.check_dim(static_cast<std::size_t>(rho.rows()));
  if (rho.rows() != rho.cols()) throw ValidationError("rho", "not square");
  Complex acc = 0.0;
  const auto& m = op.matrix();
  for (std::ptrdiff_t r = 0; r < m.outerSize(); ++r)
    for (SparseOperator::Matrix::InnerIterator it(m, r); it; ++it) acc += it.value() * rho(it.col(), it.row());
  return acc;
}

struct DensityDiagnostics {
  double hermiticity_defect = 0.0;
  Complex trace{0.0};
  double min_eigenvalue = 0.0;
};

inline DensityDiagnostics check_density(const DensityMatrix& rho) {
  DensityDiagnostics d;
  d.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  d.trace = rho.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  d.min_eigenvalue = eig.eigenvalues().minCoeff();
  return d;
}

inline DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

/// Maps every basis index to (system index, spurious occupation) where the
/// system basis is the same sector with the spurious mode removed.
struct SpuriousSplit {
  std::vector<std::size_t> system_index;
  std::vector<int> spurious;
  std::size_t system_dimension = 0;
};

inline SpuriousSplit split_spurious(const SectorBasis& basis, const SectorBasis& system) {
  SpuriousSplit s;
  s.system_dimension = system.dimension();
  s.system_index.reserve(basis.dimension());
  s.spurious.reserve(basis.dimension());
  for (const auto& l : basis.labels()) {
    BasisLabel reduced = l;
    reduced.spurious = 0;
    s.system_index.push_back(system.index_of(reduced));
    s.spurious.push_back(l.spurious);
  }
  return s;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const SpuriousSplit& split) {
  const auto n = static_cast<Eigen::Index>(split.system_index.size());
  if (rho.rows() != n || rho.cols() != n) throw ValidationError("rho", "dimension mismatch with basis");
  const auto d = static_cast<Eigen::Index>(split.system_dimension);
  DensityMatrix out = DensityMatrix::Zero(d, d);
  // Group indices by spurious occupation; within a group the system index is unique.
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (split.spurious[a] == split.spurious[b])
        out(static_cast<Eigen::Index>(split.system_index[a]), static_cast<Eigen::Index>(split.system_index[b])) +=
            rho(a, b);
  return out;
}

struct ReducedDensity {
  DensityMatrix rho;
  SectorBasis basis;
};

/// Trace over the spurious phonon mode.
inline ReducedDensity partial_trace_spurious(const DensityMatrix& rho, const SectorBasis& basis) {
  if (basis.config().spurious_cutoff == 0) throw ValidationError("basis", "has no spurious mode");
  SectorConfig sys = basis.config();
  sys.spurious_cutoff = 0;
  SectorBasis system(sys);
  return {partial_trace(rho, split_spurious(basis, system)), std::move(system)};
}

}  // namespace iontrans::space
