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

// Compressed basis for Hamiltonians in which the ions enter only through a
// few weighted collective transitions. The ion part is the span of all words
// of length <= depth in those transitions acting on |0...0>, orthonormalised
// per excitation number; the modes keep their Fock labels. Operators are
// Galerkin projections of the full-sector operators onto this span.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "iontrans/statespace.hpp"

namespace iontrans::space {

struct CollectiveConfig {
  SectorConfig sector;
  /// Generators of the ion span, e.g. raising and lowering for each weight set.
  std::vector<IonTransition> generators;
  int depth = 4;
  double drop_tolerance = 1e-9;
};

/// Raising and lowering generators on the |0>-|1> transition for each weight set.
inline std::vector<IonTransition> ladder_generators(const std::vector<std::vector<double>>& weight_sets) {
  std::vector<IonTransition> g;
  for (const auto& w : weight_sets) {
    g.push_back({kGround, kUpper, w});
    g.push_back({kUpper, kGround, w});
  }
  return g;
}

class CollectiveBasis {
 public:
  struct Label {
    int vector = 0;
    int bus = 0;
    int spurious = 0;
    int photon = 0;
    auto operator<=>(const Label&) const = default;
  };

  explicit CollectiveBasis(CollectiveConfig cfg) : cfg_(std::move(cfg)), ion_basis_(ion_config(cfg_.sector)) {
    if (cfg_.depth < 1) throw ValidationError("depth", "must be >= 1");
    build_ion_span();
    build_labels();
  }

  const CollectiveConfig& config() const { return cfg_; }
  const SectorConfig& sector() const { return cfg_.sector; }
  std::size_t dimension() const { return labels_.size(); }
  std::size_t ion_vector_count() const { return static_cast<std::size_t>(vectors_.cols()); }
  const SectorBasis& ion_basis() const { return ion_basis_; }
  const Eigen::MatrixXd& ion_vectors() const { return vectors_; }
  int excitations_of(int vector) const { return excitations_[static_cast<std::size_t>(vector)]; }
  const Label& label(std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }

  std::optional<std::size_t> find(const Label& l) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), l);
    if (it == labels_.end() || *it != l) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  /// Coordinates of the ion-only vector `ion_state` (in ion_basis()) times the
  /// given Fock occupations. The ion state must lie in the span.
  StateVector product_state(const Eigen::VectorXd& ion_state, int bus, int spurious, int photon) const {
    const Eigen::VectorXd coeff = vectors_.transpose() * ion_state;
    StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dimension()));
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
      if (coeff[k] == 0.0) continue;
      if (auto i = find({static_cast<int>(k), bus, spurious, photon})) v[static_cast<Eigen::Index>(*i)] = coeff[k];
    }
    return v;
  }

  /// Norm of the component of `ion_state` outside the span.
  double span_residual(const Eigen::VectorXd& ion_state) const {
    return (ion_state - vectors_ * (vectors_.transpose() * ion_state)).norm();
  }

  /// Ion-only vector with all ions in |0>.
  Eigen::VectorXd ion_ground() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ion_basis_.dimension()));
    v[static_cast<Eigen::Index>(ion_basis_.index_of(ion_basis_.ground_label()))] = 1.0;
    return v;
  }

  /// sum_i w_i |to>_i<from| applied to an ion-only vector.
  Eigen::VectorXd apply_ion(const IonTransition& t, const Eigen::VectorXd& v) const {
    const SparseOperator op = build_operator(t, ion_basis_);
    return (op.matrix() * v.cast<Complex>()).real();
  }

  SparseOperator build(const OperatorSpec& spec) const {
    std::vector<SparseOperator::Triplet> trip;
    const std::size_t dim = dimension();
    auto push = [&](std::size_t col, const Label& target, Complex amp) {
      if (auto row = find(target)) trip.emplace_back(*row, col, amp);
    };
    // Ion-part projection, applied after an optional mode action.
    auto ion_projected = [&](const IonTransition& t) {
      detail::check_weights(t, cfg_.sector.n_ions, cfg_.sector.levels_per_ion);
      const SparseOperator a = build_operator(t, ion_basis_);
      const Eigen::MatrixXd full = (a.matrix() * vectors_.cast<Complex>()).real();
      return Eigen::MatrixXd(vectors_.transpose() * full);
    };
    auto emit_projected = [&](const Eigen::MatrixXd& p, std::size_t col, Label moved, double amp) {
      for (Eigen::Index k = 0; k < p.rows(); ++k) {
        const double v = p(k, moved.vector);
        if (std::abs(v) < 1e-15) continue;
        Label out = moved;
        out.vector = static_cast<int>(k);
        push(col, out, amp * v);
      }
    };

    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, IonTransition>) {
            const Eigen::MatrixXd p = ion_projected(s);
            for (std::size_t c = 0; c < dim; ++c) emit_projected(p, c, labels_[c], 1.0);
          } else if constexpr (std::is_same_v<T, ModeLadder>) {
            detail::check_mode(s.mode, cfg_.sector);
            for (std::size_t c = 0; c < dim; ++c) {
              Label out = labels_[c];
              if (auto amp = ladder(s, out)) push(c, out, *amp);
            }
          } else if constexpr (std::is_same_v<T, ModeNumber>) {
            for (std::size_t c = 0; c < dim; ++c) {
              const int n = mode_of(labels_[c], s.mode);
              if (n != 0) trip.emplace_back(c, c, Complex(n));
            }
          } else if constexpr (std::is_same_v<T, DressedTransition>) {
            detail::check_mode(s.ladder.mode, cfg_.sector);
            const Eigen::MatrixXd p = ion_projected(s.ion);
            for (std::size_t c = 0; c < dim; ++c) {
              Label moved = labels_[c];
              auto amp = ladder(s.ladder, moved);
              if (amp) emit_projected(p, c, moved, *amp);
            }
          } else if constexpr (std::is_same_v<T, LevelPopulation>) {
            const SparseOperator a = build_operator(s, ion_basis_);
            const Eigen::MatrixXd full = (a.matrix() * vectors_.cast<Complex>()).real();
            const Eigen::MatrixXd p = vectors_.transpose() * full;
            for (std::size_t c = 0; c < dim; ++c) emit_projected(p, c, labels_[c], 1.0);
          } else if constexpr (std::is_same_v<T, TotalExcitation>) {
            for (std::size_t c = 0; c < dim; ++c) {
              const auto& l = labels_[c];
              const int n = excitations_of(l.vector) + l.bus + l.spurious + l.photon;
              if (n != 0) trip.emplace_back(c, c, Complex(n));
            }
          } else {
            throw ValidationError("spec", "projector is not supported on a collective basis");
          }
        },
        spec);
    return SparseOperator::from_triplets(dim, trip);
  }

  /// Lift compressed coordinates into the full sector basis `full`, which must
  /// share the ion configuration and contain every compressed label.
  StateVector embed(const StateVector& v, const SectorBasis& full) const {
    StateVector out = StateVector::Zero(static_cast<Eigen::Index>(full.dimension()));
    for (std::size_t c = 0; c < dimension(); ++c) {
      const Complex a = v[static_cast<Eigen::Index>(c)];
      if (a == Complex(0.0)) continue;
      const Label& l = labels_[c];
      for (std::size_t j = 0; j < ion_basis_.dimension(); ++j) {
        const double w = vectors_(static_cast<Eigen::Index>(j), l.vector);
        if (w == 0.0) continue;
        BasisLabel target = ion_basis_.label(j);
        target.bus = l.bus;
        target.spurious = l.spurious;
        target.photon = l.photon;
        out[static_cast<Eigen::Index>(full.index_of(target))] += a * w;
      }
    }
    return out;
  }

  /// Same split as split_spurious() for a SectorBasis: system label drops the spurious occupation.
  SpuriousSplit split_spurious() const {
    std::vector<Label> system;
    for (const auto& l : labels_) {
      Label r = l;
      r.spurious = 0;
      system.push_back(r);
    }
    std::sort(system.begin(), system.end());
    system.erase(std::unique(system.begin(), system.end()), system.end());
    SpuriousSplit s;
    s.system_dimension = system.size();
    for (const auto& l : labels_) {
      Label r = l;
      r.spurious = 0;
      s.system_index.push_back(static_cast<std::size_t>(std::lower_bound(system.begin(), system.end(), r) - system.begin()));
      s.spurious.push_back(l.spurious);
    }
    return s;
  }

 private:
  static SectorConfig ion_config(SectorConfig s) {
    s.bus_cutoff = 0;
    s.spurious_cutoff = 0;
    s.photon_cutoff = 0;
    s.total_cap = s.max_ion_excitations;
    return s;
  }

  static int mode_of(const Label& l, Mode m) {
    return m == Mode::bus ? l.bus : m == Mode::spurious ? l.spurious : l.photon;
  }

  static std::optional<double> ladder(const ModeLadder& op, Label& l) {
    int& n = op.mode == Mode::bus ? l.bus : op.mode == Mode::spurious ? l.spurious : l.photon;
    if (op.raise) {
      ++n;
      return std::sqrt(static_cast<double>(n));
    }
    if (n == 0) return std::nullopt;
    const double amp = std::sqrt(static_cast<double>(n));
    --n;
    return amp;
  }

  void build_ion_span() {
    std::vector<SparseOperator> gens;
    std::vector<int> shift;
    for (const auto& g : cfg_.generators) {
      detail::check_weights(g, cfg_.sector.n_ions, cfg_.sector.levels_per_ion);
      gens.push_back(build_operator(g, ion_basis_));
      shift.push_back((g.to != kGround ? 1 : 0) - (g.from != kGround ? 1 : 0));
    }

    std::vector<Eigen::VectorXd> basis;
    std::vector<int> exc;
    auto add = [&](Eigen::VectorXd v, int m) -> bool {
      const double before = v.norm();
      if (before == 0.0) return false;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < basis.size(); ++k)
          if (exc[k] == m) v -= basis[k].dot(v) * basis[k];
      const double after = v.norm();
      if (after <= cfg_.drop_tolerance * before) return false;
      basis.push_back(v / after);
      exc.push_back(m);
      return true;
    };

    add(ion_ground(), 0);
    std::vector<std::size_t> frontier{0};
    for (int d = 0; d < cfg_.depth; ++d) {
      std::vector<std::size_t> next;
      for (std::size_t idx : frontier) {
        for (std::size_t g = 0; g < gens.size(); ++g) {
          const int m = exc[idx] + shift[g];
          if (m < 0 || m > cfg_.sector.max_ion_excitations) continue;
          Eigen::VectorXd w = (gens[g].matrix() * basis[idx].cast<Complex>()).real();
          if (add(std::move(w), m)) next.push_back(basis.size() - 1);
        }
      }
      frontier = std::move(next);
    }

    // Order vectors by excitation number for a readable label ordering.
    std::vector<std::size_t> order(basis.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return exc[a] < exc[b]; });
    vectors_.resize(static_cast<Eigen::Index>(ion_basis_.dimension()), static_cast<Eigen::Index>(basis.size()));
    excitations_.clear();
    for (std::size_t k = 0; k < order.size(); ++k) {
      vectors_.col(static_cast<Eigen::Index>(k)) = basis[order[k]];
      excitations_.push_back(exc[order[k]]);
    }
  }

  void build_labels() {
    const auto& s = cfg_.sector;
    for (int k = 0; k < static_cast<int>(excitations_.size()); ++k) {
      const int budget = s.total_cap - excitations_[static_cast<std::size_t>(k)];
      for (int n = 0; n <= s.bus_cutoff; ++n)
        for (int sp = 0; sp <= s.spurious_cutoff; ++sp)
          for (int p = 0; p <= s.photon_cutoff; ++p)
            if (n + sp + p <= budget) labels_.push_back({k, n, sp, p});
    }
  }

  CollectiveConfig cfg_;
  SectorBasis ion_basis_;
  Eigen::MatrixXd vectors_;
  std::vector<int> excitations_;
  std::vector<Label> labels_;
};

}  // namespace iontrans::space
