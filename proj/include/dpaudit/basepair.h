//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Canonical base distribution pair of a trade-off curve.
//
// Every trade-off curve f is attained by a canonical pair of distributions
// on [0, 1]:
//
//   P = Uniform[0, 1],
//   Q with density q(y) = -f'(1 - y) on [0, 1) plus an atom at y = 1 of
//   mass 1 - f(0).
//
// Testing P against Q achieves exactly the trade-off f, so bounds proved
// for this pair transfer to every mechanism whose curve dominates f.  In
// the guessing game the bit b is uniform and y is drawn from P when b = 0
// and from Q when b = 1; the optimal guess at y errs with probability
// min(1, q(y)) / (1 + q(y)) and its confidence score is |ln q(y)|.
//
// The pair is discretized into cells: a uniform grid over [0, 1) refined
// with a cut at every preimage 1 - x of a density breakpoint x of the
// curve, plus one cell for the atom.  Cell Q-masses are exact telescoped
// differences f(1 - y_hi) - f(1 - y_lo), so only the within-cell shape of
// the density is approximated; for piecewise-linear curves the density is
// exactly constant on every cell and the discretization is lossless.
// Convexity of f makes q nondecreasing in y, and the one-sided
// subderivatives at the cell edges give the exact range of q (hence of the
// posterior error) inside each cell; those ranges feed the rigorous
// discretization-error accounting of downstream integrals.
//
// Ordering cells by ascending score (least confident first, the atom at
// the very top) and laying their mixture masses end to end tiles [0, 1]
// with rank intervals: rank t is the mixture CDF of the score.  ErrorAtRank
// is then the nonincreasing step function giving the posterior error of the
// guess whose score sits at mixture quantile t; the k-th smallest of n
// scores has rank distributed Beta(k, n-k+1), which is what the v_k table
// integrates this function against.

#ifndef DPAUDIT_BASEPAIR_H_
#define DPAUDIT_BASEPAIR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "dpaudit/errors.h"
#include "dpaudit/tradeoff.h"

namespace dpaudit {

struct BasePairCell {
  double y_lo = 0.0;   // cell interval [y_lo, y_hi); the atom has y_lo == y_hi == 1
  double y_hi = 0.0;
  bool atom = false;
  double mass_p = 0.0;     // P-mass: y_hi - y_lo (0 for the atom)
  double mass_q = 0.0;     // exact Q-mass
  double density = 0.0;    // cell-average likelihood ratio (+inf for the atom)
  double score = 0.0;      // |ln density|
  double error = 0.0;      // posterior error of the optimal guess
  double error_lo = 0.0;   // rigorous range of the posterior error within
  double error_hi = 0.0;   //   the cell, from edge subderivatives
  double mass_mix = 0.0;   // (mass_p + mass_q) / 2
  double rank_lo = 0.0;    // mixture-rank interval in score-ascending order
  double rank_hi = 0.0;    //   (least confident first); intervals tile [0, 1]
};

class BasePair {
 public:
  static BasePair Build(const TradeoffCurve& curve, int resolution);

  // Cells ordered by ascending score (least confident first, the atom last
  // among infinite scores); rank intervals tile [0, 1].
  const std::vector<BasePairCell>& CellsByRank() const { return by_rank_; }

  // Upper rank boundary of each cell in CellsByRank() order, for searches.
  const std::vector<double>& RankBoundaries() const { return rank_hi_; }

  double AtomMass() const { return atom_mass_; }
  int Resolution() const { return resolution_; }

  // Posterior error of the optimal guess at mixture rank t: a nonincreasing
  // step function with values in [0, 1/2], reaching 0 inside the atom.
  double ErrorAtRank(double t) const {
    return by_rank_[CellIndexAtRank(t)].error;
  }

  // Index into CellsByRank() of the cell whose rank interval contains t.
  std::size_t CellIndexAtRank(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw InvariantViolation("BasePair: rank must lie in [0, 1]");
    }
    const auto it = std::upper_bound(rank_hi_.begin(), rank_hi_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - rank_hi_.begin());
    if (idx >= by_rank_.size()) idx = by_rank_.size() - 1;
    return idx;
  }

  // Cells ordered by position y with the atom last; convenience view used
  // by diagnostic dumps.
  std::vector<BasePairCell> CellsByY() const {
    std::vector<BasePairCell> cells = by_rank_;
    std::sort(cells.begin(), cells.end(),
              [](const BasePairCell& a, const BasePairCell& b) {
                if (a.atom != b.atom) return b.atom;
                return a.y_lo < b.y_lo;
              });
    return cells;
  }

 private:
  std::vector<BasePairCell> by_rank_;
  std::vector<double> rank_hi_;
  double atom_mass_ = 0.0;
  int resolution_ = 0;
};

inline BasePair BasePair::Build(const TradeoffCurve& curve, int resolution) {
  if (resolution < 2) {
    throw InvariantViolation("BasePair: resolution must be >= 2");
  }

  // Grid over y: uniform cuts refined with every density-breakpoint
  // preimage, deduplicated so no cell degenerates to zero width.
  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(resolution) + 8);
  for (int i = 0; i <= resolution; ++i) {
    cuts.push_back(static_cast<double>(i) / resolution);
  }
  for (double x : curve.DensityBreakpoints()) {
    const double y = 1.0 - x;
    if (y > 0.0 && y < 1.0) cuts.push_back(y);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> ys;
  ys.reserve(cuts.size());
  for (double y : cuts) {
    if (ys.empty() || y - ys.back() > 1e-12) ys.push_back(y);
  }
  if (1.0 - ys.back() <= 1e-12) {
    ys.back() = 1.0;
  } else {
    ys.push_back(1.0);
  }
  const std::size_t n_cells = ys.size() - 1;

  // Exact Q cdf at the grid: F_Q(y) = f(1 - y), and edge slopes for the
  // within-cell density ranges.
  std::vector<double> cdf(ys.size());
  std::vector<SlopeInterval> slope(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    cdf[i] = curve.Eval(1.0 - ys[i]);
    slope[i] = curve.Subgradient(1.0 - ys[i]);
  }

  const auto posterior_error = [](double q) {
    if (std::isinf(q)) return 0.0;
    return q <= 1.0 ? q / (1.0 + q) : 1.0 / (1.0 + q);
  };

  std::vector<BasePairCell> cells;
  cells.reserve(n_cells + 1);
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (std::size_t i = 0; i < n_cells; ++i) {
    BasePairCell cell;
    cell.y_lo = ys[i];
    cell.y_hi = ys[i + 1];
    cell.mass_p = ys[i + 1] - ys[i];
    const double dq = cdf[i + 1] - cdf[i];
    if (dq < -1e-12) {
      throw InvariantViolation("BasePair: curve cdf decreased across a cell");
    }
    cell.mass_q = std::max(0.0, dq);
    cell.density = cell.mass_q / cell.mass_p;
    cell.score = std::fabs(std::log(cell.density));
    cell.error = posterior_error(cell.density);
    // q is nondecreasing in y, so its range over the open cell is pinned by
    // the one-sided derivatives at the edges; widen by the cell average to
    // absorb rounding.
    const double q_min =
        std::min(cell.density, std::max(0.0, -slope[i].lo));
    const double q_max = std::max(cell.density, -slope[i + 1].hi);
    const double h_min = posterior_error(q_min);
    const double h_max = posterior_error(q_max);
    cell.error_lo = std::min({h_min, h_max, cell.error});
    cell.error_hi = (q_min < 1.0 && q_max > 1.0)
                        ? 0.5
                        : std::max({h_min, h_max, cell.error});
    cell.mass_mix = 0.5 * (cell.mass_p + cell.mass_q);
    sum_p += cell.mass_p;
    sum_q += cell.mass_q;
    cells.push_back(cell);
  }

  const double atom_mass = std::max(0.0, 1.0 - curve.FAtZero());
  if (atom_mass > 0.0) {
    BasePairCell atom;
    atom.y_lo = 1.0;
    atom.y_hi = 1.0;
    atom.atom = true;
    atom.mass_q = atom_mass;
    atom.density = std::numeric_limits<double>::infinity();
    atom.score = std::numeric_limits<double>::infinity();
    atom.error = 0.0;
    atom.error_lo = 0.0;
    atom.error_hi = 0.0;
    atom.mass_mix = 0.5 * atom_mass;
    sum_q += atom_mass;
    cells.push_back(atom);
  }

  if (std::fabs(sum_p - 1.0) > 1e-9 || std::fabs(sum_q - 1.0) > 1e-9) {
    throw NumericalError("BasePair: cell masses failed to normalize");
  }

  // Score-ascending order: least confident first, the atom last among
  // infinite scores, then by position for determinism.  Ties in score share
  // the same posterior error, so tie order never affects ErrorAtRank.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&cells](std::size_t a, std::size_t b) {
                     const BasePairCell& ca = cells[a];
                     const BasePairCell& cb = cells[b];
                     if (ca.score != cb.score) return ca.score < cb.score;
                     if (ca.atom != cb.atom) return cb.atom;
                     return ca.y_lo < cb.y_lo;
                   });

  double total_mix = 0.0;
  for (const BasePairCell& cell : cells) total_mix += cell.mass_mix;
  if (std::fabs(total_mix - 1.0) > 1e-9) {
    throw NumericalError("BasePair: mixture mass failed to normalize");
  }

  BasePair pair;
  pair.atom_mass_ = atom_mass;
  pair.resolution_ = resolution;
  pair.by_rank_.reserve(cells.size());
  pair.rank_hi_.reserve(cells.size());
  double running = 0.0;
  for (std::size_t idx : order) {
    BasePairCell cell = cells[idx];
    cell.rank_lo = running / total_mix;
    running += cell.mass_mix;
    cell.rank_hi = running / total_mix;
    pair.by_rank_.push_back(cell);
    pair.rank_hi_.push_back(cell.rank_hi);
  }
  pair.by_rank_.back().rank_hi = 1.0;
  pair.rank_hi_.back() = 1.0;
  return pair;
}

}  // namespace dpaudit

#endif  // DPAUDIT_BASEPAIR_H_
