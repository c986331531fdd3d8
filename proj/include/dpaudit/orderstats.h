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

// Order-statistic error probabilities.
//
// When n coordinates each draw an i.i.d. score from the base-pair mixture,
// the mixture rank of the k-th smallest score is distributed
// Beta(k, n-k+1).  The guess attached to that score errs with probability
//
//   v_k = E_{T ~ Beta(k, n-k+1)}[ g(T) ],   k = n-r+1 .. n,
//
// where g = BasePair::ErrorAtRank is the nonincreasing posterior-error
// step function and the top r order statistics are the released guesses.
// The atom and any zero-density cells contribute nothing (g = 0 there).
//
// Numerics.  Everything is carried in log space (log-Gamma weight,
// log-density per node), with exp taken only at the accumulation step
// after a max-shift.  Each k integrates over the window between the
// 1e-12 and 1 - 1e-12 quantiles of Beta(k, n-k+1); the truncated tail
// mass is added to quad_error.  On the window the integral is evaluated
// on >= 4097 uniform nodes with an interpolatory product rule: the Beta
// density is approximated by its quadratic interpolant per two-node
// panel (the Simpson parabola) and that parabola is integrated exactly
// against the step function g, cell by cell, so the step structure of g
// contributes no sampling error.  Halving the panel count gives a
// classical |S_h - S_2h|/15 residual estimate which is also added to
// quad_error.  When g has few constant runs (perfect privacy, (eps,
// delta) curves), the table instead sums run values against exact
// regularized-incomplete-beta differences over the full unit interval.
//
// Each k also records disc_error: the largest within-cell posterior-error
// range among base-pair cells intersecting its window.  Since sorting is
// an L-infinity contraction, the discretized g differs from the exact
// rank-error function by at most that much anywhere in the window, so
// v_k +/- (quad_error + disc_error) brackets the exact value; consumers
// that need a conservative v_k subtract both.

#ifndef DPAUDIT_ORDERSTATS_H_
#define DPAUDIT_ORDERSTATS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpaudit/basepair.h"
#include "dpaudit/errors.h"
#include "dpaudit/special.h"

namespace dpaudit {

struct VkTable {
  std::int64_t n = 0;
  std::int64_t r = 0;
  int grid_size = 0;        // base-pair resolution behind the table
  nlohmann::json curve;     // descriptor of the null curve (set by callers)
  // All lists are indexed by k = n-r+1 .. n (entry 0 is k = n-r+1).
  std::vector<double> v;
  std::vector<double> quad_error;  // window truncation + quadrature residual
  std::vector<double> disc_error;  // within-cell error range over the window
};

// Log-density of the k-th order statistic of n uniforms at t, i.e. of
// Beta(k, n-k+1):  ln[ n!/((n-k)!(k-1)!) t^{k-1} (1-t)^{n-k} ].
inline double LogOrderStatWeight(std::int64_t n, std::int64_t k, double t) {
  if (n < 1 || k < 1 || k > n) {
    throw InvariantViolation("LogOrderStatWeight: k must lie in [1, n]");
  }
  if (!(t > 0.0 && t < 1.0)) {
    throw InvariantViolation("LogOrderStatWeight: t must lie in (0, 1)");
  }
  const double logw = std::lgamma(static_cast<double>(n + 1)) -
                      std::lgamma(static_cast<double>(k)) -
                      std::lgamma(static_cast<double>(n - k + 1));
  return logw + static_cast<double>(k - 1) * std::log(t) +
         static_cast<double>(n - k) * std::log1p(-t);
}

namespace internal {

// Integrates the quadratic through ((t0, p0), (t0+h, p1), (t0+2h, p2))
// exactly against the step function defined by cell boundaries bnd[] and
// values err[], over [t0, t2].  The cursor ci advances monotonically.
inline double PanelStepIntegral(double t0, double t2, double h, double p0,
                                double p1, double p2,
                                const std::vector<double>& bnd,
                                const std::vector<double>& err,
                                std::size_t& ci) {
  const double c2 = (p2 - 2.0 * p1 + p0) / (2.0 * h * h);
  const double c1 = (p1 - p0) / h - c2 * h;
  const std::size_t last = bnd.size() - 1;
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  double seg_lo = t0;
  while (true) {
    while (ci < last && bnd[ci] <= seg_lo) ++ci;
    const double seg_hi = std::min(t2, bnd[ci]);
    const double e = err[ci];
    if (e != 0.0 && seg_hi > seg_lo) {
      const double u0 = seg_lo - t0;
      const double u1 = seg_hi - t0;
      g0 += e * (u1 - u0);
      g1 += e * 0.5 * (u1 * u1 - u0 * u0);
      g2 += e * (u1 * u1 * u1 - u0 * u0 * u0) / 3.0;
    }
    if (seg_hi >= t2) break;
    seg_lo = seg_hi;
  }
  return p0 * g0 + c1 * g1 + c2 * g2;
}

}  // namespace internal

// Builds the v_k table for the released order statistics k = n-r+1 .. n.
// nodes is the per-window density grid (rounded up so panels halve evenly).
// Throws NumericalError if any quad_error exceeds 1e-6.
inline VkTable ComputeVkTable(const BasePair& pair, std::int64_t n,
                              std::int64_t r, int nodes = 4097) {
  if (n < 1) throw InvariantViolation("ComputeVkTable: n must be >= 1");
  if (r < 1 || r > n) {
    throw InvariantViolation("ComputeVkTable: r must lie in [1, n]");
  }
  if (nodes < 5) {
    throw InvariantViolation("ComputeVkTable: nodes must be >= 5");
  }
  int m = nodes;
  while ((m - 1) % 4 != 0) ++m;

  const auto& cells = pair.CellsByRank();
  const std::size_t nc = cells.size();
  std::vector<double> bnd(nc), low(nc), err(nc), evar(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    bnd[i] = cells[i].rank_hi;
    low[i] = cells[i].rank_lo;
    err[i] = cells[i].error;
    evar[i] = cells[i].error_hi - cells[i].error_lo;
  }

  // Constant-error runs enable the exact path: few distinct error levels
  // (perfect privacy, (eps, delta) curves) integrate in closed form.
  struct Run {
    double lo, hi, value;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < nc; ++i) {
    if (!runs.empty() && std::fabs(err[i] - runs.back().value) <= 1e-14) {
      runs.back().hi = bnd[i];
    } else {
      runs.push_back({low[i], bnd[i], err[i]});
    }
  }
  constexpr std::size_t kExactRunLimit = 64;
  const bool exact_path = runs.size() <= kExactRunLimit;

  constexpr double kTailMass = 1e-12;      // per-side window truncation
  constexpr double kTruncError = 2e-12;    // 2 tails x sup g, with slack
  constexpr double kQuadGate = 1e-6;

  VkTable table;
  table.n = n;
  table.r = r;
  table.grid_size = pair.Resolution();
  const std::size_t count = static_cast<std::size_t>(r);
  table.v.resize(count);
  table.quad_error.resize(count);
  table.disc_error.resize(count);

  std::vector<double> logpdf(static_cast<std::size_t>(m));
  std::vector<double> pdf(static_cast<std::size_t>(m));

  // Sliding window over cells for disc_error: both quantile endpoints are
  // nondecreasing in k, so a monotone max-deque covers all k in O(nc + r).
  std::size_t win_lo = 0, win_hi = 0;
  std::deque<std::size_t> max_deque;
  double prev_tlo = 0.0, prev_thi = 0.0;

  for (std::int64_t k = n - r + 1; k <= n; ++k) {
    const std::size_t out = static_cast<std::size_t>(k - (n - r + 1));
    const double a = static_cast<double>(k);
    const double b = static_cast<double>(n - k + 1);
    double t_lo = RegIncompleteBetaInv(a, b, kTailMass);
    double t_hi = RegIncompleteBetaInv(a, b, 1.0 - kTailMass);
    // Beta(k, n-k+1) is stochastically increasing in k; clamp away any
    // inversion noise so the window never moves backwards.
    t_lo = std::max(t_lo, prev_tlo);
    t_hi = std::max(t_hi, prev_thi);
    prev_tlo = t_lo;
    prev_thi = t_hi;
    if (!(t_lo < t_hi)) {
      throw NumericalError("ComputeVkTable: degenerate quantile window");
    }

    while (win_hi < nc && low[win_hi] < t_hi) {
      while (!max_deque.empty() && evar[max_deque.back()] <= evar[win_hi]) {
        max_deque.pop_back();
      }
      max_deque.push_back(win_hi);
      ++win_hi;
    }
    while (win_lo < nc && bnd[win_lo] <= t_lo) {
      if (!max_deque.empty() && max_deque.front() == win_lo) {
        max_deque.pop_front();
      }
      ++win_lo;
    }
    table.disc_error[out] = max_deque.empty() ? 0.0 : evar[max_deque.front()];

    double vk, quad;
    if (exact_path) {
      double acc = 0.0;
      for (const Run& run : runs) {
        if (run.value == 0.0) continue;
        const double ia = run.lo <= 0.0 ? 0.0 : RegIncompleteBeta(a, b, run.lo);
        const double ib = run.hi >= 1.0 ? 1.0 : RegIncompleteBeta(a, b, run.hi);
        acc += run.value * (ib - ia);
      }
      vk = acc;
      quad = 2e-13;  // incomplete-beta accuracy plus run-merge tolerance
    } else {
      const double logw = std::lgamma(static_cast<double>(n + 1)) -
                          std::lgamma(a) - std::lgamma(b);
      const double h = (t_hi - t_lo) / (m - 1);
      double max_log = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double t = (i == m - 1) ? t_hi : t_lo + h * i;
        double lp = logw;
        if (k > 1) lp += (a - 1.0) * std::log(t);
        if (k < n) lp += (b - 1.0) * std::log1p(-t);
        logpdf[static_cast<std::size_t>(i)] = lp;
        if (lp > max_log) max_log = lp;
      }
      for (int i = 0; i < m; ++i) {
        pdf[static_cast<std::size_t>(i)] =
            std::exp(logpdf[static_cast<std::size_t>(i)] - max_log);
      }

      const auto sweep = [&](int stride) {
        const double hs = h * stride;
        std::size_t ci = static_cast<std::size_t>(
            std::upper_bound(bnd.begin(), bnd.end(), t_lo) - bnd.begin());
        if (ci >= nc) ci = nc - 1;
        double total = 0.0;
        for (int i = 0; i + 2 * stride < m; i += 2 * stride) {
          const int i2 = i + 2 * stride;
          const double t0 = t_lo + h * i;
          const double t2 = (i2 == m - 1) ? t_hi : t_lo + h * i2;
          total += internal::PanelStepIntegral(
              t0, t2, hs, pdf[static_cast<std::size_t>(i)],
              pdf[static_cast<std::size_t>(i + stride)],
              pdf[static_cast<std::size_t>(i2)], bnd, err, ci);
        }
        return total;
      };
      const double fine = sweep(1);
      const double coarse = sweep(2);
      const double scale = std::exp(max_log);
      vk = scale * fine;
      quad = kTruncError + scale * std::fabs(fine - coarse) / 15.0 + 5e-15;
    }

    if (!(quad <= kQuadGate)) {
      throw NumericalError(
          "ComputeVkTable: quadrature error exceeds 1e-6 at k=" +
          std::to_string(k) + " (insufficient grid)");
    }
    table.v[out] = std::min(0.5, std::max(0.0, vk));
    table.quad_error[out] = quad;
  }
  return table;
}

}  // namespace dpaudit

#endif  // DPAUDIT_ORDERSTATS_H_
