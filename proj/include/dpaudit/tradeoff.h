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

// Trade-off curves.
//
// A trade-off curve f: [0,1] -> [0,1] maps the type-I error of a
// hypothesis test distinguishing two neighboring datasets to the smallest
// achievable type-II error.  Curves are convex, continuous and
// non-increasing, with f(x) <= 1 - x; lower curves mean weaker privacy.
// Four parametric families are supported:
//
//   * Gdp(mu):            Gaussian DP, f(x) = Phi(Phi^{-1}(1-x) - mu).
//   * LaplaceDp(mu):      trade-off of Lap(0,1) vs Lap(mu,1)
//                         (the Laplace mechanism with noise scale 1/mu).
//   * EpsDelta(eps, del): f(x) = max(0, 1-del-e^eps x, e^-eps (1-del-x)).
//   * SubsampledGdp(mu, q): Gaussian DP amplified by Poisson subsampling
//                         at rate q; built numerically (see below).
//
// The subsampled family is constructed by symmetrizing and convexifying
// the one-sided amplified curve f_q(x) = q G_mu(x) + (1-q)(1-x): sample
// f_q on a 2^16 grid, form min(f_q, f_q^{-1}) with the inverse obtained by
// monotone interpolation, mirror the point set across the diagonal, and
// take the lower convex hull.  The mirrored point set makes the resulting
// piecewise-linear curve exactly self-inverse; interpolation error is
// below 1e-6.

#ifndef DPAUDIT_TRADEOFF_H_
#define DPAUDIT_TRADEOFF_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpaudit/errors.h"
#include "dpaudit/special.h"

namespace dpaudit {

enum class Family {
  kGdp,
  kLaplaceDp,
  kEpsDelta,
  kSubsampledGdp,
};

inline const char* FamilyName(Family family) {
  switch (family) {
    case Family::kGdp:
      return "gdp";
    case Family::kLaplaceDp:
      return "laplace";
    case Family::kEpsDelta:
      return "epsdelta";
    case Family::kSubsampledGdp:
      return "subsampled-gdp";
  }
  throw InvariantViolation("FamilyName: unknown family");
}

inline Family FamilyFromName(const std::string& name) {
  if (name == "gdp") return Family::kGdp;
  if (name == "laplace") return Family::kLaplaceDp;
  if (name == "epsdelta") return Family::kEpsDelta;
  if (name == "subsampled-gdp") return Family::kSubsampledGdp;
  throw InvariantViolation("unknown trade-off family: " + name);
}

// Closed interval of slopes [lo, hi] attained by the subdifferential of a
// convex curve at a point; lo == hi wherever the curve is differentiable.
struct SlopeInterval {
  double lo = 0.0;
  double hi = 0.0;
  double Mid() const { return 0.5 * (lo + hi); }
};

class TradeoffCurve {
 public:
  static TradeoffCurve Gdp(double mu) {
    RequireFinite(mu, "mu");
    if (mu < 0.0) throw InvariantViolation("Gdp: mu must be >= 0");
    TradeoffCurve curve(Family::kGdp);
    curve.mu_ = mu;
    return curve;
  }

  static TradeoffCurve LaplaceDp(double mu) {
    RequireFinite(mu, "mu");
    if (mu < 0.0) throw InvariantViolation("LaplaceDp: mu must be >= 0");
    TradeoffCurve curve(Family::kLaplaceDp);
    curve.mu_ = mu;
    return curve;
  }

  static TradeoffCurve EpsDelta(double eps, double delta) {
    RequireFinite(eps, "eps");
    RequireFinite(delta, "delta");
    if (eps < 0.0) throw InvariantViolation("EpsDelta: eps must be >= 0");
    if (delta < 0.0 || delta > 1.0) {
      throw InvariantViolation("EpsDelta: delta must lie in [0, 1]");
    }
    TradeoffCurve curve(Family::kEpsDelta);
    curve.eps_ = eps;
    curve.delta_ = delta;
    return curve;
  }

  static TradeoffCurve SubsampledGdp(double mu, double q) {
    RequireFinite(mu, "mu");
    RequireFinite(q, "q");
    if (mu < 0.0) throw InvariantViolation("SubsampledGdp: mu must be >= 0");
    if (q < 0.0 || q > 1.0) {
      throw InvariantViolation("SubsampledGdp: q must lie in [0, 1]");
    }
    TradeoffCurve curve(Family::kSubsampledGdp);
    curve.mu_ = mu;
    curve.q_ = q;
    curve.BuildSubsampledHull();
    return curve;
  }

  Family family() const { return family_; }
  double mu() const { return mu_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  double q() const { return q_; }

  // The scalar parameter varied by the lower-bound search.
  double Param() const {
    return family_ == Family::kEpsDelta ? eps_ : mu_;
  }

  // f(x).  Throws if x is outside [0, 1].
  double Eval(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvariantViolation("TradeoffCurve::Eval: x must lie in [0, 1]");
    }
    switch (family_) {
      case Family::kGdp:
        return EvalGdp(x);
      case Family::kLaplaceDp:
        return EvalLaplace(x);
      case Family::kEpsDelta:
        return EvalEpsDelta(x);
      case Family::kSubsampledGdp:
        return EvalHull(x);
    }
    throw InvariantViolation("TradeoffCurve::Eval: unknown family");
  }

  double FAtZero() const { return Eval(0.0); }

  // Subdifferential of f at x in [0, 1].  For convex f the interval is
  // [left derivative, right derivative] at interior points; it is
  // degenerate wherever f is differentiable.  At the endpoints the
  // one-sided subdifferential is returned: {-inf, f'(0+)} at x == 0 and
  // {f'(1-), +inf} at x == 1, with an infinite one-sided slope where the
  // derivative is unbounded (e.g. Gaussian curves at x == 0).
  SlopeInterval Subgradient(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvariantViolation(
          "TradeoffCurve::Subgradient: x must lie in [0, 1]");
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (x == 0.0) return {-kInf, RightDerivAtZero()};
    if (x == 1.0) return {LeftDerivAtOne(), kInf};
    switch (family_) {
      case Family::kGdp: {
        // f'(x) = -exp(mu t - mu^2/2) with t = Phi^{-1}(1 - x).
        const double t = -StdNormalQuantile(x);
        const double slope = -std::exp(mu_ * t - 0.5 * mu_ * mu_);
        return {slope, slope};
      }
      case Family::kLaplaceDp: {
        const double lo_break = 0.5 * std::exp(-mu_);
        if (x < lo_break) {
          const double slope = -std::exp(mu_);
          return {slope, slope};
        }
        if (x <= 0.5) {
          const double slope = -std::exp(-mu_) / (4.0 * x * x);
          return {slope, slope};
        }
        const double slope = -std::exp(-mu_);
        return {slope, slope};
      }
      case Family::kEpsDelta: {
        const double x1 = (1.0 - delta_) / (1.0 + std::exp(eps_));
        const double x2 = 1.0 - delta_;
        if (x < x1) return {-std::exp(eps_), -std::exp(eps_)};
        if (x == x1) return {-std::exp(eps_), -std::exp(-eps_)};
        if (x < x2) return {-std::exp(-eps_), -std::exp(-eps_)};
        if (x == x2) return {-std::exp(-eps_), 0.0};
        return {0.0, 0.0};
      }
      case Family::kSubsampledGdp:
        return HullSubgradient(x);
    }
    throw InvariantViolation("TradeoffCurve::Subgradient: unknown family");
  }

  // Interior points where the curve changes analytic piece.  The density
  // -f'(1-x) used by the base-distribution construction may jump at these
  // points, so grids are split there.  Empty for smooth families.
  std::vector<double> DensityBreakpoints() const {
    switch (family_) {
      case Family::kGdp:
        return {};
      case Family::kLaplaceDp: {
        std::vector<double> breaks = {0.5 * std::exp(-mu_), 0.5};
        return FilterInterior(std::move(breaks));
      }
      case Family::kEpsDelta: {
        std::vector<double> breaks = {
            (1.0 - delta_) / (1.0 + std::exp(eps_)), 1.0 - delta_};
        return FilterInterior(std::move(breaks));
      }
      case Family::kSubsampledGdp: {
        std::vector<double> breaks(hull_x_.begin() + 1, hull_x_.end() - 1);
        return FilterInterior(std::move(breaks));
      }
    }
    throw InvariantViolation("DensityBreakpoints: unknown family");
  }

  nlohmann::json ToJson() const {
    nlohmann::json out;
    out["family"] = FamilyName(family_);
    switch (family_) {
      case Family::kGdp:
      case Family::kLaplaceDp:
        out["mu"] = mu_;
        break;
      case Family::kEpsDelta:
        out["eps"] = eps_;
        out["delta"] = delta_;
        break;
      case Family::kSubsampledGdp:
        out["mu"] = mu_;
        out["q"] = q_;
        break;
    }
    return out;
  }

  static TradeoffCurve FromJson(const nlohmann::json& in) {
    if (!in.is_object() || !in.contains("family")) {
      throw InvariantViolation("curve JSON must be an object with 'family'");
    }
    const Family family = FamilyFromName(in.at("family").get<std::string>());
    switch (family) {
      case Family::kGdp:
        return Gdp(in.at("mu").get<double>());
      case Family::kLaplaceDp:
        return LaplaceDp(in.at("mu").get<double>());
      case Family::kEpsDelta:
        return EpsDelta(in.at("eps").get<double>(),
                        in.at("delta").get<double>());
      case Family::kSubsampledGdp:
        return SubsampledGdp(in.at("mu").get<double>(), in.at("q").get<double>());
    }
    throw InvariantViolation("curve JSON: unknown family");
  }

 private:
  explicit TradeoffCurve(Family family) : family_(family) {}

  static void RequireFinite(double value, const char* name) {
    if (!std::isfinite(value)) {
      throw InvariantViolation(std::string("curve parameter ") + name +
                               " must be finite");
    }
  }

  static std::vector<double> FilterInterior(std::vector<double> xs) {
    std::vector<double> out;
    for (double x : xs) {
      if (x > 0.0 && x < 1.0) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  double EvalGdp(double x) const {
    if (x == 0.0) return 1.0;
    if (x == 1.0) return 0.0;
    // Zero noise-to-signal is exactly the no-information line; computing it
    // as Phi(Phi^{-1}(1 - x)) would leave ulp-level noise that turns exact
    // score ties into an arbitrary ranking.
    if (mu_ == 0.0) return 1.0 - x;
    // Phi^{-1}(1 - x) == -Phi^{-1}(x), evaluated this way to keep full
    // precision when x is close to 1.
    const double t = -StdNormalQuantile(x);
    return StdNormalCdf(t - mu_);
  }

  double EvalLaplace(double x) const {
    const double lo_break = 0.5 * std::exp(-mu_);
    if (x < lo_break) return 1.0 - std::exp(mu_) * x;
    if (x <= 0.5) return std::exp(-mu_) / (4.0 * x);
    return std::exp(-mu_) * (1.0 - x);
  }

  double EvalEpsDelta(double x) const {
    const double a = 1.0 - delta_ - std::exp(eps_) * x;
    const double b = std::exp(-eps_) * (1.0 - delta_ - x);
    return std::max({0.0, a, b});
  }

  double EvalHull(double x) const {
    const auto& xs = hull_x_;
    if (x <= xs.front()) return hull_y_.front();
    if (x >= xs.back()) return hull_y_.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const size_t hi = static_cast<size_t>(it - xs.begin());
    const size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    const double y = hull_y_[lo] + w * (hull_y_[hi] - hull_y_[lo]);
    return std::max(0.0, y);
  }

  double RightDerivAtZero() const {
    switch (family_) {
      case Family::kGdp:
        return mu_ == 0.0 ? -1.0 : -std::numeric_limits<double>::infinity();
      case Family::kLaplaceDp:
        return -std::exp(mu_);
      case Family::kEpsDelta:
        return delta_ >= 1.0 ? 0.0 : -std::exp(eps_);
      case Family::kSubsampledGdp:
        return SegmentSlope(0);
    }
    throw InvariantViolation("RightDerivAtZero: unknown family");
  }

  double LeftDerivAtOne() const {
    switch (family_) {
      case Family::kGdp:
        return mu_ == 0.0 ? -1.0 : 0.0;
      case Family::kLaplaceDp:
        return -std::exp(-mu_);
      case Family::kEpsDelta:
        return delta_ > 0.0 ? 0.0 : -std::exp(-eps_);
      case Family::kSubsampledGdp:
        return SegmentSlope(hull_x_.size() - 2);
    }
    throw InvariantViolation("LeftDerivAtOne: unknown family");
  }

  SlopeInterval HullSubgradient(double x) const {
    const auto& xs = hull_x_;
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    size_t idx = static_cast<size_t>(it - xs.begin());
    if (idx < xs.size() && xs[idx] == x) {
      // Exactly at a vertex: the subdifferential spans the two adjacent
      // segment slopes.
      const double left = idx == 0 ? SegmentSlope(0) : SegmentSlope(idx - 1);
      const double right =
          idx + 1 >= xs.size() ? SegmentSlope(xs.size() - 2) : SegmentSlope(idx);
      return {left, right};
    }
    const double slope = SegmentSlope(idx == 0 ? 0 : idx - 1);
    return {slope, slope};
  }

  double SegmentSlope(size_t segment) const {
    return (hull_y_[segment + 1] - hull_y_[segment]) /
           (hull_x_[segment + 1] - hull_x_[segment]);
  }

  void BuildSubsampledHull() {
    constexpr int kGridSize = 1 << 16;
    const TradeoffCurve base = Gdp(mu_);
    std::vector<double> xs(kGridSize + 1);
    std::vector<double> fq(kGridSize + 1);
    for (int i = 0; i <= kGridSize; ++i) {
      const double x = static_cast<double>(i) / kGridSize;
      xs[i] = x;
      fq[i] = q_ * base.Eval(x) + (1.0 - q_) * (1.0 - x);
    }
    // fq is strictly decreasing from 1 to 0 (slope <= -(1-q); for q == 1
    // the Gaussian curve itself is strictly decreasing), so its inverse is
    // well defined and monotone interpolation is safe.
    std::vector<std::pair<double, double>> points;
    points.reserve(2 * (kGridSize + 1));
    for (int i = 0; i <= kGridSize; ++i) {
      const double inv = InterpolateInverse(xs, fq, xs[i]);
      const double h = std::min(fq[i], inv);
      points.emplace_back(xs[i], h);
      points.emplace_back(h, xs[i]);  // mirror across the diagonal
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    // Lower convex hull (monotone chain).
    std::vector<std::pair<double, double>> hull;
    hull.reserve(points.size());
    for (const auto& p : points) {
      while (hull.size() >= 2) {
        const auto& a = hull[hull.size() - 2];
        const auto& b = hull[hull.size() - 1];
        const double cross = (b.first - a.first) * (p.second - a.second) -
                             (b.second - a.second) * (p.first - a.first);
        if (cross <= 0.0) {
          hull.pop_back();
        } else {
          break;
        }
      }
      // Drop duplicate x with higher y (keep the lower envelope).
      if (!hull.empty() && hull.back().first == p.first) {
        if (p.second >= hull.back().second) continue;
        hull.pop_back();
      }
      hull.push_back(p);
    }
    hull_x_.resize(hull.size());
    hull_y_.resize(hull.size());
    for (size_t i = 0; i < hull.size(); ++i) {
      hull_x_[i] = hull[i].first;
      hull_y_[i] = std::max(0.0, hull[i].second);
    }
    if (hull_x_.size() < 2 || hull_x_.front() != 0.0 || hull_x_.back() != 1.0) {
      throw NumericalError("SubsampledGdp: hull construction failed");
    }
  }

  static double InterpolateInverse(const std::vector<double>& xs,
                                   const std::vector<double>& fq, double y) {
    // Find the segment of the strictly decreasing sequence fq containing y
    // and invert linearly.
    if (y >= fq.front()) return xs.front();
    if (y <= fq.back()) return xs.back();
    size_t lo = 0;
    size_t hi = fq.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (fq[mid] > y) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double w = (fq[lo] - y) / (fq[lo] - fq[hi]);
    return xs[lo] + w * (xs[hi] - xs[lo]);
  }

  Family family_;
  double mu_ = 0.0;
  double eps_ = 0.0;
  double delta_ = 0.0;
  double q_ = 1.0;
  std::vector<double> hull_x_;
  std::vector<double> hull_y_;
};

// Solves f(a) = a by bisection.  The gap f(a) - a is strictly decreasing
// with opposite signs at the interval ends, so the root is unique.
inline double FixedPointAlphaOpt(const TradeoffCurve& curve) {
  double lo = 0.0;
  double hi = 1.0;
  double gap_lo = curve.FAtZero();  // f(0) - 0 >= 0
  if (gap_lo <= 0.0) return 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double gap = curve.Eval(mid) - mid;
    if (gap >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-18) break;
  }
  const double alpha = 0.5 * (lo + hi);
  if (std::abs(curve.Eval(alpha) - alpha) > 1e-12) {
    throw NumericalError("FixedPointAlphaOpt: bisection did not converge");
  }
  return alpha;
}

namespace internal {

// sup_x (1 - delta - e^a x - f(x)) over [0, 1].  The objective is concave
// (f is convex), so a dense grid plus the curve's own breakpoints brackets
// the maximum and golden-section search refines it.  For large a the
// maximizer sits at exponentially small x, so the uniform grid is merged
// with a log-spaced one and the penalty term switches to log space before
// it would overflow.
inline double EpsDeltaSupGap(const TradeoffCurve& curve, double delta,
                             double a) {
  const double ea = a <= 700.0 ? std::exp(a) : 0.0;
  const auto gap = [&](double x) {
    if (x == 0.0) return 1.0 - delta - curve.Eval(0.0);
    double term;
    if (a <= 700.0) {
      term = ea * x;
    } else {
      const double log_term = a + std::log(x);
      if (log_term > 709.0) return -std::numeric_limits<double>::infinity();
      term = std::exp(log_term);
    }
    return 1.0 - delta - term - curve.Eval(x);
  };

  constexpr int kGridSize = 4096;
  std::vector<double> candidates;
  candidates.reserve(kGridSize + 1400);
  for (int i = 1; i <= kGridSize; ++i) {
    candidates.push_back(static_cast<double>(i) / kGridSize);
  }
  for (double x = 1e-300; x < 1.0 / kGridSize; x *= 4.0) {
    candidates.push_back(x);
  }
  for (double x : curve.DensityBreakpoints()) candidates.push_back(x);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  double best = gap(0.0);
  size_t best_idx = candidates.size();  // sentinel meaning "x == 0"
  for (size_t i = 0; i < candidates.size(); ++i) {
    const double g = gap(candidates[i]);
    if (g > best) {
      best = g;
      best_idx = i;
    }
  }

  // Golden-section refinement on the bracket around the best candidate
  // (valid because a concave function is unimodal).
  double lo = 0.0;
  double hi = 1.0;
  if (best_idx == candidates.size()) {
    hi = candidates.front();
  } else {
    lo = best_idx == 0 ? 0.0 : candidates[best_idx - 1];
    hi = best_idx + 1 < candidates.size() ? candidates[best_idx + 1] : 1.0;
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double g1 = gap(x1);
  double g2 = gap(x2);
  for (int iter = 0; iter < 90; ++iter) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kInvPhi * (hi - lo);
      g2 = gap(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kInvPhi * (hi - lo);
      g1 = gap(x1);
    }
  }
  best = std::max({best, g1, g2});
  return best;
}

}  // namespace internal

// Smallest eps such that f(x) >= 1 - delta - e^eps x for all x, i.e. the
// (eps, delta) point on or below the curve at the requested delta.
// Returns +infinity when delta < 1 - f(0) (the curve's mass at zero makes
// any finite eps claim false) and clamps at zero from below.
inline double FdpToEpsDelta(const TradeoffCurve& curve, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvariantViolation("FdpToEpsDelta: delta must lie in [0, 1]");
  }
  // Feasibility is monotone in a: sup-gap decreases as a grows.
  constexpr double kSupSlack = 1e-13;
  // The constraint at x = 0 reads 1 - delta <= f(0); no finite eps can repair
  // a violation there.  Gate with the same slack the feasibility test uses so
  // that delta == 1 - f(0) stays finite under floating-point rounding.
  const double f0 = curve.FAtZero();
  if (1.0 - delta - f0 > kSupSlack) {
    return std::numeric_limits<double>::infinity();
  }
  const auto feasible = [&](double a) {
    return internal::EpsDeltaSupGap(curve, delta, a) <= kSupSlack;
  };
  if (feasible(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 64.0;
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e7) {
      throw NumericalError("FdpToEpsDelta: no finite eps found");
    }
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::max(0.0, hi);
}

}  // namespace dpaudit

#endif  // DPAUDIT_TRADEOFF_H_
