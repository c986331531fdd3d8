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

// Lower-tail probabilities for sums of independent Bernoulli variables.
//
// The audit asks: if guess k errs with probability v_k independently,
// how unlikely is it to see at most u errors in total?  ChernoffTail
// gives the standard exponential upper bound
//
//   P[S <= u] <= inf_{lambda <= 0} exp(-lambda u + sum_k ln(1 + v_k (e^lambda - 1))),
//
// evaluated by bisecting the (increasing) derivative of the convex
// exponent.  The bound is exactly prod_k (1 - v_k) at u = 0 and exactly 1
// once u >= sum_k v_k.  ExactPoissonBinomialTail evaluates P[S <= u]
// exactly with a log-space convolution, for small instances and for
// validating the bound.
//
// Both are nondecreasing in u and nonincreasing under any pointwise
// increase of v.  Consequently, lowering any v_k can only enlarge the
// reported tail probability: callers that hold v_k up to a certified
// error budget stay conservative by subtracting that budget first (see
// the auditor).

#ifndef DPAUDIT_TAILBOUND_H_
#define DPAUDIT_TAILBOUND_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dpaudit/errors.h"

namespace dpaudit {

namespace internal {

inline double LogAddExp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi));
}

inline void ValidateBernoulliList(const std::vector<double>& v,
                                  const char* who) {
  for (double p : v) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvariantViolation(std::string(who) +
                               ": probabilities must lie in [0, 1]");
    }
  }
}

}  // namespace internal

// Chernoff upper bound on P[sum_k Bernoulli(v_k) <= u].
inline double ChernoffTail(const std::vector<double>& v_in, std::int64_t u) {
  internal::ValidateBernoulliList(v_in, "ChernoffTail");
  if (u < 0) throw InvariantViolation("ChernoffTail: u must be >= 0");

  // Certain errors only shift the count: with m entries at exactly 1,
  // P[S <= u] = P[S' <= u - m] over the remaining entries.  Splitting
  // them off keeps the exponent finite at very negative tilts.
  std::vector<double> v;
  v.reserve(v_in.size());
  for (double p : v_in) {
    if (p >= 1.0) {
      --u;
    } else if (p > 0.0) {
      v.push_back(p);
    }
  }
  if (u < 0) return 0.0;  // more certain errors than the threshold allows

  double mean = 0.0;
  for (double p : v) mean += p;
  if (static_cast<double>(u) >= mean) return 1.0;

  if (u == 0) {
    // The lambda -> -inf limit is exact: P[S = 0] = prod (1 - v_k).
    double log_prod = 0.0;
    for (double p : v) log_prod += std::log1p(-p);
    return std::exp(log_prod);
  }

  // The exponent kappa(lambda) = -lambda u + sum ln(1 + v_k expm1(lambda))
  // is convex with kappa'(0) = mean - u > 0 and kappa'(-inf) = -u < 0;
  // bisect the derivative's sign change.
  const double target = static_cast<double>(u);
  const auto derivative = [&](double lambda) {
    const double em1 = std::expm1(lambda);
    const double elam = std::exp(lambda);
    double d = -target;
    for (double p : v) d += p * elam / (1.0 + p * em1);
    return d;
  };
  double lo = -700.0, hi = 0.0;
  for (int iter = 0; iter < 120; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  const double em1 = std::expm1(lambda);
  double exponent = -lambda * target;
  for (double p : v) exponent += std::log1p(p * em1);
  return std::min(1.0, std::exp(exponent));
}

// Exact P[sum_k Bernoulli(v_k) <= u] by log-space dynamic programming.
// Cost is O(|v| * u); throws InvariantViolation beyond a work budget.
inline double ExactPoissonBinomialTail(const std::vector<double>& v,
                                       std::int64_t u) {
  internal::ValidateBernoulliList(v, "ExactPoissonBinomialTail");
  if (u < 0) {
    throw InvariantViolation("ExactPoissonBinomialTail: u must be >= 0");
  }
  const std::int64_t r = static_cast<std::int64_t>(v.size());
  if (u >= r) return 1.0;
  if (static_cast<double>(r + 1) * static_cast<double>(u + 1) > 2e8) {
    throw InvariantViolation(
        "ExactPoissonBinomialTail: instance exceeds the exact-evaluation "
        "budget; use ChernoffTail");
  }

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> logc(static_cast<std::size_t>(u) + 1, kNegInf);
  logc[0] = 0.0;  // P[S = 0] = 1 before any draws
  for (double p : v) {
    const double log_stay = p < 1.0 ? std::log1p(-p) : kNegInf;
    const double log_step = p > 0.0 ? std::log(p) : kNegInf;
    for (std::int64_t j = u; j >= 0; --j) {
      const std::size_t idx = static_cast<std::size_t>(j);
      const double stay = logc[idx] + log_stay;
      const double step = j > 0 ? logc[idx - 1] + log_step : kNegInf;
      logc[idx] = internal::LogAddExp(stay, step);
    }
  }
  double max_log = kNegInf;
  for (double c : logc) max_log = std::max(max_log, c);
  if (max_log == kNegInf) return 0.0;
  double sum = 0.0;
  for (double c : logc) sum += std::exp(c - max_log);
  return std::min(1.0, std::exp(max_log) * sum);
}

}  // namespace dpaudit

#endif  // DPAUDIT_TAILBOUND_H_
