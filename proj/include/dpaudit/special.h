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

// Thin wrappers around the special functions the audit pipeline needs.
// Everything funnels through Boost.Math so accuracy and edge-case policy
// are defined in exactly one place.

#ifndef DPAUDIT_SPECIAL_H_
#define DPAUDIT_SPECIAL_H_

#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "dpaudit/errors.h"

namespace dpaudit {

// Standard normal CDF.  Accurate in both tails (goes through erfc).
inline double StdNormalCdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Standard normal quantile.  p must lie in (0, 1).
inline double StdNormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvariantViolation("StdNormalQuantile: p must lie in (0, 1), got " +
                             std::to_string(p));
  }
  static const boost::math::normal_distribution<double> unit_normal(0.0, 1.0);
  return boost::math::quantile(unit_normal, p);
}

// Regularized incomplete beta function I_x(a, b).
inline double RegIncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

// Inverse of the regularized incomplete beta function in x.
inline double RegIncompleteBetaInv(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return boost::math::ibeta_inv(a, b, p);
}

}  // namespace dpaudit

#endif  // DPAUDIT_SPECIAL_H_
