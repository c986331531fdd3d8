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

#include "dpaudit/tradeoff.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_oracles.h"

namespace dpaudit {
namespace {

using ::dpaudit_test::OracleGdpEpsOfDelta;
using ::dpaudit_test::OracleLaplaceCdf;
using ::dpaudit_test::OracleNormalCdf;
using ::dpaudit_test::OracleNormalQuantile;

// Frozen with a 50-digit arbitrary-precision computation.
constexpr double kPhiMinus1 = 0.15865525393145705;       // Phi(-1)
constexpr double kPhiMinusHalf = 0.30853753872598690;    // Phi(-1/2)
constexpr double kGdp08At025 = 0.45005980551750863;      // mu=0.8, x=0.25
constexpr double kGdp20At010 = 0.23624041589411687;      // mu=2.0, x=0.10
constexpr double kEpsDelta1e01FixedPoint = 0.24204727923299561;  // 0.9/(1+e)
constexpr double kLaplace08FixedPoint = 0.33516002301781965;     // e^-0.4/2
constexpr double kEpsGdp08Delta1em5 = 3.3869331861562637;
constexpr double kEpsGdp10Delta1em5 = 4.3771780956812246;
constexpr double kEpsGdp08Delta1em4 = 2.9246905117411854;
constexpr double kEpsLap08Delta1em5 = 0.79997999851067187;

std::vector<TradeoffCurve> AllFamilies() {
  return {TradeoffCurve::Gdp(0.8), TradeoffCurve::Gdp(2.0),
          TradeoffCurve::LaplaceDp(0.8), TradeoffCurve::LaplaceDp(2.5),
          TradeoffCurve::EpsDelta(1.0, 0.01), TradeoffCurve::EpsDelta(3.2, 0.1),
          TradeoffCurve::SubsampledGdp(1.2, 0.25),
          TradeoffCurve::SubsampledGdp(0.6, 0.8)};
}

TEST(TradeoffGdp, MatchesFrozenValues) {
  EXPECT_NEAR(TradeoffCurve::Gdp(1.0).Eval(0.5), kPhiMinus1, 1e-14);
  EXPECT_NEAR(TradeoffCurve::Gdp(0.8).Eval(0.25), kGdp08At025, 1e-14);
  EXPECT_NEAR(TradeoffCurve::Gdp(2.0).Eval(0.1), kGdp20At010, 1e-14);
  EXPECT_DOUBLE_EQ(TradeoffCurve::Gdp(1.7).Eval(0.0), 1.0);
  EXPECT_DOUBLE_EQ(TradeoffCurve::Gdp(1.7).Eval(1.0), 0.0);
}

// The curve must coincide with the ROC of the likelihood-ratio test
// between N(0,1) and N(mu,1): alpha(t) = 1 - Phi(t), beta(t) = Phi(t-mu).
TEST(TradeoffGdp, MatchesThresholdSweepOracle) {
  for (double mu : {0.4, 1.0, 2.7}) {
    const TradeoffCurve curve = TradeoffCurve::Gdp(mu);
    for (double t = -8.0; t <= 8.0; t += 0.0625) {
      const double alpha = OracleNormalCdf(-t);  // == 1 - Phi(t), no cancellation
      const double beta = OracleNormalCdf(t - mu);
      EXPECT_NEAR(curve.Eval(alpha), beta, 1e-11)
          << "mu=" << mu << " t=" << t;
    }
  }
}

// Same idea for the Laplace trade-off: thresholding the likelihood ratio
// between Lap(0,1) and Lap(mu,1) gives alpha(t) = 1 - F_0(t),
// beta(t) = F_mu(t).
TEST(TradeoffLaplace, MatchesThresholdSweepOracle) {
  for (double mu : {0.3, 0.8, 1.6}) {
    const TradeoffCurve curve = TradeoffCurve::LaplaceDp(mu);
    for (double t = -10.0; t <= 10.0; t += 0.0625) {
      const double alpha = 1.0 - OracleLaplaceCdf(t, 0.0);
      const double beta = OracleLaplaceCdf(t, mu);
      EXPECT_NEAR(curve.Eval(alpha), beta, 1e-12)
          << "mu=" << mu << " t=" << t;
    }
  }
}

TEST(TradeoffEpsDelta, PiecewiseShape) {
  const TradeoffCurve curve = TradeoffCurve::EpsDelta(1.0, 0.1);
  EXPECT_DOUBLE_EQ(curve.Eval(0.0), 0.9);
  EXPECT_DOUBLE_EQ(curve.Eval(1.0), 0.0);
  // Steep branch.
  EXPECT_NEAR(curve.Eval(0.05), 1.0 - 0.1 - std::exp(1.0) * 0.05, 1e-15);
  // Shallow branch.
  EXPECT_NEAR(curve.Eval(0.5), std::exp(-1.0) * (0.9 - 0.5), 1e-15);
  // Flat region beyond 1 - delta.
  EXPECT_DOUBLE_EQ(curve.Eval(0.95), 0.0);
}

TEST(TradeoffAll, ZeroParameterIsPerfectPrivacy) {
  const std::vector<TradeoffCurve> curves = {
      TradeoffCurve::Gdp(0.0), TradeoffCurve::LaplaceDp(0.0),
      TradeoffCurve::EpsDelta(0.0, 0.0), TradeoffCurve::SubsampledGdp(0.0, 0.5),
      TradeoffCurve::SubsampledGdp(1.3, 0.0)};
  for (const auto& curve : curves) {
    for (double x = 0.0; x <= 1.0; x += 0.01) {
      EXPECT_NEAR(curve.Eval(x), 1.0 - x, 1e-9);
    }
  }
}

TEST(TradeoffAll, ConvexNonincreasingAndBounded) {
  for (const auto& curve : AllFamilies()) {
    double prev = curve.Eval(0.0);
    for (int i = 1; i <= 512; ++i) {
      const double x = i / 512.0;
      const double y = curve.Eval(x);
      EXPECT_LE(y, prev + 1e-12);
      EXPECT_GE(y, 0.0);
      EXPECT_LE(y, 1.0 - x + 1e-12);
      prev = y;
    }
    // Midpoint convexity on a shifted grid.
    for (int i = 1; i < 256; ++i) {
      const double x0 = (i - 1) / 256.0;
      const double x1 = (i + 1) / 256.0;
      const double mid = i / 256.0;
      EXPECT_LE(curve.Eval(mid),
                0.5 * (curve.Eval(x0) + curve.Eval(x1)) + 1e-12);
    }
  }
}

TEST(TradeoffAll, LargerParameterGivesLowerCurve) {
  for (double x = 0.05; x < 1.0; x += 0.05) {
    EXPECT_GE(TradeoffCurve::Gdp(0.5).Eval(x),
              TradeoffCurve::Gdp(1.5).Eval(x) - 1e-12);
    EXPECT_GE(TradeoffCurve::LaplaceDp(0.5).Eval(x),
              TradeoffCurve::LaplaceDp(1.5).Eval(x) - 1e-12);
    EXPECT_GE(TradeoffCurve::EpsDelta(0.5, 0.01).Eval(x),
              TradeoffCurve::EpsDelta(1.5, 0.01).Eval(x) - 1e-12);
    EXPECT_GE(TradeoffCurve::SubsampledGdp(0.5, 0.3).Eval(x),
              TradeoffCurve::SubsampledGdp(1.5, 0.3).Eval(x) - 1e-9);
    // Lower sampling rate amplifies privacy.
    EXPECT_GE(TradeoffCurve::SubsampledGdp(1.0, 0.2).Eval(x),
              TradeoffCurve::SubsampledGdp(1.0, 0.7).Eval(x) - 1e-9);
  }
}

// All four families are symmetric: applying the curve twice returns the
// argument.  For (eps, delta) curves with delta > 0 this holds on the
// region where the curve is positive (beyond x = 1 - delta the curve is
// identically zero and carries no more information).
TEST(TradeoffAll, CurveIsSelfInverse) {
  for (const auto& curve : AllFamilies()) {
    const double support_end =
        curve.family() == Family::kEpsDelta ? 1.0 - curve.delta() : 1.0;
    for (int i = 1; i < 200; ++i) {
      const double x = i / 200.0;
      if (x >= support_end) break;
      EXPECT_NEAR(curve.Eval(curve.Eval(x)), x, 1e-9)
          << FamilyName(curve.family()) << " x=" << x;
    }
  }
}

TEST(TradeoffFixedPoint, MatchesClosedForms) {
  EXPECT_NEAR(FixedPointAlphaOpt(TradeoffCurve::Gdp(1.0)), kPhiMinusHalf,
              1e-12);
  EXPECT_NEAR(FixedPointAlphaOpt(TradeoffCurve::EpsDelta(1.0, 0.1)),
              kEpsDelta1e01FixedPoint, 1e-12);
  EXPECT_NEAR(FixedPointAlphaOpt(TradeoffCurve::LaplaceDp(0.8)),
              kLaplace08FixedPoint, 1e-12);
  EXPECT_NEAR(FixedPointAlphaOpt(TradeoffCurve::Gdp(0.0)), 0.5, 1e-12);
}

TEST(TradeoffFixedPoint, ResidualSmallForAllFamilies) {
  for (const auto& curve : AllFamilies()) {
    const double alpha = FixedPointAlphaOpt(curve);
    EXPECT_NEAR(curve.Eval(alpha), alpha, 1e-12);
    EXPECT_GT(alpha, 0.0);
    EXPECT_LT(alpha, 0.5 + 1e-12);
  }
}

TEST(TradeoffEpsConversion, GaussianMatchesAnalyticOracle) {
  EXPECT_NEAR(FdpToEpsDelta(TradeoffCurve::Gdp(0.8), 1e-5),
              kEpsGdp08Delta1em5, 1e-7);
  EXPECT_NEAR(FdpToEpsDelta(TradeoffCurve::Gdp(1.0), 1e-5),
              kEpsGdp10Delta1em5, 1e-7);
  EXPECT_NEAR(FdpToEpsDelta(TradeoffCurve::Gdp(0.8), 1e-4),
              kEpsGdp08Delta1em4, 1e-7);
  // Same conversion through the runtime oracle for a parameter sweep.
  for (double mu : {0.3, 0.6, 1.1, 1.9}) {
    for (double delta : {1e-2, 1e-4, 1e-6}) {
      EXPECT_NEAR(FdpToEpsDelta(TradeoffCurve::Gdp(mu), delta),
                  OracleGdpEpsOfDelta(mu, delta), 1e-6)
          << "mu=" << mu << " delta=" << delta;
    }
  }
}

TEST(TradeoffEpsConversion, LaplaceMatchesFrozenValue) {
  EXPECT_NEAR(FdpToEpsDelta(TradeoffCurve::LaplaceDp(0.8), 1e-5),
              kEpsLap08Delta1em5, 1e-6);
}

TEST(TradeoffEpsConversion, EpsDeltaRoundTrip) {
  for (double eps : {0.5, 1.0, 3.2}) {
    for (double delta : {0.01, 0.3}) {
      const TradeoffCurve curve = TradeoffCurve::EpsDelta(eps, delta);
      EXPECT_NEAR(FdpToEpsDelta(curve, delta), eps, 1e-8);
      // Asking for a smaller delta than the curve's own mass at zero is
      // unanswerable with any finite eps.
      EXPECT_TRUE(std::isinf(FdpToEpsDelta(curve, delta / 2.0)));
    }
  }
  EXPECT_TRUE(std::isinf(FdpToEpsDelta(TradeoffCurve::EpsDelta(1.0, 0.1), 0.05)));
}

TEST(TradeoffEpsConversion, DegenerateAndMonotoneCases) {
  EXPECT_DOUBLE_EQ(FdpToEpsDelta(TradeoffCurve::Gdp(0.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(FdpToEpsDelta(TradeoffCurve::Gdp(0.0), 1e-3), 0.0);
  // eps is nonincreasing in the reported delta.
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-6, 1e-4, 1e-2, 0.1}) {
    const double eps = FdpToEpsDelta(TradeoffCurve::Gdp(1.0), delta);
    EXPECT_LE(eps, prev + 1e-9);
    prev = eps;
  }
  // Subsampling amplification must lower the conversion.
  EXPECT_LT(FdpToEpsDelta(TradeoffCurve::SubsampledGdp(1.0, 0.3), 1e-5),
            FdpToEpsDelta(TradeoffCurve::Gdp(1.0), 1e-5));
}

TEST(TradeoffSubsampled, ReducesToEndpoints) {
  const TradeoffCurve full = TradeoffCurve::SubsampledGdp(1.2, 1.0);
  const TradeoffCurve base = TradeoffCurve::Gdp(1.2);
  const TradeoffCurve none = TradeoffCurve::SubsampledGdp(1.2, 0.0);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    EXPECT_NEAR(full.Eval(x), base.Eval(x), 1e-6);
    EXPECT_NEAR(none.Eval(x), 1.0 - x, 1e-12);
  }
}

TEST(TradeoffSubsampled, StaysBelowOneSidedCurve) {
  const double mu = 1.1, q = 0.35;
  const TradeoffCurve curve = TradeoffCurve::SubsampledGdp(mu, q);
  const TradeoffCurve base = TradeoffCurve::Gdp(mu);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    const double one_sided = q * base.Eval(x) + (1.0 - q) * (1.0 - x);
    // The hull is built from a finite grid; between vertices its chords can
    // sit above the smooth one-sided curve by the documented interpolation
    // accuracy of the construction, so compare at that scale.
    EXPECT_LE(curve.Eval(x), one_sided + 1e-6);
    // Subsampling can only improve on the unamplified curve.
    EXPECT_GE(curve.Eval(x), base.Eval(x) - 1e-6);
  }
}

TEST(TradeoffSubgradient, MatchesCentralDifferences) {
  const double h = 1e-6;
  for (const auto& curve :
       {TradeoffCurve::Gdp(1.3), TradeoffCurve::LaplaceDp(0.9)}) {
    for (double x = 0.05; x < 0.99; x += 0.05) {
      const double fd = (curve.Eval(x + h) - curve.Eval(x - h)) / (2.0 * h);
      const SlopeInterval sg = curve.Subgradient(x);
      EXPECT_NEAR(sg.Mid(), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      EXPECT_LE(sg.lo, sg.hi);
    }
  }
}

TEST(TradeoffSubgradient, EpsDeltaKinksCarrySlopeIntervals) {
  const double eps = 1.0, delta = 0.1;
  const TradeoffCurve curve = TradeoffCurve::EpsDelta(eps, delta);
  const double x1 = (1.0 - delta) / (1.0 + std::exp(eps));
  const SlopeInterval at_kink = curve.Subgradient(x1);
  EXPECT_DOUBLE_EQ(at_kink.lo, -std::exp(eps));
  EXPECT_DOUBLE_EQ(at_kink.hi, -std::exp(-eps));
  const SlopeInterval at_flat = curve.Subgradient(1.0 - delta);
  EXPECT_DOUBLE_EQ(at_flat.lo, -std::exp(-eps));
  EXPECT_DOUBLE_EQ(at_flat.hi, 0.0);
  EXPECT_DOUBLE_EQ(curve.Subgradient(0.97).lo, 0.0);
}

TEST(TradeoffSubgradient, EndpointsCarryOneSidedSlopes) {
  const TradeoffCurve ed = TradeoffCurve::EpsDelta(1.0, 0.1);
  EXPECT_TRUE(std::isinf(ed.Subgradient(0.0).lo));
  EXPECT_DOUBLE_EQ(ed.Subgradient(0.0).hi, -std::exp(1.0));
  EXPECT_DOUBLE_EQ(ed.Subgradient(1.0).lo, 0.0);
  EXPECT_TRUE(std::isinf(ed.Subgradient(1.0).hi));

  const TradeoffCurve lap = TradeoffCurve::LaplaceDp(0.7);
  EXPECT_DOUBLE_EQ(lap.Subgradient(0.0).hi, -std::exp(0.7));
  EXPECT_DOUBLE_EQ(lap.Subgradient(1.0).lo, -std::exp(-0.7));

  const TradeoffCurve gdp = TradeoffCurve::Gdp(1.0);
  EXPECT_TRUE(std::isinf(gdp.Subgradient(0.0).hi));
  EXPECT_DOUBLE_EQ(gdp.Subgradient(1.0).lo, 0.0);

  // A perfectly private curve is the line 1 - x everywhere.
  const TradeoffCurve flat = TradeoffCurve::Gdp(0.0);
  EXPECT_DOUBLE_EQ(flat.Subgradient(0.0).hi, -1.0);
  EXPECT_DOUBLE_EQ(flat.Subgradient(1.0).lo, -1.0);
}

TEST(TradeoffSubgradient, SlopesAreMonotoneAcrossGrid) {
  for (const auto& curve : AllFamilies()) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 128; ++i) {
      const double x = i / 128.0;
      const SlopeInterval sg = curve.Subgradient(x);
      EXPECT_GE(sg.lo, prev - 1e-9);
      prev = sg.hi;
    }
  }
}

TEST(TradeoffJson, RoundTripsEveryFamily) {
  for (const auto& curve : AllFamilies()) {
    const TradeoffCurve copy = TradeoffCurve::FromJson(curve.ToJson());
    EXPECT_EQ(copy.family(), curve.family());
    for (double x = 0.0; x <= 1.0; x += 0.05) {
      EXPECT_DOUBLE_EQ(copy.Eval(x), curve.Eval(x));
    }
  }
  EXPECT_EQ(TradeoffCurve::Gdp(0.8).ToJson()["family"], "gdp");
  EXPECT_DOUBLE_EQ(TradeoffCurve::Gdp(0.8).ToJson()["mu"].get<double>(), 0.8);
}

TEST(TradeoffErrors, RejectsBadInputs) {
  EXPECT_THROW(TradeoffCurve::Gdp(-0.1), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::EpsDelta(1.0, 1.5), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::EpsDelta(-1.0, 0.5), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::SubsampledGdp(1.0, -0.2), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::Gdp(1.0).Eval(-0.01), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::Gdp(1.0).Eval(1.01), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::Gdp(1.0).Subgradient(-0.1), InvariantViolation);
  EXPECT_THROW(TradeoffCurve::Gdp(1.0).Subgradient(1.1), InvariantViolation);
  EXPECT_THROW(FdpToEpsDelta(TradeoffCurve::Gdp(1.0), -0.1),
               InvariantViolation);
  EXPECT_THROW(TradeoffCurve::FromJson({{"family", "unknown"}}),
               InvariantViolation);
}

}  // namespace
}  // namespace dpaudit
