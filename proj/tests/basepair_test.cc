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

#include "dpaudit/basepair.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "dpaudit/errors.h"
#include "dpaudit/tradeoff.h"
#include "test_oracles.h"

namespace dpaudit {
namespace {

std::vector<TradeoffCurve> SampleCurves() {
  return {TradeoffCurve::Gdp(1.0), TradeoffCurve::LaplaceDp(0.8),
          TradeoffCurve::EpsDelta(1.0, 0.1),
          TradeoffCurve::SubsampledGdp(1.2, 0.3)};
}

TEST(BasePairPerfectPrivacy, ReducesToUniformPair) {
  const BasePair pair = BasePair::Build(TradeoffCurve::Gdp(0.0), 256);
  EXPECT_EQ(pair.AtomMass(), 0.0);
  for (const BasePairCell& cell : pair.CellsByRank()) {
    EXPECT_FALSE(cell.atom);
    EXPECT_NEAR(cell.density, 1.0, 1e-12);
    EXPECT_NEAR(cell.score, 0.0, 1e-12);
    EXPECT_NEAR(cell.error, 0.5, 1e-12);
    EXPECT_NEAR(cell.mass_q, cell.mass_p, 1e-15);
  }
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    EXPECT_NEAR(pair.ErrorAtRank(t), 0.5, 1e-12);
  }
}

// The Q-mass accumulated below y equals f(1 - y) exactly by telescoping;
// at y = 1/2 for a Gaussian curve with mu = 1 that is Phi(-1).
TEST(BasePairGdp, CdfMatchesCurve) {
  const BasePair pair = BasePair::Build(TradeoffCurve::Gdp(1.0), 1 << 16);
  double below_half = 0.0;
  for (const BasePairCell& cell : pair.CellsByY()) {
    if (cell.atom) continue;
    if (cell.y_hi <= 0.5 + 1e-15) below_half += cell.mass_q;
  }
  EXPECT_NEAR(below_half, 0.15865525393145705, 1e-12);
  EXPECT_EQ(pair.AtomMass(), 0.0);
}

// At y = 1/2 the likelihood ratio of the mu = 1 Gaussian pair is
// exp(mu Phi^{-1}(1/2) - mu^2/2) = exp(-1/2).
TEST(BasePairGdp, DensityMatchesClosedForm) {
  const BasePair pair = BasePair::Build(TradeoffCurve::Gdp(1.0), 1 << 16);
  for (const BasePairCell& cell : pair.CellsByY()) {
    if (cell.atom || !(cell.y_lo <= 0.5 && 0.5 < cell.y_hi)) continue;
    EXPECT_NEAR(cell.density, 0.60653065971263342, 1e-4);
    EXPECT_GE(cell.density, cell.mass_q / cell.mass_p - 1e-18);
    EXPECT_LE(cell.error_lo, cell.error);
    EXPECT_GE(cell.error_hi, cell.error);
    EXPECT_LE(cell.error_hi - cell.error_lo, 1e-4);
    return;
  }
  FAIL() << "no cell contains y = 0.5";
}

// Summing posterior error against mixture mass gives the Bayes error of
// the binary experiment, Phi(-mu/2) for a Gaussian pair.
TEST(BasePairGdp, BayesErrorIdentity) {
  struct Case {
    double mu;
    double expected;
  };
  const Case cases[] = {{1.0, 0.30853753872598690},
                        {0.8, 0.34457825838967583}};
  for (const Case& c : cases) {
    const BasePair pair = BasePair::Build(TradeoffCurve::Gdp(c.mu), 1 << 16);
    double bayes = 0.0;
    for (const BasePairCell& cell : pair.CellsByRank()) {
      bayes += cell.mass_mix * cell.error;
    }
    EXPECT_NEAR(bayes, c.expected, 1e-4) << "mu=" << c.mu;
  }
}

// An (eps, delta) curve reduces to randomized response: an atom of mass
// delta (outputs that certainly came from Q), a zero-density region of the
// same total rank mass, and two likelihood-ratio levels e^{+eps}, e^{-eps}
// that share the posterior error 1/(1 + e^eps).
TEST(BasePairEpsDelta, HasAtomZeroRegionAndTwoLevels) {
  const double eps = 1.0, delta = 0.1;
  const BasePair pair =
      BasePair::Build(TradeoffCurve::EpsDelta(eps, delta), 4096);
  EXPECT_NEAR(pair.AtomMass(), delta, 1e-12);
  EXPECT_TRUE(pair.CellsByRank().back().atom);

  for (const BasePairCell& cell : pair.CellsByY()) {
    if (cell.atom) continue;
    if (cell.y_hi <= delta + 1e-12) {
      EXPECT_EQ(cell.mass_q, 0.0);
      EXPECT_EQ(cell.error, 0.0);
      EXPECT_TRUE(std::isinf(cell.score));
    } else {
      EXPECT_NEAR(cell.score, eps, 1e-10);
      EXPECT_NEAR(cell.error, 0.26894142136999512, 1e-12);
    }
    // Piecewise-linear curves discretize losslessly: the within-cell error
    // range collapses.
    EXPECT_LE(cell.error_hi - cell.error_lo, 1e-12);
  }

  // Rank space: the top delta of rank mass is certain (zero-density cells
  // followed by the atom), everything below sits at the shared error level.
  EXPECT_NEAR(pair.ErrorAtRank(0.5), 0.26894142136999512, 1e-12);
  EXPECT_NEAR(pair.ErrorAtRank(1.0 - delta - 1e-6), 0.26894142136999512,
              1e-12);
  EXPECT_EQ(pair.ErrorAtRank(1.0 - 0.5 * delta), 0.0);
  EXPECT_EQ(pair.ErrorAtRank(1.0), 0.0);
}

TEST(BasePairLaplace, FlatPieceIsExact) {
  const double mu = 0.8;
  const BasePair pair = BasePair::Build(TradeoffCurve::LaplaceDp(mu), 1 << 16);
  const std::vector<BasePairCell> cells = pair.CellsByY();
  // y near 0 maps to the flat right piece of the curve where q = e^{-mu}
  // exactly, so the first cell carries zero discretization error.
  const BasePairCell& first = cells.front();
  EXPECT_NEAR(first.density, std::exp(-mu), 1e-13);
  EXPECT_LE(first.error_hi - first.error_lo, 1e-13);
  // Inside the middle piece, q(y) = e^{-mu} / (4 (1-y)^2).
  for (const BasePairCell& cell : cells) {
    if (cell.atom || !(cell.y_lo <= 0.6 && 0.6 < cell.y_hi)) continue;
    EXPECT_NEAR(cell.density, std::exp(-mu) / (4.0 * 0.16), 1e-3);
    break;
  }
  EXPECT_EQ(pair.AtomMass(), 0.0);
}

TEST(BasePairRanks, TileUnitIntervalInScoreOrder) {
  for (const TradeoffCurve& curve : SampleCurves()) {
    const BasePair pair = BasePair::Build(curve, 4096);
    const auto& cells = pair.CellsByRank();
    ASSERT_FALSE(cells.empty());
    EXPECT_EQ(cells.front().rank_lo, 0.0);
    EXPECT_EQ(cells.back().rank_hi, 1.0);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      EXPECT_EQ(cells[i].rank_hi, cells[i + 1].rank_lo);
      EXPECT_LE(cells[i].score, cells[i + 1].score);
      EXPECT_GE(cells[i].error, cells[i + 1].error - 1e-15);
    }
    double prev = 1.0;
    for (double t = 0.0; t <= 1.0; t += 1.0 / 512) {
      const double g = pair.ErrorAtRank(t);
      EXPECT_LE(g, prev + 1e-15);
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 0.5);
      prev = g;
    }
  }
}

TEST(BasePairNormalization, MassesSumToOne) {
  for (const TradeoffCurve& curve : SampleCurves()) {
    const BasePair pair = BasePair::Build(curve, 4096);
    double sum_p = 0.0, sum_q = 0.0, sum_mix = 0.0;
    for (const BasePairCell& cell : pair.CellsByRank()) {
      EXPECT_GE(cell.mass_q, 0.0);
      EXPECT_GE(cell.mass_p, 0.0);
      sum_p += cell.mass_p;
      sum_q += cell.mass_q;
      sum_mix += cell.mass_mix;
    }
    EXPECT_NEAR(sum_p, 1.0, 1e-9);
    EXPECT_NEAR(sum_q, 1.0, 1e-9);
    EXPECT_NEAR(sum_mix, 1.0, 1e-9);
  }
}

// The subsampled hull is piecewise linear, so cells are near-exact; the
// residual range comes from cut preimages rounding one ulp off a vertex,
// which stays far below the documented construction accuracy.
TEST(BasePairSubsampled, PiecewiseLinearCellsAreNearExact) {
  const BasePair pair =
      BasePair::Build(TradeoffCurve::SubsampledGdp(1.2, 0.3), 4096);
  EXPECT_NEAR(pair.AtomMass(), 0.0, 1e-12);
  double worst = 0.0;
  for (const BasePairCell& cell : pair.CellsByRank()) {
    worst = std::max(worst, cell.error_hi - cell.error_lo);
  }
  EXPECT_LE(worst, 1e-6);
}

// Refining the grid shrinks the within-cell error ranges of smooth curves.
TEST(BasePairDisc, ErrorRangesShrinkWithResolution) {
  const TradeoffCurve curve = TradeoffCurve::Gdp(1.0);
  double worst_coarse = 0.0, worst_fine = 0.0;
  for (const BasePairCell& cell : BasePair::Build(curve, 1 << 10).CellsByRank()) {
    if (cell.rank_hi < 0.8) {  // skip the extreme-confidence top cells
      worst_coarse = std::max(worst_coarse, cell.error_hi - cell.error_lo);
    }
  }
  for (const BasePairCell& cell : BasePair::Build(curve, 1 << 14).CellsByRank()) {
    if (cell.rank_hi < 0.8) {
      worst_fine = std::max(worst_fine, cell.error_hi - cell.error_lo);
    }
  }
  EXPECT_LT(worst_fine, 0.1 * worst_coarse);
  EXPECT_LT(worst_fine, 1e-3);
}

TEST(BasePairErrors, RejectsBadInputs) {
  EXPECT_THROW(BasePair::Build(TradeoffCurve::Gdp(1.0), 1),
               InvariantViolation);
  const BasePair pair = BasePair::Build(TradeoffCurve::Gdp(1.0), 64);
  EXPECT_THROW(pair.ErrorAtRank(-0.1), InvariantViolation);
  EXPECT_THROW(pair.ErrorAtRank(1.1), InvariantViolation);
}

}  // namespace
}  // namespace dpaudit
