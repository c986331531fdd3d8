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

// Reference mechanisms and guessing strategies.
//
// Each simulator plays one audit game: draw n secret bits uniformly,
// push them through a noisy mechanism coordinate by coordinate, guess
// each bit back from the observation, and release the r most confident
// guesses.  Four mechanisms are provided:
//
//   gaussian    output_i = b_i + sigma * z_i        (z standard normal)
//   laplace     output_i = b_i + Laplace(0, scale)
//   rr          randomized response over symbols {0, 1, 2, 3}:
//                 b=0 -> 0 w.p. (1-delta)e^eps/(1+e^eps),
//                        1 w.p. (1-delta)/(1+e^eps),  2 w.p. delta
//                 b=1 -> mirrored, with 3 as the certain symbol
//   subsampled  output_i = keep_i * b_i + sigma * z_i, keep_i ~ Bern(q)
//
// Guessing strategies for the additive mechanisms:
//
//   special   per-coordinate threshold: guess 0 iff output <= 1/2,
//             score |output - 1/2|.  Deliberately a simple proxy for the
//             likelihood ratio; the audit downstream is valid for any
//             decoder, so a suboptimal score only loses power, never
//             validity.
//   general   rank-based: the r/2 smallest outputs are guessed 0, the
//             r/2 largest guessed 1 (requires even r); scores are the
//             distance of the output's sort position from the median
//             position, which makes the released scores strictly
//             dominate the discarded ones.
//
// Randomized response guesses 0 on symbols {0, 2} and 1 on {1, 3};
// symbols 2/3 reveal the bit exactly and carry a sentinel score one
// larger than the largest finite score (eps), with a certainty mark.
//
// All randomness comes from the counter-based generator in philox.h:
// stream 0 drives the secret bits, stream 1 the noise or channel
// symbol, stream 2 the subsampling coin.  Each coordinate reads only
// its own index in each stream, so the loop order never affects the
// result and identical specs reproduce bit-identical transcripts.

#ifndef DPAUDIT_MECHANISMS_H_
#define DPAUDIT_MECHANISMS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpaudit/errors.h"
#include "dpaudit/philox.h"
#include "dpaudit/special.h"
#include "dpaudit/transcript.h"

namespace dpaudit {

enum class MechanismKind {
  kGaussian,
  kLaplace,
  kRandomizedResponse,
  kSubsampledGaussian,
};

enum class GuessStrategy { kSpecial, kGeneral };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kGaussian;
  double sigma = 1.0;   // gaussian / subsampled noise scale
  double scale = 1.0;   // laplace noise scale
  double eps = 0.0;     // randomized response
  double delta = 0.0;   // randomized response
  double q = 1.0;       // subsampling keep probability
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::uint64_t seed = 0;
  GuessStrategy strategy = GuessStrategy::kSpecial;

  void Validate() const {
    if (n < 1) throw InvariantViolation("MechanismSpec: n must be >= 1");
    if (r < 1 || r > n) {
      throw InvariantViolation("MechanismSpec: r must lie in [1, n]");
    }
    switch (kind) {
      case MechanismKind::kGaussian:
        if (!(sigma > 0.0)) {
          throw InvariantViolation("MechanismSpec: sigma must be > 0");
        }
        break;
      case MechanismKind::kLaplace:
        if (!(scale > 0.0)) {
          throw InvariantViolation("MechanismSpec: scale must be > 0");
        }
        break;
      case MechanismKind::kRandomizedResponse:
        if (!(eps >= 0.0)) {
          throw InvariantViolation("MechanismSpec: eps must be >= 0");
        }
        if (!(delta >= 0.0 && delta <= 1.0)) {
          throw InvariantViolation("MechanismSpec: delta must lie in [0, 1]");
        }
        break;
      case MechanismKind::kSubsampledGaussian:
        if (!(sigma > 0.0)) {
          throw InvariantViolation("MechanismSpec: sigma must be > 0");
        }
        if (!(q >= 0.0 && q <= 1.0)) {
          throw InvariantViolation("MechanismSpec: q must lie in [0, 1]");
        }
        break;
    }
    if (strategy == GuessStrategy::kGeneral && (r % 2) != 0) {
      throw InvariantViolation(
          "MechanismSpec: the rank-based strategy requires even r");
    }
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    switch (kind) {
      case MechanismKind::kGaussian:
        j["kind"] = "gaussian";
        j["sigma"] = sigma;
        break;
      case MechanismKind::kLaplace:
        j["kind"] = "laplace";
        j["scale"] = scale;
        break;
      case MechanismKind::kRandomizedResponse:
        j["kind"] = "rr";
        j["eps"] = eps;
        j["delta"] = delta;
        break;
      case MechanismKind::kSubsampledGaussian:
        j["kind"] = "subsampled";
        j["sigma"] = sigma;
        j["q"] = q;
        break;
    }
    j["n"] = n;
    j["r"] = r;
    j["seed"] = seed;
    j["strategy"] =
        strategy == GuessStrategy::kSpecial ? "special" : "general";
    return j;
  }

  static MechanismSpec FromJson(const nlohmann::json& j) {
    MechanismSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
      spec.kind = MechanismKind::kGaussian;
      spec.sigma = j.at("sigma").get<double>();
    } else if (kind == "laplace") {
      spec.kind = MechanismKind::kLaplace;
      spec.scale = j.at("scale").get<double>();
    } else if (kind == "rr") {
      spec.kind = MechanismKind::kRandomizedResponse;
      spec.eps = j.at("eps").get<double>();
      spec.delta = j.at("delta").get<double>();
    } else if (kind == "subsampled") {
      spec.kind = MechanismKind::kSubsampledGaussian;
      spec.sigma = j.at("sigma").get<double>();
      spec.q = j.at("q").get<double>();
    } else {
      throw InvariantViolation("MechanismSpec: unknown kind '" + kind + "'");
    }
    spec.n = j.at("n").get<std::int64_t>();
    spec.r = j.at("r").get<std::int64_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    const std::string strategy = j.value("strategy", "special");
    if (strategy == "special") {
      spec.strategy = GuessStrategy::kSpecial;
    } else if (strategy == "general") {
      spec.strategy = GuessStrategy::kGeneral;
    } else {
      throw InvariantViolation("MechanismSpec: unknown strategy '" + strategy +
                               "'");
    }
    spec.Validate();
    return spec;
  }
};

namespace internal {

// Quantile of Laplace(0, scale) at u in (0, 1).
inline double LaplaceQuantile(double u, double scale) {
  return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
}

// Indices of the r largest scores, ties broken toward smaller index,
// returned sorted ascending.
inline std::vector<std::int64_t> TopRIndices(const std::vector<double>& scores,
                                             std::int64_t r) {
  const std::int64_t n = static_cast<std::int64_t>(scores.size());
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  const auto more_confident = [&scores](std::int64_t a, std::int64_t b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + (r - 1), order.end(),
                   more_confident);
  std::vector<std::int64_t> released(order.begin(), order.begin() + r);
  std::sort(released.begin(), released.end());
  return released;
}

}  // namespace internal

// Threshold strategy: guess 0 iff output <= 1/2; score |output - 1/2|.
inline std::pair<std::vector<std::uint8_t>, std::vector<double>>
ThresholdGuesses(const std::vector<double>& outputs) {
  std::vector<std::uint8_t> guesses(outputs.size());
  std::vector<double> scores(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    guesses[i] = outputs[i] <= 0.5 ? 0 : 1;
    scores[i] = std::fabs(outputs[i] - 0.5);
  }
  return {std::move(guesses), std::move(scores)};
}

// Rank strategy: guess 0 for the r/2 smallest outputs, 1 for the r/2
// largest; score = |sort position - median position|, which released
// coordinates maximize.  Ties in outputs are broken by index.
struct RankGuessResult {
  std::vector<std::uint8_t> guesses;
  std::vector<double> scores;
  std::vector<std::int64_t> released;
};

inline RankGuessResult RankGuesses(const std::vector<double>& outputs,
                                   std::int64_t r) {
  const std::int64_t n = static_cast<std::int64_t>(outputs.size());
  if (r < 2 || r > n || (r % 2) != 0) {
    throw InvariantViolation("RankGuesses: r must be even and lie in [2, n]");
  }
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::sort(order.begin(), order.end(), [&outputs](std::int64_t a, std::int64_t b) {
    const double oa = outputs[static_cast<std::size_t>(a)];
    const double ob = outputs[static_cast<std::size_t>(b)];
    if (oa != ob) return oa < ob;
    return a < b;
  });
  RankGuessResult result;
  result.guesses.resize(static_cast<std::size_t>(n));
  result.scores.resize(static_cast<std::size_t>(n));
  const double median_pos = static_cast<double>(n - 1) / 2.0;
  for (std::int64_t pos = 0; pos < n; ++pos) {
    const std::size_t idx = static_cast<std::size_t>(order[static_cast<std::size_t>(pos)]);
    result.guesses[idx] = static_cast<double>(pos) <= median_pos ? 0 : 1;
    result.scores[idx] = std::fabs(static_cast<double>(pos) - median_pos);
    if (pos < r / 2 || pos >= n - r / 2) {
      result.released.push_back(static_cast<std::int64_t>(idx));
    }
  }
  std::sort(result.released.begin(), result.released.end());
  return result;
}

// Randomized-response strategy: guess 0 on symbols {0, 2}, 1 on {1, 3}.
// Symbols 2/3 identify the bit, so their score is the sentinel eps + 1
// (largest finite score plus one) and the certainty mask is set.
struct RrGuessResult {
  std::vector<std::uint8_t> guesses;
  std::vector<double> scores;
  std::vector<std::uint8_t> certain;
};

inline RrGuessResult RrGuesses(const std::vector<std::uint8_t>& symbols,
                               double eps) {
  RrGuessResult result;
  result.guesses.resize(symbols.size());
  result.scores.resize(symbols.size());
  result.certain.resize(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] > 3) {
      throw InvariantViolation("RrGuesses: symbols must lie in {0,1,2,3}");
    }
    result.guesses[i] = (symbols[i] == 0 || symbols[i] == 2) ? 0 : 1;
    const bool exact = symbols[i] >= 2;
    result.certain[i] = exact ? 1 : 0;
    result.scores[i] = exact ? eps + 1.0 : eps;
  }
  return result;
}

// Plays one full audit game and returns the transcript.
inline Transcript Simulate(const MechanismSpec& spec) {
  spec.Validate();
  const CounterRng rng(spec.seed);
  constexpr std::uint64_t kBitStream = 0;
  constexpr std::uint64_t kNoiseStream = 1;
  constexpr std::uint64_t kSubsampleStream = 2;

  const std::size_t count = static_cast<std::size_t>(spec.n);
  Transcript t;
  t.spec = spec.ToJson();
  t.truths.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.truths[i] = rng.Uniform(kBitStream, i) < 0.5 ? 1 : 0;
  }

  if (spec.kind == MechanismKind::kRandomizedResponse) {
    // Channel: stay w.p. (1-delta)e^eps/(1+e^eps), flip w.p.
    // (1-delta)/(1+e^eps), reveal w.p. delta.
    const double stay = (1.0 - spec.delta) * std::exp(spec.eps) /
                        (1.0 + std::exp(spec.eps));
    const double keep_or_flip = 1.0 - spec.delta;
    std::vector<std::uint8_t> symbols(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = rng.Uniform(kNoiseStream, i);
      const std::uint8_t b = t.truths[i];
      if (u < stay) {
        symbols[i] = b;  // emit the bit itself
      } else if (u < keep_or_flip) {
        symbols[i] = static_cast<std::uint8_t>(1 - b);  // flipped
      } else {
        symbols[i] = static_cast<std::uint8_t>(2 + b);  // revealing symbol
      }
    }
    RrGuessResult rr = RrGuesses(symbols, spec.eps);
    t.guesses = std::move(rr.guesses);
    t.scores = std::move(rr.scores);
    t.certain = std::move(rr.certain);
    t.released = internal::TopRIndices(t.scores, spec.r);
    t.Validate();
    return t;
  }

  std::vector<double> outputs(count);
  for (std::size_t i = 0; i < count; ++i) {
    double value = static_cast<double>(t.truths[i]);
    if (spec.kind == MechanismKind::kSubsampledGaussian) {
      if (rng.Uniform(kSubsampleStream, i) >= spec.q) value = 0.0;
    }
    const double u = rng.Uniform(kNoiseStream, i);
    if (spec.kind == MechanismKind::kLaplace) {
      value += internal::LaplaceQuantile(u, spec.scale);
    } else {
      value += spec.sigma * StdNormalQuantile(u);
    }
    outputs[i] = value;
  }

  if (spec.strategy == GuessStrategy::kGeneral) {
    RankGuessResult rank = RankGuesses(outputs, spec.r);
    t.guesses = std::move(rank.guesses);
    t.scores = std::move(rank.scores);
    t.released = std::move(rank.released);
  } else {
    auto [guesses, scores] = ThresholdGuesses(outputs);
    t.guesses = std::move(guesses);
    t.scores = std::move(scores);
    t.released = internal::TopRIndices(t.scores, spec.r);
  }
  t.Validate();
  return t;
}

namespace internal {

// Raw mechanism outputs for distribution tests; reproduces exactly the
// sampling path of Simulate for the additive mechanisms.
inline std::vector<double> MechanismOutputs(const MechanismSpec& spec) {
  spec.Validate();
  if (spec.kind == MechanismKind::kRandomizedResponse) {
    throw InvariantViolation("MechanismOutputs: not defined for rr");
  }
  const CounterRng rng(spec.seed);
  const std::size_t count = static_cast<std::size_t>(spec.n);
  std::vector<double> outputs(count);
  for (std::size_t i = 0; i < count; ++i) {
    double value = rng.Uniform(0, i) < 0.5 ? 1.0 : 0.0;
    if (spec.kind == MechanismKind::kSubsampledGaussian &&
        rng.Uniform(2, i) >= spec.q) {
      value = 0.0;
    }
    const double u = rng.Uniform(1, i);
    if (spec.kind == MechanismKind::kLaplace) {
      value += LaplaceQuantile(u, spec.scale);
    } else {
      value += spec.sigma * StdNormalQuantile(u);
    }
    outputs[i] = value;
  }
  return outputs;
}

}  // namespace internal

}  // namespace dpaudit

#endif  // DPAUDIT_MECHANISMS_H_
