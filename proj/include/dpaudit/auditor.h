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

// The audit itself: from an error count to a privacy lower bound.
//
// Null hypothesis: "the mechanism's trade-off curve lies on or above f".
// Under that null, the released guess at overall rank k errs with
// probability at least v_k (orderstats.h), independently across k, so
//
//   p = P[at most u errors among the released guesses]
//
// bounded via tailbound.h is a valid p-value.  Before the tail bound is
// taken, each v_k is lowered by its certified numerical budget
// (quad_error + disc_error); the tail is nonincreasing in v, so the
// reported p can only grow — errors of numerical origin never manufacture
// evidence against the null.
//
// LowerBoundSearch inverts the test over a one-parameter family of
// nulls f_theta (weaker privacy as theta grows, hence p nondecreasing in
// theta): it finds theta* = sup{theta : p(theta) <= significance} by
// bisection, guided by a cheap coarse tier and certified at a fine tier,
// and reports eps_lower as the (eps, delta) conversion of f_theta* at
// the requested delta.  Monotonicity across the probe grid is verified;
// if it ever fails, the search falls back to a conservative linear scan
// from zero and flags the report.
//
// VkCache memoizes tables keyed by (curve, n, r, grid, nodes) in memory
// and optionally on disk (content-addressed JSON files, atomic rename
// writes), which makes repeated audits of the same shape cheap.

#ifndef DPAUDIT_AUDITOR_H_
#define DPAUDIT_AUDITOR_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpaudit/basepair.h"
#include "dpaudit/errors.h"
#include "dpaudit/orderstats.h"
#include "dpaudit/special.h"
#include "dpaudit/tailbound.h"
#include "dpaudit/tradeoff.h"
#include "dpaudit/transcript.h"
#include "dpaudit/version.h"

namespace dpaudit {

enum class TailMethod { kChernoff, kExact };

inline std::string TailMethodName(TailMethod m) {
  return m == TailMethod::kChernoff ? "chernoff" : "exact";
}

inline TailMethod TailMethodFromName(const std::string& name) {
  if (name == "chernoff") return TailMethod::kChernoff;
  if (name == "exact") return TailMethod::kExact;
  throw InvariantViolation("TailMethod: expected 'chernoff' or 'exact'");
}

// Errors among the released guesses; validates the transcript first.
inline std::int64_t CountErrors(const Transcript& t) {
  t.Validate();
  std::int64_t u = 0;
  for (std::int64_t idx : t.released) {
    const std::size_t i = static_cast<std::size_t>(idx);
    if (t.guesses[i] != t.truths[i]) ++u;
  }
  return u;
}

namespace internal {

inline std::uint64_t Fnv1a64(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace internal

// Memoizes v_k tables in memory and, when a directory is given, on disk.
class VkCache {
 public:
  VkCache() = default;
  explicit VkCache(std::string dir) : dir_(std::move(dir)) {}

  const VkTable& GetOrCompute(const TradeoffCurve& curve, std::int64_t n,
                              std::int64_t r, int grid, int nodes) {
    nlohmann::json key_json;
    key_json["curve"] = curve.ToJson();
    key_json["n"] = n;
    key_json["r"] = r;
    key_json["grid"] = grid;
    key_json["nodes"] = nodes;
    const std::string key = key_json.dump();

    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;

    if (!dir_.empty()) {
      VkTable table;
      if (LoadFromDisk(key, &table)) {
        table.curve = curve.ToJson();
        return memory_.emplace(key, std::move(table)).first->second;
      }
    }

    const BasePair pair = BasePair::Build(curve, grid);
    VkTable table = ComputeVkTable(pair, n, r, nodes);
    table.curve = curve.ToJson();
    if (!dir_.empty()) SaveToDisk(key, table);
    return memory_.emplace(key, std::move(table)).first->second;
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string PathForKey(const std::string& key) const {
    char name[32];
    std::snprintf(name, sizeof(name), "vk-%016llx.json",
                  static_cast<unsigned long long>(internal::Fnv1a64(key)));
    return (std::filesystem::path(dir_) / name).string();
  }

  bool LoadFromDisk(const std::string& key, VkTable* out) const {
    const std::string path = PathForKey(key);
    std::ifstream in(path);
    if (!in) return false;
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception&) {
      return false;  // unreadable cache entries are simply recomputed
    }
    if (!j.is_object() || j.value("key", "") != key) return false;
    out->n = j.at("n").get<std::int64_t>();
    out->r = j.at("r").get<std::int64_t>();
    out->grid_size = j.at("grid_size").get<int>();
    out->v = j.at("v").get<std::vector<double>>();
    out->quad_error = j.at("quad_error").get<std::vector<double>>();
    out->disc_error = j.at("disc_error").get<std::vector<double>>();
    const std::size_t count = static_cast<std::size_t>(out->r);
    if (out->v.size() != count || out->quad_error.size() != count ||
        out->disc_error.size() != count) {
      return false;
    }
    return true;
  }

  void SaveToDisk(const std::string& key, const VkTable& table) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const std::string path = PathForKey(key);
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    nlohmann::json j;
    j["key"] = key;
    j["n"] = table.n;
    j["r"] = table.r;
    j["grid_size"] = table.grid_size;
    j["v"] = table.v;
    j["quad_error"] = table.quad_error;
    j["disc_error"] = table.disc_error;
    {
      std::ofstream out(tmp);
      if (!out) return;  // cache is best-effort
      out << j.dump();
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

  std::string dir_;
  std::map<std::string, VkTable> memory_;
};

// Tail bound on the error count with every v_k lowered by its certified
// numerical budget.  Lower v means a larger (more conservative) tail.
inline double PValueFromTable(const VkTable& table, std::int64_t u,
                              TailMethod method) {
  if (u < 0 || u > table.r) {
    throw InvariantViolation("PValueFromTable: u must lie in [0, r]");
  }
  std::vector<double> v(table.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double deflated =
        table.v[i] - table.quad_error[i] - table.disc_error[i];
    v[i] = std::min(1.0, std::max(0.0, deflated));
  }
  return method == TailMethod::kChernoff ? ChernoffTail(v, u)
                                         : ExactPoissonBinomialTail(v, u);
}

// p-value for the null "the mechanism satisfies `curve`" given u errors
// among the r released guesses out of n coordinates.
inline double PValue(const TradeoffCurve& curve, std::int64_t n,
                     std::int64_t r, std::int64_t u,
                     TailMethod method = TailMethod::kChernoff,
                     int grid = 1 << 20, int nodes = 4097,
                     VkCache* cache = nullptr) {
  if (u < 0 || u > r) {
    throw InvariantViolation("PValue: u must lie in [0, r]");
  }
  if (cache != nullptr) {
    return PValueFromTable(cache->GetOrCompute(curve, n, r, grid, nodes), u,
                           method);
  }
  const BasePair pair = BasePair::Build(curve, grid);
  VkTable table = ComputeVkTable(pair, n, r, nodes);
  return PValueFromTable(table, u, method);
}

// One-parameter family of null curves: privacy weakens as theta grows.
struct AuditFamily {
  enum class Kind { kGdp, kLaplace, kEpsDelta, kSubsampledGdp };

  Kind kind = Kind::kGdp;
  double fixed_delta = 0.0;  // EpsDelta: the family's own delta
  double fixed_q = 1.0;      // SubsampledGdp: the subsampling rate

  TradeoffCurve Curve(double theta) const {
    switch (kind) {
      case Kind::kGdp:
        return TradeoffCurve::Gdp(theta);
      case Kind::kLaplace:
        return TradeoffCurve::LaplaceDp(theta);
      case Kind::kEpsDelta:
        return TradeoffCurve::EpsDelta(theta, fixed_delta);
      case Kind::kSubsampledGdp:
        return TradeoffCurve::SubsampledGdp(theta, fixed_q);
    }
    throw InvariantViolation("AuditFamily: unknown kind");
  }

  std::string Name() const {
    switch (kind) {
      case Kind::kGdp:
        return "gdp";
      case Kind::kLaplace:
        return "laplace";
      case Kind::kEpsDelta:
        return "epsdelta";
      case Kind::kSubsampledGdp:
        return "subsampled-gdp";
    }
    return "?";
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["name"] = Name();
    if (kind == Kind::kEpsDelta) j["delta"] = fixed_delta;
    if (kind == Kind::kSubsampledGdp) j["q"] = fixed_q;
    return j;
  }

  // name: gdp | laplace | epsdelta | subsampled-gdp.
  static AuditFamily FromName(const std::string& name, double fixed_delta,
                              double fixed_q) {
    AuditFamily family;
    if (name == "gdp") {
      family.kind = Kind::kGdp;
    } else if (name == "laplace") {
      family.kind = Kind::kLaplace;
    } else if (name == "epsdelta") {
      family.kind = Kind::kEpsDelta;
      if (!(fixed_delta >= 0.0 && fixed_delta < 1.0)) {
        throw InvariantViolation("AuditFamily: epsdelta needs delta in [0,1)");
      }
      family.fixed_delta = fixed_delta;
    } else if (name == "subsampled-gdp") {
      family.kind = Kind::kSubsampledGdp;
      if (!(fixed_q >= 0.0 && fixed_q <= 1.0)) {
        throw InvariantViolation("AuditFamily: subsampled-gdp needs q in [0,1]");
      }
      family.fixed_q = fixed_q;
    } else {
      throw InvariantViolation("AuditFamily: unknown family '" + name + "'");
    }
    return family;
  }
};

struct AuditOptions {
  double report_delta = 1e-5;
  double significance = 0.05;
  TailMethod tail = TailMethod::kChernoff;
  double theta_max = 50.0;       // search cap; p is numerically 1 beyond
  int probe_grid = 1 << 16;      // coarse tier guiding the bisection
  int probe_nodes = 1025;
  int final_grid = 1 << 20;      // fine tier certifying the result
  int final_nodes = 4097;
};

struct AuditReport {
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::int64_t u = 0;
  double p_value = 1.0;          // at rejected_param, fine tier
  double significance = 0.05;
  nlohmann::json family;
  double rejected_param = 0.0;   // theta*, strongest rejected parameter
  double eps_lower = 0.0;
  double report_delta = 0.0;
  std::string tail_method = "chernoff";
  bool used_linear_scan = false;
  int probe_grid = 0;
  int probe_nodes = 0;
  int final_grid = 0;
  int final_nodes = 0;

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["n"] = n;
    j["r"] = r;
    j["u"] = u;
    j["p_value"] = p_value;
    j["significance"] = significance;
    j["family"] = family;
    j["rejected_param"] = rejected_param;
    if (std::isinf(eps_lower)) {
      j["eps_lower"] = "inf";
    } else {
      j["eps_lower"] = eps_lower;
    }
    j["report_delta"] = report_delta;
    j["tail_method"] = tail_method;
    j["used_linear_scan"] = used_linear_scan;
    j["grid"] = {{"probe_grid", probe_grid},
                 {"probe_nodes", probe_nodes},
                 {"final_grid", final_grid},
                 {"final_nodes", final_nodes}};
    return j;
  }

  static AuditReport FromJson(const nlohmann::json& j) {
    AuditReport rep;
    rep.n = j.at("n").get<std::int64_t>();
    rep.r = j.at("r").get<std::int64_t>();
    rep.u = j.at("u").get<std::int64_t>();
    rep.p_value = j.at("p_value").get<double>();
    rep.significance = j.at("significance").get<double>();
    rep.family = j.at("family");
    rep.rejected_param = j.at("rejected_param").get<double>();
    if (j.at("eps_lower").is_string()) {
      rep.eps_lower = std::numeric_limits<double>::infinity();
    } else {
      rep.eps_lower = j.at("eps_lower").get<double>();
    }
    rep.report_delta = j.at("report_delta").get<double>();
    rep.tail_method = j.at("tail_method").get<std::string>();
    rep.used_linear_scan = j.value("used_linear_scan", false);
    const auto& grid = j.at("grid");
    rep.probe_grid = grid.at("probe_grid").get<int>();
    rep.probe_nodes = grid.at("probe_nodes").get<int>();
    rep.final_grid = grid.at("final_grid").get<int>();
    rep.final_nodes = grid.at("final_nodes").get<int>();
    return rep;
  }
};

namespace internal {

inline double RoundTheta(double theta) {
  // Cache keys quantize theta to 1e-6; build curves from the quantized
  // value so a key always describes exactly the table it labels.
  return std::round(theta * 1e6) / 1e6;
}

}  // namespace internal

// Inverts the test over family(theta): finds the strongest theta whose
// null is still rejected at `significance` and converts it to an
// (eps_lower, report_delta) claim.
inline AuditReport LowerBoundSearch(std::int64_t n, std::int64_t r,
                                    std::int64_t u, const AuditFamily& family,
                                    const AuditOptions& options,
                                    VkCache* cache = nullptr) {
  if (u < 0 || u > r) {
    throw InvariantViolation("LowerBoundSearch: u must lie in [0, r]");
  }
  if (!(options.significance > 0.0 && options.significance < 1.0)) {
    throw InvariantViolation(
        "LowerBoundSearch: significance must lie in (0, 1)");
  }
  VkCache local_cache;
  VkCache& store = cache != nullptr ? *cache : local_cache;

  const auto probe_p = [&](double theta) {
    const double t = internal::RoundTheta(theta);
    return PValueFromTable(store.GetOrCompute(family.Curve(t), n, r,
                                              options.probe_grid,
                                              options.probe_nodes),
                           u, options.tail);
  };
  const auto final_p = [&](double theta) {
    const double t = internal::RoundTheta(theta);
    return PValueFromTable(store.GetOrCompute(family.Curve(t), n, r,
                                              options.final_grid,
                                              options.final_nodes),
                           u, options.tail);
  };

  AuditReport report;
  report.n = n;
  report.r = r;
  report.u = u;
  report.significance = options.significance;
  report.family = family.ToJson();
  report.report_delta = options.report_delta;
  report.tail_method = TailMethodName(options.tail);
  report.probe_grid = options.probe_grid;
  report.probe_nodes = options.probe_nodes;
  report.final_grid = options.final_grid;
  report.final_nodes = options.final_nodes;

  // Even the strongest null (theta = 0) must be rejected for a nonzero
  // claim; evaluate it at the fine tier directly (it is cheap: constant
  // or few-level curves take the exact path).
  const double p_zero = final_p(0.0);
  if (p_zero > options.significance) {
    report.p_value = p_zero;
    report.rejected_param = 0.0;
    report.eps_lower = 0.0;
    return report;
  }

  // Coarse probes, log-spaced over (0, theta_max]; also the monotonicity
  // certificate for the bisection that follows.
  constexpr int kProbes = 8;
  double probe_theta[kProbes];
  double probe_value[kProbes];
  for (int i = 0; i < kProbes; ++i) {
    probe_theta[i] = options.theta_max * std::ldexp(1.0, i - (kProbes - 1));
    probe_value[i] = probe_p(probe_theta[i]);
  }
  bool monotone = true;
  for (int i = 0; i + 1 < kProbes; ++i) {
    if (probe_value[i] > probe_value[i + 1] + 1e-12) {
      monotone = false;
      break;
    }
  }

  double theta_star;
  if (!monotone) {
    // Conservative fallback: walk a linear grid upward and keep the
    // largest prefix of rejected thetas.
    report.used_linear_scan = true;
    constexpr int kScanSteps = 128;
    theta_star = 0.0;
    for (int j = 1; j <= kScanSteps; ++j) {
      const double theta = options.theta_max * j / kScanSteps;
      if (probe_p(theta) > options.significance) break;
      theta_star = theta;
    }
  } else {
    double lo = 0.0;
    double hi = -1.0;
    for (int i = 0; i < kProbes; ++i) {
      if (probe_value[i] <= options.significance) {
        lo = probe_theta[i];
      } else {
        hi = probe_theta[i];
        break;
      }
    }
    if (hi < 0.0) {
      theta_star = options.theta_max;  // everything rejected up to the cap
    } else {
      while (hi - lo > 1e-4 * std::max(lo, 1e-3)) {
        const double mid = internal::RoundTheta(0.5 * (lo + hi));
        if (mid <= lo || mid >= hi) break;  // quantization floor reached
        if (probe_p(mid) <= options.significance) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      theta_star = lo;
    }
  }

  // Certify at the fine tier.  The coarse tier subtracts larger error
  // budgets, so its p-values are almost always the larger ones; if the
  // fine tier still disagrees at the boundary, back off until it holds.
  double p_final = theta_star > 0.0 ? final_p(theta_star) : p_zero;
  int backoff = 0;
  while (p_final > options.significance && theta_star > 0.0 && backoff < 60) {
    theta_star = internal::RoundTheta(theta_star * 0.999);
    if (theta_star <= 0.0) theta_star = 0.0;
    p_final = theta_star > 0.0 ? final_p(theta_star) : p_zero;
    ++backoff;
  }
  if (p_final > options.significance) {
    theta_star = 0.0;
    p_final = p_zero;
  }

  report.p_value = p_final;
  report.rejected_param = theta_star;
  report.eps_lower =
      theta_star > 0.0
          ? FdpToEpsDelta(family.Curve(theta_star), options.report_delta)
          : 0.0;
  return report;
}

// Upper limit of the two-sided Clopper-Pearson interval at `confidence`
// for `successes` out of `trials`.
inline double ClopperPearsonUpper(std::int64_t successes, std::int64_t trials,
                                  double confidence) {
  if (trials < 1) {
    throw InvariantViolation("ClopperPearsonUpper: trials must be >= 1");
  }
  if (successes < 0 || successes > trials) {
    throw InvariantViolation("ClopperPearsonUpper: successes out of range");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvariantViolation("ClopperPearsonUpper: confidence must be in (0,1)");
  }
  if (successes >= trials) return 1.0;
  const double level = 1.0 - (1.0 - confidence) / 2.0;
  return RegIncompleteBetaInv(static_cast<double>(successes + 1),
                              static_cast<double>(trials - successes), level);
}

// Classical multi-run baseline: converts false-positive / false-negative
// counts into an eps lower bound via interval upper limits alpha_r and
// beta_r:  eps = max{ ln((1-delta-alpha_r)/beta_r),
//                     ln((1-delta-beta_r)/alpha_r), 0 }.
inline double ClopperPearsonEps(std::int64_t false_positives,
                                std::int64_t false_negatives,
                                std::int64_t trials0, std::int64_t trials1,
                                double confidence, double delta) {
  const double alpha_r =
      ClopperPearsonUpper(false_positives, trials0, confidence);
  const double beta_r =
      ClopperPearsonUpper(false_negatives, trials1, confidence);
  double eps = 0.0;
  const double num1 = 1.0 - delta - alpha_r;
  if (num1 > 0.0 && beta_r > 0.0) {
    eps = std::max(eps, std::log(num1 / beta_r));
  }
  const double num2 = 1.0 - delta - beta_r;
  if (num2 > 0.0 && alpha_r > 0.0) {
    eps = std::max(eps, std::log(num2 / alpha_r));
  }
  return eps;
}

}  // namespace dpaudit

#endif  // DPAUDIT_AUDITOR_H_
