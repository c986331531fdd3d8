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
// dpaudit command-line tool.
//
// Subcommands:
//   simulate       run a mechanism under attack and write a guess transcript
//   audit          turn a transcript into a p-value and an (eps, delta)
//                  privacy lower bound
//   vk             tabulate order-statistic-adjusted error probabilities
//   dump-basepair  emit the canonical distribution pair of a trade-off curve
//   sweep          run simulate+audit grids from a JSON plan, write CSV
//   selfcheck      run fast numerical invariant checks
//
// Exit codes: 0 success, 1 usage error, 2 data invariant violation,
// 3 numerical failure.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpaudit/auditor.h"
#include "dpaudit/basepair.h"
#include "dpaudit/errors.h"
#include "dpaudit/mechanisms.h"
#include "dpaudit/orderstats.h"
#include "dpaudit/philox.h"
#include "dpaudit/special.h"
#include "dpaudit/tailbound.h"
#include "dpaudit/tradeoff.h"
#include "dpaudit/transcript.h"
#include "dpaudit/version.h"

namespace {

using nlohmann::json;

// All floating-point values in CSV and terminal output are printed with 17
// significant digits so every double round-trips exactly.
std::string FormatDouble(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw dpaudit::InvariantViolation("cannot open file: " + path);
  }
  json j;
  in >> j;
  return j;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw dpaudit::InvariantViolation("cannot write file: " + path);
  }
  out << text;
  if (!out) {
    throw dpaudit::InvariantViolation("write failed: " + path);
  }
}

// The trade-off curve a correctly-specified mechanism actually satisfies;
// used by `sweep` to report the matching upper bound next to each audit.
dpaudit::TradeoffCurve TrueCurve(const dpaudit::MechanismSpec& spec) {
  switch (spec.kind) {
    case dpaudit::MechanismKind::kGaussian:
      return dpaudit::TradeoffCurve::Gdp(1.0 / spec.sigma);
    case dpaudit::MechanismKind::kLaplace:
      return dpaudit::TradeoffCurve::LaplaceDp(1.0 / spec.scale);
    case dpaudit::MechanismKind::kRandomizedResponse:
      return dpaudit::TradeoffCurve::EpsDelta(spec.eps, spec.delta);
    case dpaudit::MechanismKind::kSubsampledGaussian:
      return dpaudit::TradeoffCurve::SubsampledGdp(1.0 / spec.sigma, spec.q);
  }
  throw dpaudit::InvariantViolation("unknown mechanism kind");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string mechanism;
  std::string strategy;
  std::string out_path = "transcript.json";
  double sigma = 1.0;
  double scale = 1.0;
  double eps = 0.0;
  double delta = 0.0;
  double q = 1.0;
  double r_frac = 1.0;
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::uint64_t seed = 0;
};

int CmdSimulate(const CLI::App& cmd, const SimulateArgs& args) {
  dpaudit::MechanismSpec spec;
  if (!args.config_path.empty()) {
    spec = dpaudit::MechanismSpec::FromJson(ReadJsonFile(args.config_path));
  }
  // Flags override config-file fields; untouched flags keep the config value.
  if (cmd.count("--mechanism") != 0) {
    if (args.mechanism == "gaussian") {
      spec.kind = dpaudit::MechanismKind::kGaussian;
    } else if (args.mechanism == "laplace") {
      spec.kind = dpaudit::MechanismKind::kLaplace;
    } else if (args.mechanism == "rr") {
      spec.kind = dpaudit::MechanismKind::kRandomizedResponse;
    } else {
      spec.kind = dpaudit::MechanismKind::kSubsampledGaussian;
    }
  }
  if (cmd.count("--sigma") != 0) spec.sigma = args.sigma;
  if (cmd.count("--scale") != 0) spec.scale = args.scale;
  if (cmd.count("--eps") != 0) spec.eps = args.eps;
  if (cmd.count("--delta") != 0) spec.delta = args.delta;
  if (cmd.count("--q") != 0) spec.q = args.q;
  if (cmd.count("--n") != 0) spec.n = args.n;
  if (cmd.count("--seed") != 0) spec.seed = args.seed;
  if (cmd.count("--strategy") != 0) {
    spec.strategy = args.strategy == "general"
                        ? dpaudit::GuessStrategy::kGeneral
                        : dpaudit::GuessStrategy::kSpecial;
  }
  if (cmd.count("--r") != 0) {
    spec.r = args.r;
  } else if (cmd.count("--r-frac") != 0) {
    spec.r = static_cast<std::int64_t>(
        std::llround(args.r_frac * static_cast<double>(spec.n)));
  } else if (args.config_path.empty()) {
    spec.r = spec.n;  // default: score every guess, filter nothing
  }

  const dpaudit::Transcript transcript = dpaudit::Simulate(spec);
  const std::int64_t u = dpaudit::CountErrors(transcript);
  WriteTextFile(args.out_path, transcript.ToJson().dump() + "\n");
  std::printf("simulate: n=%" PRId64 " r=%" PRId64 " u=%" PRId64
              " transcript=%s\n",
              transcript.n(), transcript.r(), u, args.out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

struct AuditArgs {
  std::string transcript_path;
  std::string family;
  std::string tail = "chernoff";
  std::string cache_dir;
  std::string out_path;
  double family_delta = 0.0;
  double family_q = 1.0;
  double report_delta = 1e-5;
  double significance = 0.05;
  double theta_max = 50.0;
  int probe_grid = 1 << 16;
  int probe_nodes = 1025;
  int final_grid = 1 << 20;
  int final_nodes = 4097;
};

int CmdAudit(const AuditArgs& args) {
  const dpaudit::Transcript transcript =
      dpaudit::Transcript::FromJson(ReadJsonFile(args.transcript_path));
  const std::int64_t u = dpaudit::CountErrors(transcript);

  const dpaudit::AuditFamily family = dpaudit::AuditFamily::FromName(
      args.family, args.family_delta, args.family_q);
  dpaudit::AuditOptions options;
  options.report_delta = args.report_delta;
  options.significance = args.significance;
  options.tail = dpaudit::TailMethodFromName(args.tail);
  options.theta_max = args.theta_max;
  options.probe_grid = args.probe_grid;
  options.probe_nodes = args.probe_nodes;
  options.final_grid = args.final_grid;
  options.final_nodes = args.final_nodes;

  dpaudit::VkCache cache(args.cache_dir);
  const dpaudit::AuditReport report = dpaudit::LowerBoundSearch(
      transcript.n(), transcript.r(), u, family, options, &cache);
  const std::string text = report.ToJson().dump(2) + "\n";
  std::cout << text;
  if (!args.out_path.empty()) WriteTextFile(args.out_path, text);
  return 0;
}

// ---------------------------------------------------------------------------
// vk
// ---------------------------------------------------------------------------

struct VkArgs {
  std::string family;
  std::string out_path;
  double param = 0.0;
  double family_delta = 0.0;
  double family_q = 1.0;
  std::int64_t n = 0;
  std::int64_t r = 0;
  int grid = 1 << 20;
  int nodes = 4097;
};

int CmdVk(const VkArgs& args) {
  const dpaudit::AuditFamily family = dpaudit::AuditFamily::FromName(
      args.family, args.family_delta, args.family_q);
  const dpaudit::BasePair pair =
      dpaudit::BasePair::Build(family.Curve(args.param), args.grid);
  const dpaudit::VkTable table =
      dpaudit::ComputeVkTable(pair, args.n, args.r, args.nodes);

  std::ostringstream csv;
  csv << "k,v_k,quad_error,disc_error\n";
  for (std::size_t i = 0; i < table.v.size(); ++i) {
    const std::int64_t k = args.n - args.r + 1 + static_cast<std::int64_t>(i);
    csv << k << ',' << FormatDouble(table.v[i]) << ','
        << FormatDouble(table.quad_error[i]) << ','
        << FormatDouble(table.disc_error[i]) << '\n';
  }
  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    WriteTextFile(args.out_path, csv.str());
    std::printf("vk: %zu rows -> %s\n", table.v.size(),
                args.out_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// dump-basepair
// ---------------------------------------------------------------------------

struct DumpBasePairArgs {
  std::string family;
  std::string out_path;
  double param = 0.0;
  double family_delta = 0.0;
  double family_q = 1.0;
  int grid = 4096;
};

int CmdDumpBasePair(const DumpBasePairArgs& args) {
  const dpaudit::AuditFamily family = dpaudit::AuditFamily::FromName(
      args.family, args.family_delta, args.family_q);
  const dpaudit::BasePair pair =
      dpaudit::BasePair::Build(family.Curve(args.param), args.grid);

  // One row per cell in y order: the density is piecewise constant on
  // [y, next y); the atom (if any) appears as a final row at y = 1 with
  // infinite density.  rank_cdf is the mixture mass ranked strictly less
  // confident than the cell.
  std::ostringstream csv;
  csv << "y,q_density,score,rank_cdf\n";
  for (const dpaudit::BasePairCell& cell : pair.CellsByY()) {
    csv << FormatDouble(cell.y_lo) << ',' << FormatDouble(cell.density)
        << ',' << FormatDouble(cell.score) << ','
        << FormatDouble(cell.rank_lo) << '\n';
  }
  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    WriteTextFile(args.out_path, csv.str());
    std::printf("dump-basepair: %d cells -> %s\n", pair.Resolution(),
                args.out_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepPlan {
  std::string mechanism;
  std::string strategy = "special";
  std::vector<double> params;
  double mech_delta = 0.0;
  double subsample_q = 1.0;
  std::string family;
  double family_delta = 0.0;
  double family_q = 1.0;
  std::vector<std::int64_t> n_values;
  std::int64_t r_fixed = -1;
  double r_frac = -1.0;
  double report_delta = 1e-5;
  double significance = 0.05;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  std::string tail = "chernoff";
  std::string output;

  static SweepPlan FromJson(const json& j) {
    SweepPlan plan;
    plan.mechanism = j.at("mechanism").get<std::string>();
    plan.params = j.at("params").get<std::vector<double>>();
    plan.family = j.at("family").get<std::string>();
    plan.n_values = j.at("n").get<std::vector<std::int64_t>>();
    plan.output = j.at("output").get<std::string>();
    if (j.contains("strategy")) plan.strategy = j["strategy"];
    if (j.contains("mech_delta")) plan.mech_delta = j["mech_delta"];
    if (j.contains("subsample_q")) plan.subsample_q = j["subsample_q"];
    if (j.contains("family_delta")) plan.family_delta = j["family_delta"];
    if (j.contains("family_q")) plan.family_q = j["family_q"];
    if (j.contains("r")) plan.r_fixed = j["r"];
    if (j.contains("r_frac")) plan.r_frac = j["r_frac"];
    if (j.contains("report_delta")) plan.report_delta = j["report_delta"];
    if (j.contains("significance")) plan.significance = j["significance"];
    if (j.contains("seeds")) plan.seeds = j["seeds"];
    if (j.contains("seed_base")) plan.seed_base = j["seed_base"];
    if (j.contains("tail")) plan.tail = j["tail"];

    if (plan.params.empty() || plan.n_values.empty()) {
      throw dpaudit::InvariantViolation(
          "sweep plan needs nonempty params and n lists");
    }
    if (plan.seeds < 1) {
      throw dpaudit::InvariantViolation("sweep plan needs seeds >= 1");
    }
    if ((plan.r_fixed < 0) == (plan.r_frac < 0)) {
      throw dpaudit::InvariantViolation(
          "sweep plan needs exactly one of r or r_frac");
    }
    if (plan.output.empty()) {
      throw dpaudit::InvariantViolation("sweep plan needs an output path");
    }
    return plan;
  }

  dpaudit::MechanismSpec Cell(double param, std::int64_t n,
                              std::uint64_t seed) const {
    dpaudit::MechanismSpec spec;
    if (mechanism == "gaussian") {
      spec.kind = dpaudit::MechanismKind::kGaussian;
      spec.sigma = param;
    } else if (mechanism == "laplace") {
      spec.kind = dpaudit::MechanismKind::kLaplace;
      spec.scale = param;
    } else if (mechanism == "rr") {
      spec.kind = dpaudit::MechanismKind::kRandomizedResponse;
      spec.eps = param;
      spec.delta = mech_delta;
    } else if (mechanism == "subsampled") {
      spec.kind = dpaudit::MechanismKind::kSubsampledGaussian;
      spec.sigma = param;
      spec.q = subsample_q;
    } else {
      throw dpaudit::InvariantViolation("unknown mechanism: " + mechanism);
    }
    spec.strategy = strategy == "general" ? dpaudit::GuessStrategy::kGeneral
                                          : dpaudit::GuessStrategy::kSpecial;
    spec.n = n;
    spec.r = r_fixed >= 0 ? r_fixed
                          : static_cast<std::int64_t>(std::llround(
                                r_frac * static_cast<double>(n)));
    spec.seed = seed;
    return spec;
  }
};

// Keep cell-failure diagnostics on a single CSV field.
std::string CsvSafe(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

int CmdSweep(const std::string& plan_path, const std::string& cache_dir) {
  const SweepPlan plan = SweepPlan::FromJson(ReadJsonFile(plan_path));
  const dpaudit::AuditFamily family = dpaudit::AuditFamily::FromName(
      plan.family, plan.family_delta, plan.family_q);
  dpaudit::AuditOptions options;
  options.report_delta = plan.report_delta;
  options.significance = plan.significance;
  options.tail = dpaudit::TailMethodFromName(plan.tail);
  dpaudit::VkCache cache(cache_dir);

  std::ostringstream csv;
  csv << "family,param,n,r,seed,u,p_value,eps_lower,eps_upper,runtime_ms,"
         "error\n";
  int rows = 0;
  int failures = 0;
  for (double param : plan.params) {
    for (std::int64_t n : plan.n_values) {
      for (int s = 0; s < plan.seeds; ++s) {
        const std::uint64_t seed =
            plan.seed_base + static_cast<std::uint64_t>(s);
        const auto start = std::chrono::steady_clock::now();
        std::string row;
        try {
          const dpaudit::MechanismSpec spec = plan.Cell(param, n, seed);
          const dpaudit::Transcript transcript = dpaudit::Simulate(spec);
          const std::int64_t u = dpaudit::CountErrors(transcript);
          const dpaudit::AuditReport report = dpaudit::LowerBoundSearch(
              transcript.n(), transcript.r(), u, family, options, &cache);
          const double eps_upper =
              dpaudit::FdpToEpsDelta(TrueCurve(spec), plan.report_delta);
          const auto elapsed = std::chrono::duration_cast<
              std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                         start);
          std::ostringstream line;
          line << plan.family << ',' << FormatDouble(param) << ',' << n << ','
               << transcript.r() << ',' << seed << ',' << u << ','
               << FormatDouble(report.p_value) << ','
               << FormatDouble(report.eps_lower) << ','
               << FormatDouble(eps_upper) << ',' << elapsed.count() << ',';
          row = line.str();
        } catch (const std::exception& e) {
          // Record the failure and keep sweeping the remaining cells.
          std::ostringstream line;
          line << plan.family << ',' << FormatDouble(param) << ',' << n << ','
               << (plan.r_fixed >= 0 ? plan.r_fixed
                                     : static_cast<std::int64_t>(std::llround(
                                           plan.r_frac *
                                           static_cast<double>(n))))
               << ',' << seed << ",,,,,," << CsvSafe(e.what());
          row = line.str();
          ++failures;
        }
        csv << row << '\n';
        ++rows;
      }
    }
  }
  WriteTextFile(plan.output, csv.str());
  std::printf("sweep: %d rows (%d failed) -> %s\n", rows, failures,
              plan.output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// selfcheck
// ---------------------------------------------------------------------------

struct SelfCheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Check(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) {
    throw SelfCheckFailure(name + ": " + detail);
  }
  std::printf("[SELFCHECK] %s: ok\n", name.c_str());
}

int CmdSelfCheck() {
  try {
    {
      // Counter-mode RNG known-answer test (keys and counters all zero /
      // all ones).
      const dpaudit::Philox4x32::Counter zero =
          dpaudit::Philox4x32::Block({0, 0, 0, 0}, {0, 0});
      const dpaudit::Philox4x32::Counter ones = dpaudit::Philox4x32::Block(
          {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
          {0xffffffffu, 0xffffffffu});
      const bool zero_ok = zero[0] == 0x6627e8d5u && zero[1] == 0xe169c58du &&
                           zero[2] == 0xbc57ac4cu && zero[3] == 0x9b00dbd8u;
      const bool ones_ok = ones[0] == 0x408f276du && ones[1] == 0x41c83b0eu &&
                           ones[2] == 0xa20bc7c6u && ones[3] == 0x6d5451fdu;
      Check(zero_ok && ones_ok, "counter-rng-known-answers",
            "Philox4x32-10 output does not match the reference vectors");
    }
    {
      // Perfect privacy: every rank guess is a fair coin.
      const dpaudit::BasePair pair =
          dpaudit::BasePair::Build(dpaudit::TradeoffCurve::Gdp(0.0), 4096);
      const dpaudit::VkTable table =
          dpaudit::ComputeVkTable(pair, 16, 16, 1025);
      double worst = 0.0;
      for (double v : table.v) worst = std::max(worst, std::fabs(v - 0.5));
      Check(worst <= 1e-9, "perfect-privacy-coin",
            "max |v_k - 1/2| = " + FormatDouble(worst));
    }
    {
      // Single draw from the unit-shift Gaussian pair: the optimal guess
      // errs with probability Phi(-1/2).
      const dpaudit::BasePair pair =
          dpaudit::BasePair::Build(dpaudit::TradeoffCurve::Gdp(1.0), 1 << 16);
      const dpaudit::VkTable table = dpaudit::ComputeVkTable(pair, 1, 1, 4097);
      const double expected = 0.30853753872598690;  // Phi(-1/2)
      const double slack =
          table.quad_error[0] + table.disc_error[0] + 1e-9;
      Check(std::fabs(table.v[0] - expected) <= slack, "single-draw-bayes",
            "v_1 = " + FormatDouble(table.v[0]) + " expected " +
                FormatDouble(expected) + " +/- " + FormatDouble(slack));
    }
    {
      // Converting a point curve to (eps, delta) and back is the identity.
      const double eps = dpaudit::FdpToEpsDelta(
          dpaudit::TradeoffCurve::EpsDelta(1.5, 0.01), 0.01);
      Check(std::fabs(eps - 1.5) <= 1e-9, "eps-delta-round-trip",
            "got " + FormatDouble(eps));
      const double gdp_eps = dpaudit::FdpToEpsDelta(
          dpaudit::TradeoffCurve::Gdp(0.8), 1e-5);
      Check(std::fabs(gdp_eps - 3.3869331861562637) <= 1e-7,
            "gaussian-eps-at-delta", "got " + FormatDouble(gdp_eps));
    }
    {
      // Symmetric Gaussian trade-off curves are involutions: f(f(x)) = x.
      const dpaudit::TradeoffCurve curve = dpaudit::TradeoffCurve::Gdp(1.0);
      double worst = 0.0;
      for (int i = 1; i < 100; ++i) {
        const double x = i / 100.0;
        worst = std::max(worst, std::fabs(curve.Eval(curve.Eval(x)) - x));
      }
      Check(worst <= 1e-9, "tradeoff-involution",
            "max |f(f(x)) - x| = " + FormatDouble(worst));
    }
    {
      // Fair-coin tail: exact Poisson-binomial equals the binomial CDF and
      // the Chernoff bound dominates it.
      const std::vector<double> half(100, 0.5);
      const double exact = dpaudit::ExactPoissonBinomialTail(half, 30);
      const double chernoff = dpaudit::ChernoffTail(half, 30);
      const double expected = 3.9250698227968348e-05;  // Binom(100,1/2) <= 30
      Check(std::fabs(exact / expected - 1.0) <= 1e-10 &&
                chernoff >= exact && chernoff <= 1.0,
            "tail-bounds",
            "exact = " + FormatDouble(exact) +
                " chernoff = " + FormatDouble(chernoff));
    }
    {
      const double upper = dpaudit::ClopperPearsonUpper(0, 1000, 0.95);
      Check(std::fabs(upper - 0.0036820838968656721) <= 1e-12,
            "clopper-pearson", "got " + FormatDouble(upper));
    }
    {
      // Atom handling: an (eps, delta) pair ranks its certain outcomes at
      // the top with zero posterior error, and the error profile is
      // nonincreasing in rank.
      const dpaudit::BasePair pair = dpaudit::BasePair::Build(
          dpaudit::TradeoffCurve::EpsDelta(0.5, 0.1), 4096);
      bool monotone = true;
      double prev = 1.0;
      for (int i = 0; i <= 1000; ++i) {
        const double e = pair.ErrorAtRank(i / 1000.0);
        if (e > prev + 1e-12) monotone = false;
        prev = e;
      }
      Check(monotone && pair.ErrorAtRank(0.999) == 0.0 &&
                std::fabs(pair.AtomMass() - 0.1) <= 1e-9,
            "base-pair-atom",
            "atom mass = " + FormatDouble(pair.AtomMass()));
    }
  } catch (const SelfCheckFailure& e) {
    std::fprintf(stderr, "[SELFCHECK] FAIL %s\n", e.what());
    return 3;
  }
  std::printf("selfcheck: all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpaudit: one-run differential-privacy audit toolkit"};
  app.set_version_flag("--version", std::string(dpaudit::kToolVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Run a mechanism under attack and write a guess transcript");
  sim_cmd->add_option("--config", sim.config_path,
                      "JSON mechanism spec; explicit flags override it");
  sim_cmd
      ->add_option("--mechanism", sim.mechanism,
                   "Mechanism kind: gaussian|laplace|rr|subsampled")
      ->check(CLI::IsMember({"gaussian", "laplace", "rr", "subsampled"}));
  sim_cmd->add_option("--sigma", sim.sigma,
                      "Gaussian / subsampled noise standard deviation");
  sim_cmd->add_option("--scale", sim.scale, "Laplace noise scale");
  sim_cmd->add_option("--eps", sim.eps, "Randomized-response epsilon");
  sim_cmd->add_option("--delta", sim.delta, "Randomized-response delta");
  sim_cmd->add_option("--q", sim.q, "Subsampling keep probability")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--n", sim.n, "Number of secret bits");
  CLI::Option* r_opt =
      sim_cmd->add_option("--r", sim.r, "Number of released guesses");
  sim_cmd
      ->add_option("--r-frac", sim.r_frac,
                   "Released fraction of n (in (0, 1]); default releases all")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(r_opt);
  sim_cmd
      ->add_option("--strategy", sim.strategy,
                   "Guessing strategy: special|general")
      ->check(CLI::IsMember({"special", "general"}));
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");
  sim_cmd->add_option("--out", sim.out_path,
                      "Transcript output path (default transcript.json)");

  AuditArgs aud;
  CLI::App* aud_cmd = app.add_subcommand(
      "audit",
      "Compute a p-value and an (eps, delta) lower bound from a transcript");
  aud_cmd->add_option("transcript", aud.transcript_path, "Transcript JSON")
      ->required()
      ->check(CLI::ExistingFile);
  aud_cmd
      ->add_option("--family", aud.family,
                   "Null family: gdp|laplace|epsdelta|subsampled-gdp")
      ->required()
      ->check(CLI::IsMember({"gdp", "laplace", "epsdelta", "subsampled-gdp"}));
  aud_cmd->add_option("--family-delta", aud.family_delta,
                      "Fixed delta of the epsdelta family");
  aud_cmd->add_option("--family-q", aud.family_q,
                      "Fixed sampling rate of the subsampled-gdp family");
  aud_cmd->add_option("--delta", aud.report_delta,
                      "Delta at which the epsilon lower bound is reported");
  aud_cmd->add_option("--significance", aud.significance,
                      "Rejection threshold for the p-value");
  aud_cmd->add_option("--tail", aud.tail, "Tail bound: chernoff|exact")
      ->check(CLI::IsMember({"chernoff", "exact"}));
  aud_cmd->add_option("--theta-max", aud.theta_max,
                      "Upper limit of the family-parameter search");
  aud_cmd->add_option("--cache-dir", aud.cache_dir,
                      "Directory for cached v_k tables");
  aud_cmd->add_option("--probe-grid", aud.probe_grid,
                      "Base-pair cells during the search phase");
  aud_cmd->add_option("--probe-nodes", aud.probe_nodes,
                      "Quadrature nodes during the search phase");
  aud_cmd->add_option("--final-grid", aud.final_grid,
                      "Base-pair cells for the certified result");
  aud_cmd->add_option("--final-nodes", aud.final_nodes,
                      "Quadrature nodes for the certified result");
  aud_cmd->add_option("--out", aud.out_path,
                      "Also write the report JSON to this path");

  VkArgs vk;
  CLI::App* vk_cmd = app.add_subcommand(
      "vk", "Tabulate order-statistic-adjusted error probabilities as CSV");
  vk_cmd
      ->add_option("--family", vk.family,
                   "Curve family: gdp|laplace|epsdelta|subsampled-gdp")
      ->required()
      ->check(CLI::IsMember({"gdp", "laplace", "epsdelta", "subsampled-gdp"}));
  vk_cmd->add_option("--param", vk.param, "Family parameter")->required();
  vk_cmd->add_option("--family-delta", vk.family_delta,
                     "Fixed delta of the epsdelta family");
  vk_cmd->add_option("--family-q", vk.family_q,
                     "Fixed sampling rate of the subsampled-gdp family");
  vk_cmd->add_option("--n", vk.n, "Number of scored guesses")->required();
  vk_cmd->add_option("--r", vk.r, "Number of released guesses")->required();
  vk_cmd->add_option("--grid", vk.grid, "Base-pair cells");
  vk_cmd->add_option("--nodes", vk.nodes, "Quadrature nodes per rank");
  vk_cmd->add_option("--out", vk.out_path, "CSV path (default stdout)");

  DumpBasePairArgs dump;
  CLI::App* dump_cmd = app.add_subcommand(
      "dump-basepair",
      "Emit the canonical distribution pair of a trade-off curve as CSV");
  dump_cmd
      ->add_option("--family", dump.family,
                   "Curve family: gdp|laplace|epsdelta|subsampled-gdp")
      ->required()
      ->check(CLI::IsMember({"gdp", "laplace", "epsdelta", "subsampled-gdp"}));
  dump_cmd->add_option("--param", dump.param, "Family parameter")->required();
  dump_cmd->add_option("--family-delta", dump.family_delta,
                       "Fixed delta of the epsdelta family");
  dump_cmd->add_option("--family-q", dump.family_q,
                       "Fixed sampling rate of the subsampled-gdp family");
  dump_cmd->add_option("--grid", dump.grid, "Base-pair cells (default 4096)");
  dump_cmd->add_option("--out", dump.out_path, "CSV path (default stdout)");

  std::string sweep_plan_path;
  std::string sweep_cache_dir;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Run simulate+audit grids from a JSON plan and write CSV");
  sweep_cmd->add_option("plan", sweep_plan_path, "Sweep plan JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--cache-dir", sweep_cache_dir,
                        "Directory for cached v_k tables");

  CLI::App* selfcheck_cmd = app.add_subcommand(
      "selfcheck", "Run fast numerical invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim_cmd->parsed()) return CmdSimulate(*sim_cmd, sim);
    if (aud_cmd->parsed()) return CmdAudit(aud);
    if (vk_cmd->parsed()) return CmdVk(vk);
    if (dump_cmd->parsed()) return CmdDumpBasePair(dump);
    if (sweep_cmd->parsed()) return CmdSweep(sweep_plan_path, sweep_cache_dir);
    if (selfcheck_cmd->parsed()) return CmdSelfCheck();
  } catch (const dpaudit::InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 2;
  } catch (const dpaudit::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "malformed input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
