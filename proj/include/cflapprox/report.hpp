// Copyright 2026 The cflapprox Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// One solver run, recorded: what was run, what it produced, and every
// invariant the run checked. Shared by the command-line tool and the bench
// harness.

#ifndef CFLAPPROX_REPORT_HPP_
#define CFLAPPROX_REPORT_HPP_

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "cflapprox/cfl.hpp"
#include "cflapprox/cflcfc.hpp"
#include "cflapprox/common.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/io.hpp"
#include "cflapprox/oracle.hpp"

namespace cflapprox {

enum class Algorithm { kCfl, kCflCfc };

inline const char* AlgorithmName(Algorithm a) {
  return a == Algorithm::kCfl ? "cfl" : "cflcfc";
}

inline Algorithm ParseAlgorithm(const std::string& s) {
  if (s == "cfl") return Algorithm::kCfl;
  if (s == "cflcfc") return Algorithm::kCflCfc;
  throw ContractError("unknown algorithm \"" + s + "\"");
}

struct RunConfig {
  Algorithm algorithm = Algorithm::kCfl;
  // Only the cfl rounding uses alpha.
  double alpha = cfl::DefaultAlpha();
  double tol = tol::kThreshold;
  // Solve exactly as well, when the instance is small enough.
  bool exact_crosscheck = false;
  int crosscheck_max_facilities = 12;
};

struct RunReport {
  std::string instance_id;
  Algorithm algorithm = Algorithm::kCfl;
  double alpha = 0.0;
  double tol = 0.0;
  std::optional<std::uint64_t> seed;
  int nf = 0;
  int nd = 0;
  double cost = 0.0;
  double lower_bound = 0.0;
  // cost / lower_bound.
  double ratio = 0.0;
  std::optional<double> opt;
  std::optional<double> ratio_opt;
  int cuts = 0;
  int iterations = 0;
  double wall_ms = 0.0;
  std::vector<InvariantCheck> invariants;
  bool invariants_ok = true;
  IntegralSolution solution;
};

// Worst-case factor the algorithm promises against the optimum.
inline double GuaranteedRatio(const RunConfig& c) {
  return c.algorithm == Algorithm::kCfl ? cfl::RatioBound(c.alpha) : 4.0;
}

inline RunReport SolveAndReport(const Instance& inst, const RunConfig& config,
                                const std::string& instance_id = "") {
  RunReport r;
  r.instance_id = instance_id;
  r.algorithm = config.algorithm;
  r.alpha = config.alpha;
  r.tol = config.tol;
  r.nf = inst.num_facilities();
  r.nd = inst.num_clients();
  InvariantLog log;
  const auto start = std::chrono::steady_clock::now();
  if (config.algorithm == Algorithm::kCfl) {
    cfl::RoundingParams p;
    p.alpha = config.alpha;
    p.threshold_tol = config.tol;
    cfl::CflResult res = cfl::SolveCfl(inst, p);
    r.solution = std::move(res.solution);
    r.cost = res.cost;
    r.lower_bound = res.lower_bound;
    r.ratio = res.ratio;
    r.cuts = res.cuts;
    r.iterations = res.iterations;
    log = std::move(res.checks);
  } else {
    cfc::Options o;
    o.threshold_tol = config.tol;
    cfc::CfcResult res = cfc::SolveCflCfc(inst, o);
    r.solution = std::move(res.solution);
    r.cost = res.cost;
    r.lower_bound = res.lower_bound;
    r.ratio = res.ratio;
    r.iterations = res.iterations;
    log = std::move(res.checks);
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - start)
                  .count();
  const oracle::Verification v = oracle::Verify(inst, r.solution);
  log.RecordFlag("solution_feasible", v.feasible);
  log.Record("reported_cost_matches", std::abs(v.cost - r.cost),
             tol::kInvariant * std::max(1.0, r.cost));
  if (config.exact_crosscheck &&
      inst.num_facilities() <= config.crosscheck_max_facilities) {
    const double opt = oracle::ExactOpt(inst).opt_cost;
    const double scale = std::max(1.0, opt);
    r.opt = opt;
    r.ratio_opt = opt > 0.0 ? r.cost / opt : (r.cost > 0.0 ? INFINITY : 1.0);
    log.Record("lower_bound_at_most_opt", r.lower_bound - opt,
               tol::kInvariant * scale);
    log.Record("cost_at_least_opt", opt - r.cost, tol::kInvariant * scale);
    log.Record("ratio_vs_opt_within_guarantee",
               r.cost - GuaranteedRatio(config) * opt, tol::kInvariant * scale);
  }
  r.invariants = log.checks();
  r.invariants_ok = log.all_ok();
  return r;
}

// Shortest decimal that reads back as the same double.
inline std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline io::Json ReportToJson(const RunReport& r) {
  auto num = [](double v) -> io::Json {
    return std::isfinite(v) ? io::Json(v) : io::Json(nullptr);
  };
  auto opt = [&num](const std::optional<double>& v) -> io::Json {
    return v ? num(*v) : io::Json(nullptr);
  };
  io::Json params = {{"tol", r.tol}};
  if (r.algorithm == Algorithm::kCfl) params["alpha"] = r.alpha;
  params["seed"] = r.seed ? io::Json(*r.seed) : io::Json(nullptr);
  io::Json inv = io::Json::array();
  for (const InvariantCheck& c : r.invariants) {
    inv.push_back({{"name", c.name},
                   {"ok", c.ok},
                   {"excess", num(c.excess)},
                   {"tolerance", num(c.tolerance)}});
  }
  return {{"instance", r.instance_id},
          {"algorithm", AlgorithmName(r.algorithm)},
          {"params", std::move(params)},
          {"nf", r.nf},
          {"nd", r.nd},
          {"cost", num(r.cost)},
          {"lower_bound", num(r.lower_bound)},
          {"ratio", num(r.ratio)},
          {"opt", opt(r.opt)},
          {"ratio_opt", opt(r.ratio_opt)},
          {"cuts", r.cuts},
          {"iterations", r.iterations},
          {"wall_ms", r.wall_ms},
          {"invariants", std::move(inv)},
          {"invariants_ok", r.invariants_ok},
          {"solution", io::SolutionToJson(r.solution, r.cost)}};
}

inline const char* CsvHeader() {
  return "seed,alg,alpha,nf,nd,cost,lp_bound,opt,ratio_lp,ratio_opt,cuts,"
         "iters,ms,invariants_ok";
}

// Optional fields are left empty; alpha is empty for cflcfc, which has none.
inline std::string CsvRow(const RunReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  char ms[32];
  std::snprintf(ms, sizeof(ms), "%.3f", r.wall_ms);
  std::string s;
  s += r.seed ? std::to_string(*r.seed) : std::string();
  s += ',';
  s += AlgorithmName(r.algorithm);
  s += ',';
  s += r.algorithm == Algorithm::kCfl ? FormatDouble(r.alpha) : std::string();
  s += ',' + std::to_string(r.nf) + ',' + std::to_string(r.nd);
  s += ',' + FormatDouble(r.cost) + ',' + FormatDouble(r.lower_bound);
  s += ',' + opt(r.opt) + ',' + FormatDouble(r.ratio) + ',' + opt(r.ratio_opt);
  s += ',' + std::to_string(r.cuts) + ',' + std::to_string(r.iterations);
  s += ',' + std::string(ms) + ',' + (r.invariants_ok ? "1" : "0");
  return s;
}

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
};

// "7" or "1..20".
inline SeedRange ParseSeedRange(const std::string& s) {
  auto parse = [&s](std::string_view part) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc() ||
        res.ptr != part.data() + part.size()) {
      throw ContractError("bad seed range \"" + s + "\"");
    }
    return v;
  };
  const std::string_view view(s);
  const std::size_t dots = view.find("..");
  SeedRange r;
  if (dots == std::string_view::npos) {
    r.first = r.last = parse(view);
  } else {
    r.first = parse(view.substr(0, dots));
    r.last = parse(view.substr(dots + 2));
  }
  if (r.first > r.last) throw ContractError("empty seed range \"" + s + "\"");
  return r;
}

struct BenchConfig {
  RunConfig run;
  SeedRange seeds;
  int num_facilities = 4;
  int num_clients = 6;
  int jobs = 1;
};

// Generator settings for one bench seed. Cardinality costs for cflcfc.
inline GeneratorParams BenchInstanceParams(const BenchConfig& b,
                                           std::uint64_t seed) {
  GeneratorParams p;
  p.num_facilities = b.num_facilities;
  p.num_clients = b.num_clients;
  p.seed = seed;
  p.cardinality = b.run.algorithm == Algorithm::kCflCfc;
  return p;
}

// Runs every seed, possibly on several threads, and returns the reports in
// seed order. The first error in seed order is rethrown after all runs end.
inline std::vector<RunReport> Bench(const BenchConfig& b) {
  const std::size_t n = b.seeds.last - b.seeds.first + 1;
  std::vector<RunReport> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const std::uint64_t seed = b.seeds.first + k;
      try {
        const Instance inst = GenerateEuclidean(BenchInstanceParams(b, seed));
        out[k] = SolveAndReport(inst, b.run, "seed-" + std::to_string(seed));
        out[k].seed = seed;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = static_cast<int>(
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(b.jobs, 1)), 1, n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace cflapprox

#endif  // CFLAPPROX_REPORT_HPP_
