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

// Command-line front end.
//
//   cflapprox gen    --facilities 3 --clients 5 --seed 1 --out inst.json
//   cflapprox solve  --in inst.json --alg cflcfc --out report.json
//   cflapprox exact  --in inst.json --out opt.json
//   cflapprox verify --in inst.json --solution sol.json
//   cflapprox bench  --alg cfl --seeds 1..20 --nf 4 --nd 6 --out runs.csv
//
// Exit status: 0 success, 2 infeasible instance, 3 failed invariant or
// infeasible solution, 64 bad usage or input, 1 solver breakdown.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/io.hpp"
#include "cflapprox/oracle.hpp"
#include "cflapprox/report.hpp"

namespace {

using namespace cflapprox;  // NOLINT

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInfeasible = 2;
constexpr int kInvariant = 3;
constexpr int kUsage = 64;

struct Flags {
  std::string in;
  std::string out;
  std::string solution;
  std::string alg = "cfl";
  double alpha = cfl::DefaultAlpha();
  double tol = tol::kThreshold;
  std::uint64_t seed = 1;
  std::string seeds = "1..20";
  int facilities = 4;
  int clients = 6;
  int jobs = 1;
  bool exact_crosscheck = false;
  bool cardinality = false;
  std::pair<double, double> cost_range = {0.5, 2.0};
  std::pair<int, int> capacity_range = {1, 4};
};

// Writes to `path`, or stdout when it is empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    io::WriteFile(path, text);
  }
}

RunConfig MakeRunConfig(const Flags& f) {
  RunConfig c;
  c.algorithm = ParseAlgorithm(f.alg);
  c.alpha = f.alpha;
  c.tol = f.tol;
  c.exact_crosscheck = f.exact_crosscheck;
  return c;
}

int CmdGen(const Flags& f) {
  GeneratorParams p;
  p.num_facilities = f.facilities;
  p.num_clients = f.clients;
  p.seed = f.seed;
  p.cardinality = f.cardinality;
  p.cost_range = f.cost_range;
  p.capacity_range = f.capacity_range;
  const Instance inst = GenerateEuclidean(p);
  Emit(f.out, io::InstanceToJson(inst).dump(1) + "\n");
  return kOk;
}

int CmdSolve(const Flags& f) {
  const Instance inst = io::LoadInstance(f.in);
  const RunReport r = SolveAndReport(inst, MakeRunConfig(f), f.in);
  Emit(f.out, ReportToJson(r).dump(2) + "\n");
  if (!f.solution.empty()) io::SaveSolution(f.solution, r.solution, r.cost);
  std::cerr << AlgorithmName(r.algorithm) << ": cost " << FormatDouble(r.cost)
            << ", lower bound " << FormatDouble(r.lower_bound) << ", ratio "
            << FormatDouble(r.ratio);
  if (r.opt) std::cerr << ", opt " << FormatDouble(*r.opt);
  std::cerr << "\n";
  if (!r.invariants_ok) {
    for (const InvariantCheck& c : r.invariants) {
      if (!c.ok) std::cerr << "invariant failed: " << c.name << "\n";
    }
    return kInvariant;
  }
  return kOk;
}

int CmdExact(const Flags& f) {
  const Instance inst = io::LoadInstance(f.in);
  const oracle::OracleResult r = oracle::ExactOpt(inst, f.jobs);
  io::Json j = io::SolutionToJson(r.opt_solution, r.opt_cost);
  j["opt_cost"] = r.opt_cost;
  j["subsets_examined"] = r.subsets_examined;
  Emit(f.out, j.dump(2) + "\n");
  return kOk;
}

int CmdVerify(const Flags& f) {
  const Instance inst = io::LoadInstance(f.in);
  const IntegralSolution s = io::LoadSolution(f.solution);
  const oracle::Verification v = oracle::Verify(inst, s);
  io::Json j = {{"feasible", v.feasible},
                {"cost", v.cost},
                {"violations", v.violations}};
  Emit(f.out, j.dump(2) + "\n");
  return v.feasible ? kOk : kInvariant;
}

int CmdBench(const Flags& f) {
  BenchConfig b;
  b.run = MakeRunConfig(f);
  b.seeds = ParseSeedRange(f.seeds);
  b.num_facilities = f.facilities;
  b.num_clients = f.clients;
  b.jobs = f.jobs;
  const std::vector<RunReport> runs = Bench(b);
  std::string csv = std::string(CsvHeader()) + "\n";
  bool ok = true;
  double worst = 0.0;
  for (const RunReport& r : runs) {
    csv += CsvRow(r) + "\n";
    ok = ok && r.invariants_ok;
    worst = std::max(worst, r.ratio);
  }
  Emit(f.out, csv);
  std::cerr << runs.size() << " runs, max ratio " << FormatDouble(worst)
            << (ok ? "" : ", some invariants failed") << "\n";
  return ok ? kOk : kInvariant;
}

void AddSolverFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alg", f.alg, "Algorithm")
      ->check(CLI::IsMember({"cfl", "cflcfc"}))
      ->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Rounding threshold for cfl")
      ->capture_default_str();
  cmd->add_option("--tol", f.tol, "Threshold comparison tolerance")
      ->capture_default_str();
  cmd->add_flag("--exact-crosscheck", f.exact_crosscheck,
                "Also solve exactly when there are at most 12 facilities");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximation algorithms for capacitated facility location"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--facilities,--nf", f.facilities)->capture_default_str();
  gen->add_option("--clients,--nd", f.clients)->capture_default_str();
  gen->add_option("--seed", f.seed)->capture_default_str();
  gen->add_flag("--cardinality", f.cardinality, "Every facility costs 1");
  gen->add_option("--cost-range", f.cost_range, "Opening cost range LO HI");
  gen->add_option("--capacity-range", f.capacity_range, "Capacity range LO HI");
  gen->add_option("--out", f.out, "Output path (default stdout)");

  CLI::App* solve = app.add_subcommand("solve", "Run an approximation");
  solve->add_option("--in", f.in, "Instance JSON")->required();
  solve->add_option("--out", f.out, "Report JSON (default stdout)");
  solve->add_option("--solution", f.solution, "Also write the solution JSON");
  AddSolverFlags(solve, f);

  CLI::App* exact = app.add_subcommand("exact", "Solve exactly by enumeration");
  exact->add_option("--in", f.in, "Instance JSON")->required();
  exact->add_option("--out", f.out, "Output path (default stdout)");
  exact->add_option("--jobs", f.jobs, "Threads")->capture_default_str();

  CLI::App* verify = app.add_subcommand("verify", "Check a solution");
  verify->add_option("--in", f.in, "Instance JSON")->required();
  verify->add_option("--solution", f.solution, "Solution JSON")->required();
  verify->add_option("--out", f.out, "Output path (default stdout)");

  CLI::App* bench = app.add_subcommand("bench", "Run a seed range to CSV");
  bench->add_option("--seeds", f.seeds, "Seed or range A..B")
      ->capture_default_str();
  bench->add_option("--facilities,--nf", f.facilities)->capture_default_str();
  bench->add_option("--clients,--nd", f.clients)->capture_default_str();
  bench->add_option("--jobs", f.jobs, "Threads")->capture_default_str();
  bench->add_option("--out", f.out, "CSV path (default stdout)");
  AddSolverFlags(bench, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return CmdGen(f);
    if (solve->parsed()) return CmdSolve(f);
    if (exact->parsed()) return CmdExact(f);
    if (verify->parsed()) return CmdVerify(f);
    if (bench->parsed()) return CmdBench(f);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "bad input: " << e.what() << "\n";
    return kUsage;
  } catch (const GuardError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
