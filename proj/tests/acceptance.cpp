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

// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Details of failures go to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "cfc_oracles.hpp"
#include "cflapprox/cfl.hpp"
#include "cflapprox/cflcfc.hpp"
#include "cflapprox/flow.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/lp.hpp"
#include "cflapprox/mfn.hpp"
#include "cflapprox/oracle.hpp"
#include "flow_oracles.hpp"
#include "lp_oracles.hpp"
#include "solution_oracles.hpp"

namespace cflapprox {
namespace {

// Summary line per criterion, printed in order at the end.
std::map<int, std::string>& Lines() {
  static std::map<int, std::string> lines;
  return lines;
}

// Failure counter with the first few messages kept.
class Criterion {
 public:
  explicit Criterion(int id) : id_(id) {}

  void Expect(bool ok, const std::string& what) {
    ++checked_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 10) std::fprintf(stderr, "criterion %d: %s\n", id_, what.c_str());
  }
  void ExpectLog(const InvariantLog& log, const std::string& where) {
    ++checked_;
    if (log.all_ok()) return;
    ++failed_;
    for (const std::string& name : log.failures()) ++failed_names_[name];
    if (failed_ <= 10) {
      std::string s;
      for (const auto& n : log.failures()) s += " " + n;
      std::fprintf(stderr, "criterion %d: %s:%s\n", id_, where.c_str(), s.c_str());
    }
  }
  bool Report(const std::string& summary) const {
    const bool pass = failed_ == 0 && checked_ > 0;
    char head[64];
    std::snprintf(head, sizeof(head), "[criterion %d] %s: ", id_,
                  pass ? "PASS" : "FAIL");
    Lines()[id_] = head + summary + "; " + std::to_string(checked_) +
                   " checks, " + std::to_string(failed_) + " failed";
    for (const auto& [name, n] : failed_names_) {
      std::fprintf(stderr, "criterion %d: %s failed %d times\n", id_,
                   name.c_str(), n);
    }
    return pass;
  }

 private:
  int id_;
  long checked_ = 0;
  long failed_ = 0;
  std::map<std::string, int> failed_names_;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Harness sizes: |F| in 2..6, |D| in 2..8.
GeneratorParams HarnessParams(int seed, bool cardinality) {
  GeneratorParams p;
  p.num_facilities = 2 + seed % 5;
  p.num_clients = 2 + (seed / 5) % 7;
  p.seed = static_cast<std::uint64_t>(seed);
  p.cardinality = cardinality;
  return p;
}

// The per-candidate factor, recomputed here from the two terms.
double CandidateFactor(double a) {
  return std::max(3.0 / (2.0 * a), (7.0 - 4.0 * a) / ((1.0 - a) * (1.0 - a)));
}

// Criteria 1, 4, 5.
bool CflHarness(bool* c4, bool* c5) {
  Criterion c1(1), k4(4), k5(5);
  const double alpha = cfl::DefaultAlpha();
  const double target = (10.0 + std::sqrt(67.0)) / 2.0;
  const double factor = CandidateFactor(alpha);
  double worst_lp = 0.0;
  double worst_opt = 0.0;
  long steps = 0;
  long cuts = 0;
  int with_small = 0;
  for (int seed = 1; seed <= 200; ++seed) {
    const Instance inst = GenerateEuclidean(HarnessParams(seed, false));
    const std::string tag = "seed " + std::to_string(seed);
    cfl::CflResult r;
    try {
      r = cfl::SolveCfl(inst);
    } catch (const Error& e) {
      c1.Expect(false, tag + ": " + e.what());
      continue;
    }
    const double opt = oracle::ExactOpt(inst).opt_cost;
    const oracle::Verification v = oracle::Verify(inst, r.solution);
    c1.Expect(v.feasible, tag + ": infeasible output");
    c1.Expect(std::abs(v.cost - r.cost) <= 1e-9 * std::max(1.0, r.cost),
              tag + ": reported cost differs");
    c1.Expect(r.cost <= (target + 1e-6) * r.lower_bound,
              tag + ": cost above bound times master LP");
    c1.Expect(r.cost <= 9.0927 * opt, tag + ": cost above 9.0927 OPT");
    c1.Expect(r.lower_bound <= opt + 1e-9 * std::max(1.0, opt),
              tag + ": master bound above OPT");
    worst_lp = std::max(worst_lp, r.ratio);
    worst_opt = std::max(worst_opt, opt > 0 ? r.cost / opt : 1.0);

    for (const cfl::CuttingPlaneStep& s : r.steps) {
      ++steps;
      if (s.separated) {
        ++cuts;
        k4.Expect(s.violation > 1e-8, tag + ": cut violation too small");
      } else {
        k4.Expect(s.rounded_cost <=
                      factor * s.candidate_cost +
                          1e-9 * std::max(1.0, s.candidate_cost),
                  tag + ": rounded cost above the candidate factor");
      }
    }
    k4.Expect(!r.steps.empty() && !r.steps.back().separated,
              tag + ": run did not end in a rounding");
    k5.ExpectLog(r.checks, tag);
    if (r.final_round.classes.num_small() > 0) ++with_small;
  }

  // Structured candidates with facilities below alpha, so the small-facility
  // rounding runs.
  XorShift64Star rng(5);
  int mixed_rounded = 0;
  int mixed_small = 0;
  for (int seed = 1; seed <= 400; ++seed) {
    const Instance inst = GenerateEuclidean(HarnessParams(seed, false));
    const int nf = inst.num_facilities();
    const int nd = inst.num_clients();
    std::vector<double> y(nf);
    std::vector<bool> big(nf);
    for (int i = 0; i < nf; ++i) {
      big[i] = rng.Uniform() < 0.4;
      y[i] = big[i] ? 1.0 : alpha * rng.Uniform(0.2, 0.97);
    }
    Matrix<double> x(nf, nd, 0.0);
    std::vector<double> room(nf);
    for (int i = 0; i < nf; ++i) room[i] = inst.capacity(i) * y[i];
    for (int j = 0; j < nd; ++j) {
      double need = 1.0;
      for (int i = 0; i < nf; ++i) {
        double take = std::min({need, y[i], room[i]});
        if (big[i]) take = std::min(take, rng.Uniform(0.5, 0.95));
        x(i, j) = take;
        room[i] -= take;
        need -= take;
      }
    }
    const std::string tag = "mixed seed " + std::to_string(seed);
    try {
      const cfl::RoundingOutcome r = cfl::RoundOrSeparate(inst, x, y);
      if (r.separated) {
        k4.Expect(r.violation > 1e-8, tag + ": cut violation too small");
        continue;
      }
      ++mixed_rounded;
      if (r.classes.num_small() > 0) ++mixed_small;
      k4.Expect(r.cost <= factor * r.candidate_cost +
                              1e-9 * std::max(1.0, r.candidate_cost),
                tag + ": rounded cost above the candidate factor");
      k5.ExpectLog(r.checks, tag);
    } catch (const Error& e) {
      k5.Expect(false, tag + ": " + e.what());
    }
  }
  k5.Expect(mixed_small > 0, "no mixed candidate had small facilities");

  const bool p1 = c1.Report("200 instances, max cost/LP " + Fmt("%.4f", worst_lp) +
                            ", max cost/OPT " + Fmt("%.4f", worst_opt));
  *c4 = k4.Report(std::to_string(steps) + " cutting-plane steps, " +
                  std::to_string(cuts) + " cuts");
  *c5 = k5.Report("200 runs (" + std::to_string(with_small) +
                  " with small facilities) plus " +
                  std::to_string(mixed_rounded) + " mixed roundings (" +
                  std::to_string(mixed_small) + " with small facilities)");
  return p1;
}

// Criteria 2 and 6.
bool CfcHarness(bool* c6) {
  Criterion c2(2), k6(6);
  double worst_lp = 0.0;
  double worst_opt = 0.0;
  int outlier_runs = 0;
  for (int seed = 1; seed <= 200; ++seed) {
    const Instance inst = GenerateEuclidean(HarnessParams(seed, true));
    const std::string tag = "seed " + std::to_string(seed);
    cfc::CfcResult r;
    try {
      r = cfc::SolveCflCfc(inst);
    } catch (const Error& e) {
      c2.Expect(false, tag + ": " + e.what());
      continue;
    }
    const double opt = oracle::ExactOpt(inst).opt_cost;
    const oracle::Verification v = oracle::Verify(inst, r.solution);
    c2.Expect(v.feasible, tag + ": infeasible output");
    c2.Expect(r.cost <= (4.0 + 1e-6) * r.lower_bound,
              tag + ": cost above 4 LP");
    c2.Expect(r.cost <= 4.0 * opt + 1e-9, tag + ": cost above 4 OPT");
    c2.Expect(r.lower_bound <= opt + 1e-9 * std::max(1.0, opt),
              tag + ": LP above OPT");
    worst_lp = std::max(worst_lp, r.ratio);
    worst_opt = std::max(worst_opt, r.cost / opt);
    k6.ExpectLog(r.checks, tag);
    if (!r.outliers.empty()) ++outlier_runs;
    if (r.phase2.exact) {
      k6.Expect(static_cast<int>(r.phase2.fractional.size()) <=
                    r.classes.num_large(),
                tag + ": more fractional facilities than large ones");
    }
  }

  // Random fractional points of the natural LP, where client clusters form.
  XorShift64Star rng(7);
  int client_clusters = 0;
  int exact_counts = 0;
  for (int seed = 1; seed <= 400; ++seed) {
    GeneratorParams p;
    p.num_facilities = 3 + seed % 5;
    p.num_clients = 2 + seed % 7;
    p.seed = static_cast<std::uint64_t>(seed);
    p.cardinality = true;
    p.capacity_range = {2, 6};
    const Instance inst = GenerateEuclidean(p);
    const testing::NaturalPoint pt = testing::RandomNaturalPoint(inst, rng);
    const std::string tag = "point " + std::to_string(seed);
    try {
      const cfc::CfcResult r = cfc::RoundNatural(inst, pt.x, pt.y, pt.alpha);
      k6.ExpectLog(r.checks, tag);
      k6.Expect(oracle::Verify(inst, r.solution).feasible,
                tag + ": infeasible output");
      for (const cfc::Cluster& q : r.clusters) {
        if (q.outlier_center) continue;
        ++client_clusters;
        k6.Expect(q.delta > 0.0 && q.delta <= 1.0 + 1e-9, tag + ": delta range");
      }
      if (r.phase2.exact && !r.phase2.g_set.empty()) {
        ++exact_counts;
        k6.Expect(static_cast<int>(r.phase2.fractional.size()) <=
                      r.classes.num_large(),
                  tag + ": more fractional facilities than large ones");
      }
    } catch (const Error& e) {
      k6.Expect(false, tag + ": " + e.what());
    }
  }
  k6.Expect(client_clusters > 0, "no client cluster was rounded");

  const bool p2 = c2.Report("200 instances, max cost/LP " + Fmt("%.4f", worst_lp) +
                            ", max cost/OPT " + Fmt("%.4f", worst_opt));
  *c6 = k6.Report("200 runs (" + std::to_string(outlier_runs) +
                  " with outliers) plus 400 fractional points (" +
                  std::to_string(client_clusters) + " client clusters, " +
                  std::to_string(exact_counts) + " exact fractional counts)");
  return p2;
}

bool AlphaConstants() {
  Criterion c(3);
  const double a = (10.0 - std::sqrt(67.0)) / 11.0;
  const double f1 = 3.0 / (2.0 * a);
  const double f2 = (7.0 - 4.0 * a) / ((1.0 - a) * (1.0 - a));
  const double target = (10.0 + std::sqrt(67.0)) / 2.0;
  c.Expect(std::abs(f1 - f2) <= 1e-9, "the two terms differ");
  c.Expect(std::abs(f1 - target) <= 1e-9, "first term off target");
  c.Expect(std::abs(f2 - target) <= 1e-9, "second term off target");
  c.Expect(std::abs(cfl::DefaultAlpha() - a) <= 1e-15, "library alpha differs");
  c.Expect(std::abs(cfl::RatioBound(a) - target) <= 1e-9,
           "library ratio bound differs");
  return c.Report("alpha " + Fmt("%.12f", a) + ", both terms " +
                  Fmt("%.10f", f1));
}

bool SeparationValidity() {
  Criterion c(7);
  long cuts = 0;
  long solutions = 0;
  int seed = 0;
  for (int k = 0; k < 50; ++k) {
    ++seed;
    GeneratorParams p;
    p.num_facilities = 1 + k % 3;
    p.num_clients = 1 + (k / 3) % 3;
    p.seed = static_cast<std::uint64_t>(1000 + seed);
    const Instance inst = GenerateEuclidean(p);
    const std::string tag = "tiny " + std::to_string(k);
    cfl::CflResult r;
    try {
      r = cfl::SolveCfl(inst);
    } catch (const Error& e) {
      c.Expect(false, tag + ": " + e.what());
      continue;
    }
    std::vector<std::vector<double>> points;
    testing::ForEachIntegralSolution(
        inst, [&](const std::vector<bool>& open, const std::vector<int>& assign) {
          const FractionalSolution s = IntegralSolution{open, assign}.ToFractional(
              inst.num_clients());
          points.push_back(mfn::PackParams(s.x, s.y));
        });
    std::size_t next_cut = 0;
    for (const cfl::CuttingPlaneStep& s : r.steps) {
      if (!s.separated) continue;
      const lp::Hyperplane& h = r.cut_pool[next_cut++];
      ++cuts;
      c.Expect(s.violation > 1e-8, tag + ": candidate violation too small");
      double scale = std::abs(h.b);
      for (double v : h.a) scale = std::max(scale, std::abs(v));
      for (const auto& theta : points) {
        ++solutions;
        c.Expect(h.Violation(theta) <= 1e-9 * std::max(1.0, scale),
                 tag + ": cut removes an integral solution");
      }
    }
  }
  c.Expect(cuts > 0, "no cuts were emitted");
  return c.Report("50 instances, " + std::to_string(cuts) + " cuts, " +
                  std::to_string(solutions) + " cut/solution pairs");
}

// Boxed LP whose rows all hold at a random interior point, so it is feasible.
lp::LinearProgram FeasibleBoxedLp(XorShift64Star& rng, int n, int m) {
  lp::LinearProgram prog(rng.Uniform() < 0.5 ? lp::Sense::kMinimize
                                             : lp::Sense::kMaximize);
  std::vector<double> x0(n);
  for (int k = 0; k < n; ++k) {
    const double lo = rng.UniformInt(-3, 1);
    const double hi = lo + rng.UniformInt(1, 5);
    x0[k] = lo + (hi - lo) * rng.UniformInt(0, 4) / 4.0;
    prog.AddVariable(lo, hi, rng.UniformInt(-5, 5));
  }
  for (int r = 0; r < m; ++r) {
    std::vector<lp::Term> terms;
    double at = 0.0;
    for (int k = 0; k < n; ++k) {
      if (rng.Uniform() < 0.6) {
        const double a = rng.UniformInt(-4, 4);
        terms.push_back({k, a});
        at += a * x0[k];
      }
    }
    const int rel = rng.UniformInt(0, 5);
    const double slack = rng.UniformInt(0, 3);
    if (rel <= 2) {
      prog.AddRow(std::move(terms), lp::Relation::kLessEqual, at + slack);
    } else if (rel <= 4) {
      prog.AddRow(std::move(terms), lp::Relation::kGreaterEqual, at - slack);
    } else {
      prog.AddRow(std::move(terms), lp::Relation::kEqual, at);
    }
  }
  return prog;
}

bool LpCorpus() {
  Criterion c(8);
  XorShift64Star rng(808);
  int optimal = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.UniformInt(1, 6);
    const int m = rng.UniformInt(1, 6);
    // Most cases are feasible by construction; the rest may not be.
    const lp::LinearProgram prog = trial % 5 == 4
                                       ? testing::RandomBoxedLp(rng, n, m)
                                       : FeasibleBoxedLp(rng, n, m);
    const std::string tag = "lp " + std::to_string(trial);
    const lp::LpSolution s = lp::Solve(prog);
    const lp::LpSolution again = lp::Solve(prog);
    const lp::LinearProgram copy = prog;
    const lp::LpSolution fresh = lp::Solve(copy);
    for (const lp::LpSolution* o : {&again, &fresh}) {
      c.Expect(o->status == s.status && o->x.size() == s.x.size() &&
                   o->duals.size() == s.duals.size() &&
                   std::memcmp(o->x.data(), s.x.data(),
                               s.x.size() * sizeof(double)) == 0 &&
                   std::memcmp(o->duals.data(), s.duals.data(),
                               s.duals.size() * sizeof(double)) == 0 &&
                   std::memcmp(&o->objective, &s.objective, sizeof(double)) == 0,
               tag + ": repeated solve differs");
    }
    const auto vertex = testing::VertexEnumerationOptimum(prog);
    if (!vertex) {
      ++infeasible;
      c.Expect(s.status == lp::Status::kInfeasible, tag + ": expected infeasible");
      continue;
    }
    ++optimal;
    if (s.status != lp::Status::kOptimal) {
      c.Expect(false, tag + ": expected optimal");
      continue;
    }
    const testing::KktReport kkt = testing::CheckKkt(prog, s);
    c.Expect(std::abs(s.objective - *vertex) <= 1e-7 * kkt.scale,
             tag + ": objective differs from vertex enumeration");
    c.Expect(kkt.primal_infeasibility <= 1e-9, tag + ": primal infeasible");
    c.Expect(kkt.dual_infeasibility <= 1e-9, tag + ": dual infeasible");
    c.Expect(kkt.duality_gap <= 1e-7 * kkt.scale, tag + ": duality gap");
    c.Expect(kkt.complementarity <= 1e-6, tag + ": complementary slackness");
  }
  return c.Report("100 LPs, " + std::to_string(optimal) + " optimal, " +
                  std::to_string(infeasible) + " infeasible");
}

bool FlowCorpus() {
  Criterion c(9);
  XorShift64Star rng(909);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.UniformInt(2, 10);
    const flow::FlowNetwork net = testing::RandomNetwork(rng, n, 0.35);
    const double got = flow::MaxFlow(net, 0, n - 1).value;
    const double cut = testing::EnumeratedMinCut(net, 0, n - 1);
    c.Expect(std::abs(got - cut) <= 1e-9,
             "network " + std::to_string(trial) + ": max flow != min cut");
  }
  for (int trial = 0; trial < 30; ++trial) {
    Matrix<double> cost(3, 4);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j) cost(i, j) = rng.Uniform(0.0, 10.0);
    }
    std::vector<int> cap(3);
    int total = 0;
    do {
      total = 0;
      for (int& u : cap) total += (u = rng.UniformInt(0, 4));
    } while (total < 4);
    const flow::AssignmentResult a = flow::MinCostAssignment(cost, cap);
    c.Expect(std::abs(a.cost - testing::EnumeratedAssignmentCost(cost, cap)) <=
                 1e-9,
             "assignment " + std::to_string(trial) + ": not optimal");
  }
  return c.Report("30 max-flow networks, 30 assignments of 3x4");
}

}  // namespace
}  // namespace cflapprox

int main() {
  using namespace cflapprox;  // NOLINT
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  bool c4 = false, c5 = false, c6 = false;
  ok &= CflHarness(&c4, &c5);
  const bool c2 = CfcHarness(&c6);
  ok &= c2;
  ok &= AlphaConstants();
  ok &= c4 && c5 && c6;
  ok &= SeparationValidity();
  ok &= LpCorpus();
  ok &= FlowCorpus();
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  for (const auto& [id, line] : Lines()) std::printf("%s\n", line.c_str());
  std::printf("acceptance %s in %.1f s\n", ok ? "passed" : "FAILED", secs);
  return ok ? 0 : 1;
}
