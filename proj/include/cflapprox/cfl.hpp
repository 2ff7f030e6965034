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

// Round-or-separate approximation for capacitated facility location.
//
// A candidate (x', y') is either separated from the multicommodity flow
// relaxation by a cut, or rounded to an integral solution costing at most
// RatioBound(alpha) * psi(x', y'). SolveCfl wraps this in a cutting-plane loop
// over a master LP, so the master optimum is a lower bound on OPT and the
// returned solution is within (10 + sqrt(67)) / 2 of it at the default alpha.
//
// Rounding outline:
//   - facilities split into I (0 < y' < alpha) and U (y' >= alpha); U is
//     opened outright, and the overloaded part of U gets a b-matching h whose
//     tightly-occupied rows become the partial assignment g;
//   - the flow network is solved with y raised to 1 on U;
//   - the demand that the flow routes to I is re-assigned by iteratively
//     solving a small LP and clustering around the cheapest facility;
//   - a min-cost assignment on the opened set gives the final x.

#ifndef CFLAPPROX_CFL_HPP_
#define CFLAPPROX_CFL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cflapprox/common.hpp"
#include "cflapprox/flow.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/lp.hpp"
#include "cflapprox/mfn.hpp"

namespace cflapprox::cfl {

// The alpha at which both ratio terms meet.
inline double DefaultAlpha() { return (10.0 - std::sqrt(67.0)) / 11.0; }

inline double RatioBound(double alpha) {
  return std::max(3.0 / (2.0 * alpha),
                  (7.0 - 4.0 * alpha) / ((1.0 - alpha) * (1.0 - alpha)));
}

struct RoundingParams {
  double alpha = DefaultAlpha();
  // Absolute tolerance of the threshold comparisons.
  double threshold_tol = tol::kThreshold;
  // Tolerance of the recorded invariant checks.
  double invariant_tol = tol::kInvariant;
  // Cutting-plane rounds; -1 means 200 * (|F| + |D|).
  int max_iterations = -1;
  // Seed the master LP with the natural relaxation rows (coverage, capacity,
  // x <= y). Without them the master starts from the unit box alone.
  bool natural_rows = false;
};

inline void CheckParams(const RoundingParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0 / 3.0 + 1e-15)) {
    throw ContractError("alpha must lie in (0, 1/3]");
  }
}

struct Classification {
  // I.
  std::vector<bool> small;
  // U.
  std::vector<bool> large;
  // The part of U loaded above (1 - alpha) u_i.
  std::vector<bool> overloaded;

  int num_small() const {
    return static_cast<int>(std::count(small.begin(), small.end(), true));
  }
};

inline Classification Classify(const Instance& inst, const Matrix<double>& x,
                               const std::vector<double>& y, double alpha,
                               double tolerance = tol::kThreshold) {
  const int nf = inst.num_facilities();
  Classification c;
  c.small.assign(nf, false);
  c.large.assign(nf, false);
  c.overloaded.assign(nf, false);
  for (int i = 0; i < nf; ++i) {
    if (y[i] >= alpha - tolerance) {
      c.large[i] = true;
      c.overloaded[i] =
          x.RowSum(i) > (1.0 - alpha) * inst.capacity(i) + tolerance;
    } else if (y[i] > tol::kZero) {
      c.small[i] = true;
    }
  }
  return c;
}

struct PartialAssignment {
  // x'/(1 - alpha) on overloaded rows, zero elsewhere.
  Matrix<double> edge_cap;
  // Maximum b-matching on those edges.
  Matrix<double> h;
  std::vector<bool> tight;
  // Clients that are partially assigned in h or reachable from one.
  std::vector<bool> reachable_clients;
  // h on tight rows, zero elsewhere.
  Matrix<double> g;
};

inline PartialAssignment BuildG(const Instance& inst, const Matrix<double>& x,
                                const Classification& cls, double alpha,
                                double tolerance = tol::kReach) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  PartialAssignment pa;
  pa.edge_cap = Matrix<double>(nf, nd, 0.0);
  std::vector<double> fcap(nf, 0.0);
  for (int i = 0; i < nf; ++i) {
    if (!cls.overloaded[i]) continue;
    fcap[i] = inst.capacity(i);
    for (int j = 0; j < nd; ++j) pa.edge_cap(i, j) = x(i, j) / (1.0 - alpha);
  }
  pa.h = flow::MaxBMatching(pa.edge_cap, fcap);
  const flow::AlternatingReach reach =
      flow::ReachFromPartialClients(pa.h, pa.edge_cap, tolerance);
  pa.tight = reach.facilities;
  pa.reachable_clients = reach.clients;
  pa.g = Matrix<double>(nf, nd, 0.0);
  for (int i = 0; i < nf; ++i) {
    if (!pa.tight[i]) continue;
    for (int j = 0; j < nd; ++j) pa.g(i, j) = pa.h(i, j);
  }
  return pa;
}

// Load that the intermediate flow places on (i, j) for i in U; other rows
// are zero. Flow f must be feasible for the network built with g.
inline Matrix<double> BuildSparseFlow(const Instance& inst,
                                      const mfn::CommodityFlow& f,
                                      const PartialAssignment& pa,
                                      const Classification& cls, double alpha) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  Matrix<double> out(nf, nd, 0.0);
  auto sink_flow = [&](int i, int j) {
    return j < static_cast<int>(f.commodity.size()) &&
                   !f.commodity[j].sink.empty()
               ? f.commodity[j].sink[i]
               : 0.0;
  };
  for (int i = 0; i < nf; ++i) {
    if (!cls.large[i]) continue;
    for (int j = 0; j < nd; ++j) {
      if (cls.overloaded[i] && pa.tight[i]) {
        out(i, j) = (1.0 - alpha) * pa.g(i, j);
      } else if (cls.overloaded[i] && !pa.reachable_clients[j]) {
        out(i, j) = (1.0 - alpha) * pa.h(i, j);
      } else {
        out(i, j) = sink_flow(i, j);
      }
    }
  }
  return out;
}

// Remaining instance of the iterative rounding.
struct ParamTuple {
  // F'.
  std::vector<bool> facilities;
  // D'.
  std::vector<bool> clients;
  // r'.
  std::vector<double> residual;
  // r_j = 1 - sum_i g_ij, frozen at the start.
  std::vector<double> base;

  bool done() const {
    return std::none_of(clients.begin(), clients.end(), [](bool b) { return b; });
  }
};

// F' = I, r'_j = flow of commodity j sinking through I, and D' keeps the
// clients whose residual exceeds alpha * r_j.
inline ParamTuple InitialTuple(const Instance& inst, const Classification& cls,
                               const mfn::CommodityFlow& f,
                               const mfn::MfnNetwork& net, double alpha,
                               double tolerance = tol::kThreshold) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  ParamTuple t;
  t.facilities = cls.small;
  t.clients.assign(nd, false);
  t.residual.assign(nd, 0.0);
  t.base.assign(nd, 0.0);
  for (int j = 0; j < nd; ++j) {
    t.base[j] = net.demand(j);
    if (!f.commodity[j].sink.empty()) {
      for (int i = 0; i < nf; ++i) {
        if (cls.small[i]) t.residual[j] += f.commodity[j].sink[i];
      }
    }
    t.clients[j] = t.residual[j] > alpha * t.base[j] + tolerance;
  }
  return t;
}

struct ModifiedLpSolution {
  Matrix<double> x;
  std::vector<double> y;
  double objective = 0.0;
};

// min psi over F' x D' subject to exact residual coverage, capacity,
// x_ij <= (2 alpha / (1 - alpha)) r_j y_i and y_i <= (1 - alpha) / 2.
inline ModifiedLpSolution SolveModifiedLp(const Instance& inst,
                                          const ParamTuple& t, double alpha) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const double slope = 2.0 * alpha / (1.0 - alpha);
  lp::LinearProgram prog(lp::Sense::kMinimize);
  Matrix<int> xv(nf, nd, -1);
  std::vector<int> yv(nf, -1);
  for (int i = 0; i < nf; ++i) {
    if (!t.facilities[i]) continue;
    yv[i] = prog.AddVariable(0.0, (1.0 - alpha) / 2.0, inst.open_cost(i));
    for (int j = 0; j < nd; ++j) {
      if (t.clients[j]) xv(i, j) = prog.AddVariable(0.0, lp::kInf, inst.c(i, j));
    }
  }
  for (int j = 0; j < nd; ++j) {
    if (!t.clients[j]) continue;
    std::vector<lp::Term> row;
    for (int i = 0; i < nf; ++i) {
      if (xv(i, j) >= 0) row.push_back({xv(i, j), 1.0});
    }
    prog.AddRow(std::move(row), lp::Relation::kEqual, t.residual[j]);
  }
  for (int i = 0; i < nf; ++i) {
    if (yv[i] < 0) continue;
    std::vector<lp::Term> row{{yv[i], -static_cast<double>(inst.capacity(i))}};
    for (int j = 0; j < nd; ++j) {
      if (xv(i, j) < 0) continue;
      row.push_back({xv(i, j), 1.0});
      prog.AddRow({{xv(i, j), 1.0}, {yv[i], -slope * t.base[j]}},
                  lp::Relation::kLessEqual, 0.0);
    }
    prog.AddRow(std::move(row), lp::Relation::kLessEqual, 0.0);
  }
  const lp::LpSolution sol = lp::Solve(prog);
  if (sol.status != lp::Status::kOptimal) {
    throw InvariantViolation("rounding LP has no optimum on the current tuple");
  }
  auto clean = [](double v) { return std::abs(v) <= tol::kZero ? 0.0 : v; };
  ModifiedLpSolution out{Matrix<double>(nf, nd, 0.0), std::vector<double>(nf, 0.0),
                         sol.objective};
  for (int i = 0; i < nf; ++i) {
    if (yv[i] >= 0) out.y[i] = clean(sol.x[yv[i]]);
    for (int j = 0; j < nd; ++j) {
      if (xv(i, j) >= 0) out.x(i, j) = clean(sol.x[xv(i, j)]);
    }
  }
  return out;
}

// Largest violation of the rounding LP's constraints by (x, y) on tuple t.
inline double ModifiedLpViolation(const Instance& inst, const ParamTuple& t,
                                  double alpha, const Matrix<double>& x,
                                  const std::vector<double>& y) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const double slope = 2.0 * alpha / (1.0 - alpha);
  double worst = 0.0;
  auto note = [&](double v) { worst = std::max(worst, v); };
  for (int j = 0; j < nd; ++j) {
    if (!t.clients[j]) continue;
    double s = 0.0;
    for (int i = 0; i < nf; ++i) {
      if (t.facilities[i]) s += x(i, j);
    }
    note(std::abs(s - t.residual[j]));
  }
  for (int i = 0; i < nf; ++i) {
    if (!t.facilities[i]) continue;
    note(-y[i]);
    note(y[i] - (1.0 - alpha) / 2.0);
    double load = 0.0;
    for (int j = 0; j < nd; ++j) {
      if (!t.clients[j]) continue;
      load += x(i, j);
      note(-x(i, j));
      note(x(i, j) - slope * t.base[j] * y[i]);
    }
    note(load - inst.capacity(i) * y[i]);
  }
  return worst;
}

struct IterationRecord {
  int facility = -1;
  // Picked because its y reached (1 - alpha) / 2.
  bool saturated = false;
  double theta = 0.0;
  // Tuple at the start of the iteration.
  ParamTuple tuple;
  Matrix<double> x_dagger;
  std::vector<double> y_dagger;
  // Amount gathered to the picked facility via each client.
  std::vector<double> delta;
  // Contribution fraction of each facility; 1 for the picked one.
  std::vector<double> sigma;
  // Contribution of facility k via client j.
  Matrix<double> sigma_pair;
  // Row of x'' for the picked facility.
  std::vector<double> assigned;
  std::vector<int> dropped_clients;
};

struct IterativeRoundingResult {
  ParamTuple initial;
  // I \ F' at the end.
  std::vector<bool> rounded;
  // x''.
  Matrix<double> x2;
  std::vector<IterationRecord> log;
};

// Clusters around one facility per iteration until D' is empty. Every
// property the construction relies on is recorded in checks when given.
inline IterativeRoundingResult IterativeRound(
    const Instance& inst, const ParamTuple& initial, double alpha,
    double tolerance = tol::kThreshold, InvariantLog* checks = nullptr) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const double cap_y = (1.0 - alpha) / 2.0;
  // Assigned mass below this counts as none when choosing a center.
  constexpr double kMinMass = 1e-9;
  IterativeRoundingResult res;
  res.initial = initial;
  res.rounded.assign(nf, false);
  res.x2 = Matrix<double>(nf, nd, 0.0);
  ParamTuple t = initial;
  const int budget =
      static_cast<int>(std::count(t.facilities.begin(), t.facilities.end(), true));

  while (!t.done()) {
    if (static_cast<int>(res.log.size()) >= budget) {
      throw InvariantViolation("rounding ran out of small facilities");
    }
    const ModifiedLpSolution lps = SolveModifiedLp(inst, t, alpha);
    IterationRecord rec;
    rec.tuple = t;
    rec.x_dagger = lps.x;
    rec.y_dagger = lps.y;

    std::vector<double> mass(nf, 0.0);
    for (int k = 0; k < nf; ++k) {
      if (!t.facilities[k]) continue;
      for (int j = 0; j < nd; ++j) {
        if (t.clients[j]) mass[k] += lps.x(k, j);
      }
    }
    int pick = -1;
    for (int k = 0; k < nf && pick < 0; ++k) {
      if (t.facilities[k] && lps.y[k] >= cap_y - tolerance) pick = k;
    }
    rec.saturated = pick >= 0;
    if (pick < 0) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nf; ++k) {
        if (!t.facilities[k] || mass[k] <= kMinMass) continue;
        double conn = 0.0;
        for (int j = 0; j < nd; ++j) {
          if (t.clients[j]) conn += inst.c(k, j) * lps.x(k, j);
        }
        const double theta =
            (3.0 * inst.open_cost(k) * lps.y[k] + 2.0 * conn) / mass[k];
        if (theta < best - 1e-12 * std::max(1.0, std::abs(best))) {
          best = theta;
          pick = k;
        }
      }
      if (pick < 0) {
        throw InvariantViolation("no facility carries assignment in rounding LP");
      }
      rec.theta = best;
    }
    rec.facility = pick;
    const int i = pick;

    rec.delta.assign(nd, 0.0);
    rec.sigma.assign(nf, 0.0);
    rec.sigma_pair = Matrix<double>(nf, nd, 0.0);
    rec.sigma[i] = 1.0;
    if (!rec.saturated) {
      const double scale = cap_y / lps.y[i] - 1.0;
      for (int j = 0; j < nd; ++j) {
        if (!t.clients[j]) continue;
        double others = 0.0;
        for (int k = 0; k < nf; ++k) {
          if (t.facilities[k] && k != i) others += lps.x(k, j);
        }
        const double d = scale * lps.x(i, j);
        rec.delta[j] = d;
        if (checks) {
          checks->Record("gather_amount_bounds",
                         std::max(-d, d - others));
        }
        if (others <= tol::kZero) continue;
        const double use = std::clamp(d, 0.0, others);
        double split = 0.0;
        for (int k = 0; k < nf; ++k) {
          if (!t.facilities[k] || k == i) continue;
          rec.sigma_pair(k, j) = lps.x(k, j) / others * use;
          split += rec.sigma_pair(k, j);
        }
        if (checks) checks->Record("gather_split", std::abs(split - d));
      }
      for (int k = 0; k < nf; ++k) {
        if (!t.facilities[k] || k == i || mass[k] <= 0.0) continue;
        double s = 0.0;
        for (int j = 0; j < nd; ++j) s += rec.sigma_pair(k, j);
        rec.sigma[k] = s / mass[k];
        if (checks) checks->Record("contribution_fraction_at_most_one", rec.sigma[k] - 1.0);
      }
    }

    rec.assigned.assign(nd, 0.0);
    for (int j = 0; j < nd; ++j) {
      if (!t.clients[j]) continue;
      for (int k = 0; k < nf; ++k) {
        if (t.facilities[k]) rec.assigned[j] += rec.sigma[k] * lps.x(k, j);
      }
      res.x2(i, j) = rec.assigned[j];
    }
    if (checks) {
      double load = 0.0;
      for (double v : rec.assigned) load += v;
      checks->Record("small_facility_load",
                     load - cap_y * inst.capacity(i));
      if (!rec.saturated) {
        checks->Record("small_facility_load_identity",
                       std::abs(load - cap_y / lps.y[i] * mass[i]));
      }
    }

    // Update the tuple.
    ParamTuple next = t;
    next.facilities[i] = false;
    Matrix<double> x_next(nf, nd, 0.0);
    std::vector<double> y_next(nf, 0.0);
    for (int k = 0; k < nf; ++k) {
      if (!next.facilities[k]) continue;
      y_next[k] = (1.0 - rec.sigma[k]) * lps.y[k];
      for (int j = 0; j < nd; ++j) {
        x_next(k, j) = (1.0 - rec.sigma[k]) * lps.x(k, j);
      }
    }
    for (int j = 0; j < nd; ++j) {
      if (!t.clients[j]) continue;
      double r = 0.0;
      for (int k = 0; k < nf; ++k) {
        if (next.facilities[k]) r += x_next(k, j);
      }
      next.residual[j] = r;
      if (r <= alpha * t.base[j] + tolerance) {
        next.clients[j] = false;
        rec.dropped_clients.push_back(j);
      }
    }
    if (checks) {
      checks->Record("successor_tuple_witness",
                     ModifiedLpViolation(inst, next, alpha, x_next, y_next));
    }
    res.rounded[i] = true;
    res.log.push_back(std::move(rec));
    t = std::move(next);
  }
  if (checks) {
    checks->RecordFlag("rounding_iterations_within_small_count",
                       static_cast<int>(res.log.size()) <= budget);
    for (int j = 0; j < nd; ++j) {
      const double got = res.x2.ColSum(j);
      checks->Record("residual_mostly_assigned",
                     initial.residual[j] - alpha * initial.base[j] - got,
                     tolerance + tol::kInvariant);
    }
  }
  return res;
}

// Outcome of one round-or-separate call.
struct RoundingOutcome {
  bool separated = false;
  lp::Hyperplane cut;
  // Cut violation at the candidate (x', y').
  double violation = 0.0;

  IntegralSolution solution;
  double cost = 0.0;
  double candidate_cost = 0.0;
  double ratio_bound = 0.0;

  Classification classes;
  PartialAssignment partial;
  mfn::FeasibilityResult feasibility;
  Matrix<double> sparse_flow;
  IterativeRoundingResult rounding;
  // Combined fractional assignment on the opened facilities; scaled by
  // 1 / (1 - alpha) it is feasible.
  Matrix<double> x3;
  InvariantLog checks;
};

inline RoundingOutcome RoundOrSeparate(const Instance& inst,
                                       const Matrix<double>& x_in,
                                       const std::vector<double>& y_in,
                                       const RoundingParams& params = {}) {
  CheckParams(params);
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const double alpha = params.alpha;
  if (x_in.rows() != nf || x_in.cols() != nd ||
      static_cast<int>(y_in.size()) != nf) {
    throw ContractError("candidate shape does not match the instance");
  }
  // Clip float noise from the master LP; reject anything else outside boxes.
  auto clip = [](double v) {
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
      throw ContractError("candidate outside the unit box");
    }
    return std::clamp(v, 0.0, 1.0);
  };
  Matrix<double> x(nf, nd);
  std::vector<double> y(nf);
  for (int i = 0; i < nf; ++i) {
    y[i] = clip(y_in[i]);
    for (int j = 0; j < nd; ++j) x(i, j) = clip(x_in(i, j));
  }

  RoundingOutcome out;
  out.candidate_cost = Cost(inst, x, y);
  out.ratio_bound = RatioBound(alpha);
  out.classes = Classify(inst, x, y, alpha, params.threshold_tol);
  const Classification& cls = out.classes;
  out.partial = BuildG(inst, x, cls, alpha);
  const PartialAssignment& pa = out.partial;
  InvariantLog& checks = out.checks;
  const double itol = params.invariant_tol;

  for (int i = 0; i < nf; ++i) {
    if (pa.tight[i]) {
      checks.Record("tight_facility_saturated",
                    std::abs(pa.h.RowSum(i) - inst.capacity(i)), itol);
    }
  }

  std::vector<double> y2 = y;
  for (int i = 0; i < nf; ++i) {
    if (cls.large[i]) y2[i] = 1.0;
  }
  const mfn::MfnNetwork net = mfn::Build(inst, x, y2, pa.g);
  out.feasibility = mfn::Feasible(net);
  if (!out.feasibility.feasible) {
    out.separated = true;
    out.cut = out.feasibility.cut;
    out.violation = out.cut.Violation(mfn::PackParams(x, y));
    checks.Record("cut_violated_by_candidate", 1e-8 - out.violation, 0.0);
    return out;
  }
  const mfn::CommodityFlow& f = out.feasibility.flow;
  {
    double worst = 0.0;
    for (double v : mfn::PathConstraintViolations(net, f.paths)) {
      worst = std::max(worst, v);
    }
    checks.Record("flow_path_constraints", worst, itol);
    checks.RecordFlag("flow_path_count_within_rows",
                      static_cast<int>(f.paths.size()) <= out.feasibility.lp_rows);
    // Sources of settled clients carry only their own commodity.
    double foreign = 0.0;
    for (const mfn::FlowPath& p : f.paths) {
      for (int v : p.via) {
        if (!pa.reachable_clients[v] && v != p.commodity) foreign += p.flow;
      }
    }
    checks.Record("settled_sources_carry_own_commodity", foreign, itol);
  }

  out.sparse_flow = BuildSparseFlow(inst, f, pa, cls, alpha);
  for (int i = 0; i < nf; ++i) {
    if (!cls.large[i]) continue;
    checks.Record("large_facility_sparse_load",
                  out.sparse_flow.RowSum(i) - (1.0 - alpha) * inst.capacity(i),
                  itol);
  }

  const ParamTuple t0 =
      InitialTuple(inst, cls, f, net, alpha, params.threshold_tol);
  {
    Matrix<double> wx(nf, nd, 0.0);
    std::vector<double> wy(nf, 0.0);
    for (int i = 0; i < nf; ++i) {
      if (!cls.small[i]) continue;
      wy[i] = (1.0 - alpha) / (2.0 * alpha) * y[i];
      for (int j = 0; j < nd; ++j) wx(i, j) = f.commodity[j].sink.empty()
                                                  ? 0.0
                                                  : f.commodity[j].sink[i];
    }
    checks.Record("initial_tuple_witness",
                  ModifiedLpViolation(inst, t0, alpha, wx, wy), itol);
  }
  out.rounding = IterativeRound(inst, t0, alpha, params.threshold_tol, &checks);

  std::vector<bool> open(nf, false);
  for (int i = 0; i < nf; ++i) open[i] = cls.large[i] || out.rounding.rounded[i];
  out.x3 = Matrix<double>(nf, nd, 0.0);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      if (cls.large[i]) {
        out.x3(i, j) = out.sparse_flow(i, j);
      } else if (out.rounding.rounded[i]) {
        out.x3(i, j) = out.rounding.x2(i, j);
      }
    }
  }
  for (int j = 0; j < nd; ++j) {
    checks.Record("coverage", (1.0 - alpha) - out.x3.ColSum(j), itol);
  }
  for (int i = 0; i < nf; ++i) {
    if (open[i]) {
      checks.Record("scaled_assignment_within_capacity",
                    out.x3.RowSum(i) / (1.0 - alpha) - inst.capacity(i), itol);
    }
  }

  std::vector<int> cap(nf, 0);
  for (int i = 0; i < nf; ++i) cap[i] = open[i] ? inst.capacity(i) : 0;
  flow::AssignmentResult assignment;
  try {
    assignment = flow::MinCostAssignment(inst.connection_costs(), cap);
  } catch (const InfeasibleError&) {
    throw InvariantViolation("opened facilities cannot serve every client");
  }
  out.solution = IntegralSolution{open, assignment.assign};
  out.cost = Cost(inst, out.solution);
  checks.Record("candidate_ratio",
                out.cost - out.ratio_bound * out.candidate_cost,
                itol * std::max(1.0, out.candidate_cost));
  return out;
}

// One master-LP round.
struct CuttingPlaneStep {
  double candidate_cost = 0.0;
  bool separated = false;
  double violation = 0.0;
  // Cost of the rounded solution; only set when not separated.
  double rounded_cost = 0.0;
};

struct CflResult {
  IntegralSolution solution;
  double cost = 0.0;
  // Master LP optimum at the accepted candidate; at most OPT.
  double lower_bound = 0.0;
  double ratio = 0.0;
  int cuts = 0;
  int iterations = 0;
  Matrix<double> x_lp;
  std::vector<double> y_lp;
  std::vector<lp::Hyperplane> cut_pool;
  std::vector<CuttingPlaneStep> steps;
  RoundingOutcome final_round;
  InvariantLog checks;
};

// Cutting-plane driver: minimizes psi over the unit box, the natural rows and
// all cuts found so far, and hands each optimum to RoundOrSeparate.
inline CflResult SolveCfl(const Instance& inst, const RoundingParams& params = {}) {
  CheckParams(params);
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  if (inst.total_capacity() < nd) {
    throw InfeasibleError("total capacity is below the number of clients");
  }
  const int budget =
      params.max_iterations >= 0 ? params.max_iterations : 200 * (nf + nd);

  // Variables follow the PackParams layout so cuts drop straight in.
  lp::LinearProgram master(lp::Sense::kMinimize);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) master.AddVariable(0.0, 1.0, inst.c(i, j));
  }
  for (int i = 0; i < nf; ++i) master.AddVariable(0.0, 1.0, inst.open_cost(i));
  for (int j = 0; j < nd && params.natural_rows; ++j) {
    std::vector<lp::Term> row;
    for (int i = 0; i < nf; ++i) row.push_back({mfn::XParam(nd, i, j), 1.0});
    master.AddRow(std::move(row), lp::Relation::kGreaterEqual, 1.0);
  }
  for (int i = 0; i < nf && params.natural_rows; ++i) {
    const int yi = mfn::YParam(nf, nd, i);
    std::vector<lp::Term> row{{yi, -static_cast<double>(inst.capacity(i))}};
    for (int j = 0; j < nd; ++j) {
      row.push_back({mfn::XParam(nd, i, j), 1.0});
      master.AddRow({{mfn::XParam(nd, i, j), 1.0}, {yi, -1.0}},
                    lp::Relation::kLessEqual, 0.0);
    }
    master.AddRow(std::move(row), lp::Relation::kLessEqual, 0.0);
  }

  CflResult res;
  for (int round = 0; round < budget; ++round) {
    const lp::LpSolution sol = lp::Solve(master);
    if (sol.status == lp::Status::kInfeasible) {
      if (res.cuts == 0) throw InfeasibleError("master LP is infeasible");
      throw InvariantViolation("cuts made the master LP infeasible");
    }
    if (sol.status != lp::Status::kOptimal) {
      throw SolverFailure("master LP did not reach an optimum");
    }
    Matrix<double> x(nf, nd);
    std::vector<double> y(nf);
    for (int i = 0; i < nf; ++i) {
      y[i] = sol.x[mfn::YParam(nf, nd, i)];
      for (int j = 0; j < nd; ++j) x(i, j) = sol.x[mfn::XParam(nd, i, j)];
    }
    RoundingOutcome r = RoundOrSeparate(inst, x, y, params);
    ++res.iterations;
    CuttingPlaneStep step;
    step.candidate_cost = r.candidate_cost;
    step.separated = r.separated;
    step.violation = r.violation;
    if (!r.separated) step.rounded_cost = r.cost;
    res.steps.push_back(step);
    res.checks.RecordFlag(
        "round_or_separate_dichotomy",
        r.separated ? r.violation > 1e-8
                    : r.cost <= r.ratio_bound * r.candidate_cost +
                                    params.invariant_tol *
                                        std::max(1.0, r.candidate_cost));
    res.checks.Merge(r.checks);
    if (r.separated) {
      std::vector<lp::Term> row;
      for (std::size_t k = 0; k < r.cut.a.size(); ++k) {
        if (r.cut.a[k] != 0.0) row.push_back({static_cast<int>(k), r.cut.a[k]});
      }
      master.AddRow(std::move(row), lp::Relation::kGreaterEqual, r.cut.b);
      res.cut_pool.push_back(r.cut);
      ++res.cuts;
      continue;
    }
    res.solution = r.solution;
    res.cost = r.cost;
    res.lower_bound = sol.objective;
    res.ratio = res.lower_bound > 0.0 ? res.cost / res.lower_bound
                                      : (res.cost > 0.0 ? lp::kInf : 1.0);
    res.x_lp = std::move(x);
    res.y_lp = std::move(y);
    res.final_round = std::move(r);
    return res;
  }
  throw BudgetExceeded("cutting-plane budget exhausted after " +
                       std::to_string(res.cuts) + " cuts");
}

}  // namespace cflapprox::cfl

#endif  // CFLAPPROX_CFL_HPP_
