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

// 4-approximation for capacitated facility location with cardinality
// facility costs (every facility costs 1 to open).
//
// The natural LP is solved with its dual; alpha_j (the dual of the coverage
// row) bounds how far client j travels in the LP. Facilities split at 1/2:
// U = {y' >= 1/2} is opened outright and I = {0 < y' < 1/2} is rounded.
//
// Phase 1 forms clusters around clients in increasing alpha order. A client
// center absorbs its small neighbors into the one with the largest capacity.
// A client that loses too much of its small mass is eroded: its remaining
// small demand is re-homed at its U facilities as outlier clients, whose
// clusters are left for phase 2. Phase 2 solves an assignment LP between the
// outlier-cluster facilities G and the hosts U, and opens every G facility
// with positive value in a basic optimum.
//
// Every step keeps a witness fractional assignment x_circ that the final
// min-cost assignment can only improve on; the checks log records how each
// runtime-verifiable property fared.

#ifndef CFLAPPROX_CFLCFC_HPP_
#define CFLAPPROX_CFLCFC_HPP_

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

namespace cflapprox::cfc {

struct Options {
  // Absolute slack on the 1/2 comparisons.
  double threshold_tol = tol::kThreshold;
  // Relative slack of the invariant checks.
  double invariant_tol = tol::kInvariant;
  // Solve the natural LP in rational arithmetic.
  bool exact_natural_lp = false;
  // The outlier LP is solved exactly when G has at most this many facilities.
  int exact_outlier_lp_max = 10;
};

// Dual of the natural LP: alpha per client, beta and eta per facility, gamma
// per pair.
struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> eta;
  Matrix<double> gamma;
  double objective = 0.0;
};

struct NaturalLpSolution {
  Matrix<double> x;
  std::vector<double> y;
  double objective = 0.0;
  DualSolution dual;
  // Largest violation of a dual constraint (or sign) before clamping.
  double dual_violation = 0.0;
  // Largest complementary-slackness product.
  double complementarity = 0.0;
  double gap = 0.0;
  // max over x_ij > 0 of c_ij - alpha_j.
  double radius_violation = 0.0;
};

inline int XVar(int nd, int i, int j) { return i * nd + j; }
inline int YVar(int nf, int nd, int i) { return nf * nd + i; }

// Rows: coverage per client, then capacity per facility, then x <= y per pair.
inline lp::LinearProgram BuildNaturalLp(const Instance& inst) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  lp::LinearProgram lp(lp::Sense::kMinimize);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) lp.AddVariable(0.0, lp::kInf, inst.c(i, j));
  }
  for (int i = 0; i < nf; ++i) lp.AddVariable(0.0, 1.0, inst.open_cost(i));
  for (int j = 0; j < nd; ++j) {
    std::vector<lp::Term> t;
    for (int i = 0; i < nf; ++i) t.push_back({XVar(nd, i, j), 1.0});
    lp.AddRow(std::move(t), lp::Relation::kGreaterEqual, 1.0);
  }
  for (int i = 0; i < nf; ++i) {
    std::vector<lp::Term> t;
    for (int j = 0; j < nd; ++j) t.push_back({XVar(nd, i, j), 1.0});
    t.push_back({YVar(nf, nd, i), -static_cast<double>(inst.capacity(i))});
    lp.AddRow(std::move(t), lp::Relation::kLessEqual, 0.0);
  }
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      lp.AddRow({{XVar(nd, i, j), 1.0}, {YVar(nf, nd, i), -1.0}},
                lp::Relation::kLessEqual, 0.0);
    }
  }
  return lp;
}

inline void RequireCardinality(const Instance& inst) {
  if (!inst.cardinality_costs()) {
    throw ContractError("every facility must cost exactly 1 to open");
  }
  if (inst.total_capacity() < inst.num_clients()) {
    throw InfeasibleError("total capacity is smaller than the number of clients");
  }
}

inline NaturalLpSolution SolveNaturalLp(const Instance& inst,
                                        bool exact = false) {
  RequireCardinality(inst);
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const lp::LinearProgram prog = BuildNaturalLp(inst);
  const lp::LpSolution sol = exact ? lp::ToDouble(lp::Solve<lp::Rational>(prog))
                                   : lp::Solve<double>(prog);
  if (sol.status == lp::Status::kInfeasible) {
    throw InfeasibleError("natural LP is infeasible");
  }
  if (sol.status != lp::Status::kOptimal) {
    throw SolverFailure("natural LP has no optimum");
  }

  NaturalLpSolution out;
  out.objective = sol.objective;
  out.x = Matrix<double>(nf, nd, 0.0);
  out.y.assign(nf, 0.0);
  auto snap = [](double v) { return std::abs(v) <= tol::kZero ? 0.0 : v; };
  for (int i = 0; i < nf; ++i) {
    out.y[i] = std::clamp(snap(sol.x[YVar(nf, nd, i)]), 0.0, 1.0);
    for (int j = 0; j < nd; ++j) {
      out.x(i, j) = std::max(0.0, snap(sol.x[XVar(nd, i, j)]));
    }
  }

  DualSolution& d = out.dual;
  d.alpha.assign(nd, 0.0);
  d.beta.assign(nf, 0.0);
  d.eta.assign(nf, 0.0);
  d.gamma = Matrix<double>(nf, nd, 0.0);
  double viol = 0.0;
  for (int j = 0; j < nd; ++j) {
    viol = std::max(viol, -sol.duals[j]);
    d.alpha[j] = std::max(0.0, sol.duals[j]);
  }
  for (int i = 0; i < nf; ++i) {
    viol = std::max(viol, sol.duals[nd + i]);
    d.beta[i] = std::max(0.0, -sol.duals[nd + i]);
    for (int j = 0; j < nd; ++j) {
      const double raw = sol.duals[nd + nf + i * nd + j];
      viol = std::max(viol, raw);
      d.gamma(i, j) = std::max(0.0, -raw);
    }
  }
  for (int i = 0; i < nf; ++i) {
    double load = inst.capacity(i) * d.beta[i] + d.gamma.RowSum(i);
    d.eta[i] = std::max(0.0, load - inst.open_cost(i));
  }
  d.objective = 0.0;
  for (int j = 0; j < nd; ++j) d.objective += d.alpha[j];
  for (int i = 0; i < nf; ++i) d.objective -= d.eta[i];

  double cs = 0.0;
  double radius = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      const double slack =
          d.beta[i] + d.gamma(i, j) + inst.c(i, j) - d.alpha[j];
      viol = std::max(viol, -slack);
      cs = std::max(cs, out.x(i, j) * std::abs(slack));
      cs = std::max(cs, d.gamma(i, j) * std::abs(out.y[i] - out.x(i, j)));
      if (out.x(i, j) > tol::kZero) {
        radius = std::max(radius, inst.c(i, j) - d.alpha[j]);
      }
    }
    const double load = inst.capacity(i) * d.beta[i] + d.gamma.RowSum(i);
    const double yslack = inst.open_cost(i) + d.eta[i] - load;
    cs = std::max(cs, out.y[i] * std::abs(yslack));
    cs = std::max(cs, d.eta[i] * (1.0 - out.y[i]));
    cs = std::max(cs, d.beta[i] * std::abs(inst.capacity(i) * out.y[i] -
                                           out.x.RowSum(i)));
  }
  for (int j = 0; j < nd; ++j) {
    cs = std::max(cs, d.alpha[j] * std::abs(out.x.ColSum(j) - 1.0));
  }
  out.dual_violation = viol;
  out.complementarity = cs;
  out.gap = std::abs(out.objective - d.objective);
  out.radius_violation = std::max(0.0, radius);
  return out;
}

// Scales down any client column covering more than 1. This never raises the
// cost, so an optimal solution stays optimal.
inline void TrimCoverage(Matrix<double>& x) {
  for (int j = 0; j < x.cols(); ++j) {
    const double s = x.ColSum(j);
    if (s > 1.0) {
      for (int i = 0; i < x.rows(); ++i) x(i, j) /= s;
    }
  }
}

enum class ClientKind { kSmallOnly, kMixed, kLargeOnly };

struct Classes {
  // I: 0 < y' < 1/2.
  std::vector<bool> small;
  // U: y' >= 1/2.
  std::vector<bool> large;
  std::vector<ClientKind> clients;

  int num_small() const {
    return static_cast<int>(std::count(small.begin(), small.end(), true));
  }
  int num_large() const {
    return static_cast<int>(std::count(large.begin(), large.end(), true));
  }
};

inline Classes Classify(const Matrix<double>& x, const std::vector<double>& y,
                        double threshold_tol = tol::kThreshold) {
  const int nf = x.rows();
  const int nd = x.cols();
  Classes c;
  c.small.assign(nf, false);
  c.large.assign(nf, false);
  for (int i = 0; i < nf; ++i) {
    if (y[i] >= 0.5 - threshold_tol) {
      c.large[i] = true;
    } else if (y[i] > tol::kZero) {
      c.small[i] = true;
    }
  }
  c.clients.assign(nd, ClientKind::kSmallOnly);
  for (int j = 0; j < nd; ++j) {
    bool on_small = false;
    bool on_large = false;
    for (int i = 0; i < nf; ++i) {
      if (x(i, j) <= tol::kZero) continue;
      on_small = on_small || c.small[i];
      on_large = on_large || c.large[i];
    }
    if (!on_large) {
      c.clients[j] = ClientKind::kSmallOnly;
    } else if (on_small) {
      c.clients[j] = ClientKind::kMixed;
    } else {
      c.clients[j] = ClientKind::kLargeOnly;
    }
  }
  return c;
}

// Synthetic client carrying part of an eroded client's demand. Its id is an
// extended client index (originals first, then outliers in creation order).
struct OutlierClient {
  int id = -1;
  int host = -1;
  int parent = -1;
  double demand = 0.0;
  double alpha = 0.0;
};

struct Cluster {
  bool outlier_center = false;
  int center = -1;
  double center_alpha = 0.0;
  // Smallest alpha over the active clients when the center was picked.
  double min_alpha = 0.0;
  std::vector<int> satellites;
  // Client clusters only.
  int rounded = -1;
  double delta = 0.0;
  // Total x* on the rounded facility right after the cluster.
  double rounded_load = 0.0;
};

struct Phase2 {
  // State entering phase 2, facilities x extended clients.
  Matrix<double> x2;
  std::vector<double> y2;
  // Scaling factor per extended client.
  std::vector<double> t;
  std::vector<int> g_set;
  // Host of the outlier cluster a G facility belongs to, else -1.
  std::vector<int> host_of;
  // Bundled demand per facility (zero outside U).
  std::vector<double> demand;
  // Bundled assignment, G rows by U columns (indexed by facility ids).
  Matrix<double> g;
  // Outlier-LP optimum, same indexing as g.
  Matrix<double> x_lp;
  std::vector<double> y_lp;
  bool exact = false;
  double lp_objective = 0.0;
  double witness_objective = 0.0;
  std::vector<int> fractional;
  // Unbundled assignment, facilities x extended clients.
  Matrix<double> h;
};

class Rounder {
 public:
  Rounder(const Instance& inst, const Matrix<double>& x,
          const std::vector<double>& y, std::vector<double> alpha,
          const Options& opts = {})
      : inst_(inst), opts_(opts), nf_(inst.num_facilities()),
        nd_(inst.num_clients()), y0_(y), y_(y), alpha_(std::move(alpha)) {
    if (x.rows() != nf_ || x.cols() != nd_ ||
        static_cast<int>(y.size()) != nf_ ||
        static_cast<int>(alpha_.size()) != nd_) {
      throw ContractError("rounder input does not match the instance");
    }
    classes_ = Classify(x, y, opts_.threshold_tol);
    x0_.assign(nd_, std::vector<double>(nf_, 0.0));
    for (int j = 0; j < nd_; ++j) {
      for (int i = 0; i < nf_; ++i) x0_[j][i] = x(i, j);
    }
    x_ = x0_;
    xstar_.assign(nd_, std::vector<double>(nf_, 0.0));
    residual_.assign(nd_, 0.0);
    active_.assign(nd_, false);
    for (int j = 0; j < nd_; ++j) {
      active_[j] = classes_.clients[j] != ClientKind::kLargeOnly;
    }
    in_f_ = classes_.small;
    rounded_.assign(nf_, false);
    children_.assign(nd_, {});
  }

  const Instance& instance() const { return inst_; }
  const Classes& classes() const { return classes_; }
  int num_extended() const { return static_cast<int>(x_.size()); }
  double x(int i, int l) const { return x_[l][i]; }
  double original_x(int i, int l) const { return x0_[l][i]; }
  double y(int i) const { return y_[i]; }
  double x_star(int i, int l) const { return xstar_[l][i]; }
  double alpha(int l) const { return alpha_[l]; }
  double residual(int j) const { return residual_[j]; }
  bool in_f_prime(int i) const { return in_f_[i]; }
  // D' for originals, H' for outliers.
  bool active(int l) const { return active_[l]; }
  bool rounded(int i) const { return rounded_[i]; }
  const std::vector<OutlierClient>& outliers() const { return outliers_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const std::vector<int>& children(int j) const { return children_[j]; }
  const InvariantLog& checks() const { return checks_; }
  InvariantLog& mutable_checks() { return checks_; }

  double FPrimeMass(int l) const {
    double s = 0.0;
    for (int i = 0; i < nf_; ++i) {
      if (in_f_[i]) s += x_[l][i];
    }
    return s;
  }
  double LargeMass(int j) const {
    double s = 0.0;
    for (int i = 0; i < nf_; ++i) {
      if (classes_.large[i]) s += x0_[j][i];
    }
    return s;
  }
  bool AnyActive() const {
    return std::find(active_.begin(), active_.end(), true) != active_.end();
  }

  // Re-homes the small residue of mixed client j at its U facilities.
  std::vector<int> CreateOutliers(int j) {
    if (j < 0 || j >= nd_ || !active_[j] ||
        classes_.clients[j] != ClientKind::kMixed) {
      throw ContractError("only active mixed clients can be eroded");
    }
    const double sf = FPrimeMass(j);
    if (sf >= 0.5 - opts_.threshold_tol) {
      throw ContractError("client still has half of its demand on F'");
    }
    const double su = LargeMass(j);
    const double r = std::min(sf, su);
    residual_[j] = r;
    const double scale = Scale();
    std::vector<int> made;
    std::vector<double> added(nf_, 0.0);
    double total = 0.0;
    for (int w = 0; w < nf_; ++w) {
      if (!classes_.large[w] || x0_[j][w] <= tol::kZero) continue;
      OutlierClient o;
      o.id = num_extended();
      o.host = w;
      o.parent = j;
      o.demand = r * x0_[j][w] / su;
      o.alpha = alpha_[j] + inst_.c(w, j);
      std::vector<double> col(nf_, 0.0);
      double assigned = 0.0;
      for (int i = 0; i < nf_; ++i) {
        if (in_f_[i] && x_[j][i] > 0.0 && sf > 0.0) {
          col[i] = o.demand * x_[j][i] / sf;
          added[i] += col[i];
          assigned += col[i];
        }
      }
      checks_.Record("outlier_demand_within_host_share",
                     o.demand - x0_[j][w], opts_.invariant_tol);
      checks_.Record("outlier_fully_assigned", std::abs(assigned - o.demand),
                     opts_.invariant_tol);
      total += o.demand;
      x_.push_back(std::move(col));
      x0_.push_back(x_.back());
      xstar_.emplace_back(nf_, 0.0);
      alpha_.push_back(o.alpha);
      active_.push_back(true);
      children_[j].push_back(o.id);
      outliers_.push_back(o);
      made.push_back(o.id);
    }
    checks_.Record("outlier_demand_split", std::abs(total - r), 1e-9 * scale);
    for (int i = 0; i < nf_; ++i) {
      if (!in_f_[i]) continue;
      checks_.Record("outlier_load_not_increased", added[i] - x_[j][i],
                     opts_.invariant_tol);
      x_[j][i] = 0.0;
    }
    active_[j] = false;
    CheckRunning();
    return made;
  }

  // Erodes every active mixed client below 1/2 on F', in id order.
  int ErodeMixedClients() {
    int n = 0;
    for (int j = 0; j < nd_; ++j) {
      if (active_[j] && classes_.clients[j] == ClientKind::kMixed &&
          FPrimeMass(j) < 0.5 - opts_.threshold_tol) {
        CreateOutliers(j);
        ++n;
      }
    }
    return n;
  }

  // Smallest alpha over D' and H'; ties go to the smaller extended id.
  int SelectCenter() const {
    int best = -1;
    for (int l = 0; l < num_extended(); ++l) {
      if (!active_[l]) continue;
      if (best < 0 || alpha_[l] < alpha_[best]) best = l;
    }
    return best;
  }

  Cluster FormOutlierCluster(int k) {
    if (k < nd_ || k >= num_extended() || !active_[k]) {
      throw ContractError("outlier cluster needs an active outlier center");
    }
    Cluster q = StartCluster(k);
    q.outlier_center = true;
    for (int i : q.satellites) in_f_[i] = false;
    active_[k] = false;
    CheckRunning();
    clusters_.push_back(q);
    return q;
  }

  Cluster RoundClientCluster(int j) {
    if (j < 0 || j >= nd_ || !active_[j]) {
      throw ContractError("client cluster needs an active original center");
    }
    Cluster q = StartCluster(j);
    if (q.satellites.empty()) {
      throw ContractError("client cluster has no satellite facility");
    }
    int top = q.satellites.front();
    for (int i : q.satellites) {
      if (inst_.capacity(i) > inst_.capacity(top)) top = i;
    }
    q.rounded = top;
    double others = 0.0;
    for (int i : q.satellites) {
      if (i != top) others += y_[i];
    }
    const double delta =
        others > tol::kZero ? (0.5 - y_[top]) / others
                            : std::numeric_limits<double>::infinity();
    checks_.Record("delta_in_unit_interval",
                   delta > 0.0 ? delta - 1.0 : 1.0 - delta,
                   delta > 0.0 ? opts_.invariant_tol : 1.0);
    if (!(delta > 0.0) || delta > 1.0 + opts_.invariant_tol) {
      throw InvariantViolation("cluster scale outside (0, 1]");
    }
    q.delta = std::min(delta, 1.0);
    for (int l : q.satellites) {
      if (l == top) continue;
      y_[l] *= 1.0 - q.delta;
      for (int k = 0; k < num_extended(); ++k) {
        if (!active_[k] || x_[k][l] <= 0.0) continue;
        const double moved = q.delta * x_[k][l];
        x_[k][l] -= moved;
        xstar_[k][top] += moved;
      }
    }
    for (int k = 0; k < num_extended(); ++k) {
      if (!active_[k]) continue;
      xstar_[k][top] += x_[k][top];
      x_[k][top] = 0.0;
    }
    in_f_[top] = false;
    rounded_[top] = true;
    double load = 0.0;
    for (int k = 0; k < num_extended(); ++k) load += xstar_[k][top];
    q.rounded_load = load;
    checks_.Record("rounded_facility_half_load",
                   load - 0.5 * inst_.capacity(top),
                   opts_.invariant_tol * std::max(1.0, load));
    clusters_.push_back(q);
    CheckRunning();
    return q;
  }

  // Drops small-only clients that fell below 1/2 on F'.
  int DropSmallOnlyClients() {
    int n = 0;
    for (int j = 0; j < nd_; ++j) {
      if (!active_[j] || classes_.clients[j] != ClientKind::kSmallOnly) {
        continue;
      }
      if (FPrimeMass(j) < 0.5 - opts_.threshold_tol) {
        for (int i = 0; i < nf_; ++i) {
          if (in_f_[i]) x_[j][i] = 0.0;
        }
        active_[j] = false;
        ++n;
      }
    }
    return n;
  }

  void RunPhase1() {
    int iterations = 0;
    int facility_steps = 0;
    const int cap = classes_.num_small() + 4 * nd_ * (nf_ + 1) + 4;
    while (AnyActive()) {
      ErodeMixedClients();
      const int center = SelectCenter();
      if (center < 0) break;
      if (++iterations > cap) {
        throw InvariantViolation("phase 1 does not terminate");
      }
      const Cluster q = center >= nd_ ? FormOutlierCluster(center)
                                      : RoundClientCluster(center);
      if (q.rounded >= 0 || !q.satellites.empty()) ++facility_steps;
      DropSmallOnlyClients();
    }
    iterations_ = iterations;
    checks_.Record("phase1_iterations_within_small_count",
                   facility_steps - classes_.num_small(), 0.0);
  }

  int iterations() const { return iterations_; }

  Phase2 RunPhase2() {
    if (AnyActive()) throw ContractError("phase 1 has not finished");
    const int ne = num_extended();
    const double itol = opts_.invariant_tol;
    Phase2 p;
    p.x2 = Matrix<double>(nf_, ne, 0.0);
    for (int l = 0; l < ne; ++l) {
      for (int i = 0; i < nf_; ++i) p.x2(i, l) = x_[l][i];
    }
    p.y2 = y_;
    p.host_of.assign(nf_, -1);
    for (const Cluster& q : clusters_) {
      if (!q.outlier_center) continue;
      const int w = outliers_[q.center - nd_].host;
      for (int i : q.satellites) {
        if (p.host_of[i] >= 0) {
          checks_.RecordFlag("outlier_satellites_partition", false);
        }
        p.host_of[i] = w;
        p.g_set.push_back(i);
      }
    }
    std::sort(p.g_set.begin(), p.g_set.end());
    checks_.RecordFlag("outlier_satellites_partition", true);
    std::vector<bool> in_g(nf_, false);
    for (int i : p.g_set) in_g[i] = true;

    // Entry status.
    for (int i : p.g_set) {
      double load = 0.0;
      for (int l = 0; l < ne; ++l) load += p.x2(i, l);
      checks_.Record("entry_small_loads", load - inst_.capacity(i) * p.y2[i],
                     itol * std::max(1.0, load));
    }
    auto absorbed = [&](int l) {
      double s = 0.0;
      for (int i = 0; i < nf_; ++i) {
        if (classes_.small[i]) s += xstar_[l][i];
        if (in_g[i]) s += p.x2(i, l);
      }
      return s;
    };
    for (int j = 0; j < nd_; ++j) {
      if (classes_.clients[j] == ClientKind::kSmallOnly) {
        checks_.Record("entry_small_only_coverage", 0.5 - absorbed(j),
                       opts_.threshold_tol + itol);
      } else if (classes_.clients[j] == ClientKind::kMixed) {
        checks_.Record("entry_mixed_coverage",
                       0.5 - absorbed(j) - LargeMass(j),
                       opts_.threshold_tol + itol);
      }
    }
    for (const OutlierClient& o : outliers_) {
      checks_.Record("entry_outlier_conservation",
                     std::abs(absorbed(o.id) - o.demand), itol);
    }
    for (const OutlierClient& o : outliers_) {
      for (int i : p.g_set) {
        if (p.x2(i, o.id) > tol::kZero) {
          checks_.Record("outlier_radius",
                         inst_.facility_distance(i, o.host) - o.alpha,
                         itol * std::max(1.0, o.alpha));
        }
      }
    }

    // Scaling factors.
    p.t.assign(ne, 1.0);
    for (int j = 0; j < nd_; ++j) {
      const double den = absorbed(j);
      if (den > tol::kZero) {
        p.t[j] = (1.0 - LargeMass(j) - residual_[j]) / den;
      }
      checks_.Record("scaling_factor_range",
                     std::max(-p.t[j], p.t[j] - 2.0), itol);
    }

    // Bundled demand and assignment.
    p.demand.assign(nf_, 0.0);
    p.g = Matrix<double>(nf_, nf_, 0.0);
    for (int i : p.g_set) {
      double s = 0.0;
      for (int l = 0; l < ne; ++l) s += p.t[l] * p.x2(i, l);
      p.g(i, p.host_of[i]) = s;
      p.demand[p.host_of[i]] += s;
    }
    SolveOutlierLp(p);

    // Unbundle.
    p.h = Matrix<double>(nf_, ne, 0.0);
    for (int l = 0; l < ne; ++l) {
      std::vector<double> at_host(nf_, 0.0);
      for (int k : p.g_set) at_host[p.host_of[k]] += p.x2(k, l);
      double want = 0.0;
      for (int k : p.g_set) want += p.t[l] * p.x2(k, l);
      double got = 0.0;
      for (int i : p.g_set) {
        double v = 0.0;
        for (int w = 0; w < nf_; ++w) {
          if (!classes_.large[w] || p.demand[w] <= 0.0) continue;
          v += p.x_lp(i, w) / p.demand[w] * p.t[l] * at_host[w];
        }
        p.h(i, l) = v;
        got += v;
      }
      checks_.Record("unbundle_conservation", std::abs(got - want),
                     itol * std::max(1.0, want));
    }
    return p;
  }

  // Witness assignment over the original clients and the opened set.
  struct Output {
    Matrix<double> x_circ;
    std::vector<bool> open;
  };

  Output Assemble(const Phase2& p) {
    Output out;
    out.x_circ = Matrix<double>(nf_, nd_, 0.0);
    out.open.assign(nf_, false);
    std::vector<bool> in_g(nf_, false);
    for (int i : p.g_set) in_g[i] = true;
    for (int j = 0; j < nd_; ++j) {
      for (int i = 0; i < nf_; ++i) {
        double v = 0.0;
        if (classes_.large[i]) {
          v = x0_[j][i];
        } else if (rounded_[i]) {
          v = p.t[j] * xstar_[j][i];
          for (int k : children_[j]) v += xstar_[k][i];
        } else if (in_g[i]) {
          v = p.h(i, j);
          for (int k : children_[j]) v += p.h(i, k);
        }
        out.x_circ(i, j) = v;
      }
    }
    for (int i = 0; i < nf_; ++i) {
      if (classes_.large[i]) {
        out.open[i] = out.x_circ.RowSum(i) > tol::kZero;
      } else if (rounded_[i]) {
        out.open[i] = true;
      } else if (in_g[i]) {
        out.open[i] = p.y_lp[i] > 0.0;
      }
    }
    return out;
  }

 private:
  double Scale() const { return std::max(1.0, static_cast<double>(nd_)); }

  Cluster StartCluster(int center) {
    Cluster q;
    q.center = center;
    q.center_alpha = alpha_[center];
    q.min_alpha = alpha_[SelectCenter()];
    checks_.Record("center_minimizes_alpha", q.center_alpha - q.min_alpha,
                   0.0);
    for (int i = 0; i < nf_; ++i) {
      if (in_f_[i] && x_[center][i] > tol::kZero) q.satellites.push_back(i);
    }
    return q;
  }

  // Capacity rows over F' and the pointwise bound over F' x D'.
  void CheckRunning() {
    const double itol = opts_.invariant_tol;
    for (int i = 0; i < nf_; ++i) {
      if (!in_f_[i]) continue;
      double load = 0.0;
      for (int l = 0; l < num_extended(); ++l) load += x_[l][i];
      checks_.Record("capacity_preserved", load - inst_.capacity(i) * y_[i],
                     itol * std::max(1.0, load));
      for (int j = 0; j < nd_; ++j) {
        if (active_[j]) {
          checks_.Record("pointwise_bound_preserved", x_[j][i] - y_[i], itol);
        }
      }
    }
  }

  void SolveOutlierLp(Phase2& p) {
    const double itol = opts_.invariant_tol;
    std::vector<int> hosts;
    for (int w = 0; w < nf_; ++w) {
      if (classes_.large[w]) hosts.push_back(w);
    }
    p.x_lp = Matrix<double>(nf_, nf_, 0.0);
    p.y_lp.assign(nf_, 0.0);

    double witness = 0.0;
    for (int i : p.g_set) {
      witness += 2.0 * p.y2[i];
      double load = 0.0;
      for (int w : hosts) {
        witness += inst_.facility_distance(i, w) * p.g(i, w);
        load += p.g(i, w);
      }
      checks_.Record("outlier_lp_witness_feasible",
                     std::max(load - 2.0 * inst_.capacity(i) * p.y2[i],
                              2.0 * p.y2[i] - 1.0),
                     itol * std::max(1.0, load));
    }
    for (int w : hosts) {
      double s = 0.0;
      for (int i : p.g_set) s += p.g(i, w);
      checks_.Record("outlier_lp_witness_feasible", p.demand[w] - s,
                     itol * std::max(1.0, s));
    }
    p.witness_objective = witness;
    if (p.g_set.empty()) {
      checks_.Record("fractional_count_within_hosts", 0.0, 0.0);
      return;
    }

    const int ng = static_cast<int>(p.g_set.size());
    const int nu = static_cast<int>(hosts.size());
    lp::LinearProgram prog(lp::Sense::kMinimize);
    auto xv = [nu](int a, int b) { return a * nu + b; };
    for (int a = 0; a < ng; ++a) {
      for (int b = 0; b < nu; ++b) {
        prog.AddVariable(0.0, lp::kInf,
                         inst_.facility_distance(p.g_set[a], hosts[b]));
      }
    }
    for (int a = 0; a < ng; ++a) prog.AddVariable(0.0, 1.0, 1.0);
    for (int b = 0; b < nu; ++b) {
      std::vector<lp::Term> t;
      for (int a = 0; a < ng; ++a) t.push_back({xv(a, b), 1.0});
      prog.AddRow(std::move(t), lp::Relation::kGreaterEqual,
                  p.demand[hosts[b]]);
    }
    for (int a = 0; a < ng; ++a) {
      std::vector<lp::Term> t;
      for (int b = 0; b < nu; ++b) t.push_back({xv(a, b), 1.0});
      t.push_back(
          {ng * nu + a, -static_cast<double>(inst_.capacity(p.g_set[a]))});
      prog.AddRow(std::move(t), lp::Relation::kLessEqual, 0.0);
    }

    lp::LpSolution sol;
    int fractional = 0;
    p.exact = ng <= opts_.exact_outlier_lp_max;
    if (p.exact) {
      const lp::Solution<lp::Rational> rs = lp::Solve<lp::Rational>(prog);
      if (rs.status != lp::Status::kOptimal) {
        throw InvariantViolation("outlier LP has no optimum");
      }
      for (int a = 0; a < ng; ++a) {
        const lp::Rational& v = rs.x[ng * nu + a];
        if (v > 0 && v < 1) {
          ++fractional;
          p.fractional.push_back(p.g_set[a]);
        }
      }
      sol = lp::ToDouble(rs);
    } else {
      sol = lp::Solve<double>(prog);
      if (sol.status != lp::Status::kOptimal) {
        throw InvariantViolation("outlier LP has no optimum");
      }
      for (int a = 0; a < ng; ++a) {
        const double v = sol.x[ng * nu + a];
        if (v > 1e-9 && v < 1.0 - 1e-9) {
          ++fractional;
          p.fractional.push_back(p.g_set[a]);
        }
      }
    }
    p.lp_objective = sol.objective;
    checks_.Record("fractional_count_within_hosts", fractional - nu, 0.0);
    checks_.Record("outlier_lp_no_worse_than_witness",
                   p.lp_objective - p.witness_objective,
                   itol * std::max(1.0, p.witness_objective));
    for (int a = 0; a < ng; ++a) {
      const int i = p.g_set[a];
      const double v = sol.x[ng * nu + a];
      p.y_lp[i] = p.exact ? v : (v > 1e-9 ? v : 0.0);
      for (int b = 0; b < nu; ++b) {
        p.x_lp(i, hosts[b]) = std::max(0.0, sol.x[xv(a, b)]);
      }
    }
    // Trim over-covered hosts back to their demand; cost does not go up.
    for (int w : hosts) {
      double s = 0.0;
      for (int i : p.g_set) s += p.x_lp(i, w);
      checks_.Record("outlier_lp_coverage", p.demand[w] - s,
                     itol * std::max(1.0, p.demand[w]));
      if (s > p.demand[w] && s > 0.0) {
        for (int i : p.g_set) p.x_lp(i, w) *= p.demand[w] / s;
      }
    }
  }

  const Instance& inst_;
  Options opts_;
  int nf_;
  int nd_;
  Classes classes_;
  std::vector<double> y0_;
  std::vector<double> y_;
  // Columns per extended client: x0_ as given (outliers: at creation).
  std::vector<std::vector<double>> x0_;
  std::vector<std::vector<double>> x_;
  std::vector<std::vector<double>> xstar_;
  std::vector<double> alpha_;
  std::vector<double> residual_;
  std::vector<bool> active_;
  std::vector<bool> in_f_;
  std::vector<bool> rounded_;
  std::vector<std::vector<int>> children_;
  std::vector<OutlierClient> outliers_;
  std::vector<Cluster> clusters_;
  int iterations_ = 0;
  InvariantLog checks_;
};

struct CfcResult {
  IntegralSolution solution;
  double cost = 0.0;
  // Natural LP optimum; at most OPT.
  double lower_bound = 0.0;
  double ratio = 0.0;
  NaturalLpSolution lp;
  Classes classes;
  std::vector<OutlierClient> outliers;
  std::vector<Cluster> clusters;
  std::vector<double> residual;
  Phase2 phase2;
  Matrix<double> x_circ;
  std::vector<bool> y_star;
  double x_circ_cost = 0.0;
  int iterations = 0;
  InvariantLog checks;
};

// Rounds a feasible natural-LP point. alpha must satisfy alpha_j >= c_ij on
// the support of x; the factor-4 guarantee additionally needs (x, y) optimal
// with alpha its dual, which is what SolveCflCfc supplies. lower_bound is
// psi(x, y) of the input.
inline CfcResult RoundNatural(const Instance& inst, const Matrix<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& alpha,
                              const Options& opts = {}) {
  RequireCardinality(inst);
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  const double itol = opts.invariant_tol;
  Rounder r(inst, x, y, alpha, opts);
  r.RunPhase1();
  CfcResult out;
  out.phase2 = r.RunPhase2();
  Rounder::Output o = r.Assemble(out.phase2);
  out.x_circ = std::move(o.x_circ);
  out.y_star = std::move(o.open);
  out.classes = r.classes();
  out.outliers = r.outliers();
  out.clusters = r.clusters();
  out.iterations = r.iterations();
  out.residual.assign(nd, 0.0);
  for (int j = 0; j < nd; ++j) out.residual[j] = r.residual(j);
  out.checks = r.checks();
  InvariantLog& checks = out.checks;

  const double lp_cost = Cost(inst, x, y);
  out.lower_bound = lp_cost;
  const double scale = std::max(1.0, lp_cost);

  // (x_circ, y_star) must be feasible for the natural LP.
  double worst = 0.0;
  for (int j = 0; j < nd; ++j) {
    worst = std::max(worst, 1.0 - out.x_circ.ColSum(j));
  }
  for (int i = 0; i < nf; ++i) {
    const double yi = out.y_star[i] ? 1.0 : 0.0;
    const double load = out.x_circ.RowSum(i);
    worst = std::max(worst, (load - inst.capacity(i) * yi) /
                                std::max(1.0, load));
    for (int j = 0; j < nd; ++j) {
      worst = std::max(worst, out.x_circ(i, j) - yi);
      worst = std::max(worst, -out.x_circ(i, j));
    }
  }
  checks.Record("rounded_solution_feasible", worst, itol);

  std::vector<double> ystar(nf, 0.0);
  std::vector<int> cap(nf, 0);
  for (int i = 0; i < nf; ++i) {
    ystar[i] = out.y_star[i] ? 1.0 : 0.0;
    cap[i] = out.y_star[i] ? inst.capacity(i) : 0;
  }
  out.x_circ_cost = Cost(inst, out.x_circ, ystar);

  flow::AssignmentResult assignment;
  try {
    assignment = flow::MinCostAssignment(inst.connection_costs(), cap);
  } catch (const InfeasibleError&) {
    throw InvariantViolation("opened facilities cannot serve every client");
  }
  out.solution = IntegralSolution{out.y_star, assignment.assign};
  out.cost = Cost(inst, out.solution);
  checks.Record("assignment_no_worse_than_witness",
                out.cost - out.x_circ_cost, itol * scale);
  out.ratio = lp_cost > 0.0 ? out.cost / lp_cost : 1.0;
  return out;
}

inline CfcResult SolveCflCfc(const Instance& inst, const Options& opts = {}) {
  RequireCardinality(inst);
  NaturalLpSolution lp = SolveNaturalLp(inst, opts.exact_natural_lp);
  const double itol = opts.invariant_tol;
  const double scale = std::max(1.0, lp.objective);
  Matrix<double> x = lp.x;
  TrimCoverage(x);
  CfcResult out = RoundNatural(inst, x, lp.y, lp.dual.alpha, opts);
  out.checks.Record("natural_lp_dual_feasible", lp.dual_violation,
                    itol * scale);
  out.checks.Record("natural_lp_complementary_slackness", lp.complementarity,
                    itol * scale);
  out.checks.Record("natural_lp_duality_gap", lp.gap, 1e-7 * scale);
  out.checks.Record("natural_lp_radius", lp.radius_violation, itol * scale);
  out.lower_bound = lp.objective;
  out.ratio = out.cost / lp.objective;
  out.checks.Record("witness_ratio_within_four",
                    out.x_circ_cost - 4.0 * lp.objective, itol * scale);
  out.checks.Record("ratio_within_four", out.cost - 4.0 * lp.objective,
                    itol * scale);
  out.lp = std::move(lp);
  return out;
}

}  // namespace cflapprox::cfc

#endif  // CFLAPPROX_CFLCFC_HPP_
