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

// Multicommodity flow network test for a candidate (x, y) and a partial
// assignment g.
//
// Nodes: j^s and j^t per client, i and i^t per facility. Arcs:
//   (j^s, i)   capacity x_ij
//   (i, j^s)   capacity g_ij
//   (i, i^t)   capacity y_i * (u_i - sum_j g_ij)
//   (i^t, j^t) capacity r_j * y_i,  r_j = 1 - sum_i g_ij
// Commodity j ships r_j from j^s to j^t.
//
// Feasibility is decided with an edge-form LP whose capacity rows have
// right-hand sides affine in (x, y). An infeasible LP yields a cut over
// (x, y) through its Farkas certificate.

#ifndef CFLAPPROX_MFN_HPP_
#define CFLAPPROX_MFN_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cflapprox/common.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/lp.hpp"

namespace cflapprox::mfn {

// Parameter layout shared with the master LP: x(i,j) then y(i).
inline int XParam(int nd, int i, int j) { return i * nd + j; }
inline int YParam(int nf, int nd, int i) { return nf * nd + i; }

inline std::vector<double> PackParams(const Matrix<double>& x,
                                      const std::vector<double>& y) {
  const int nf = x.rows();
  const int nd = x.cols();
  std::vector<double> theta(static_cast<std::size_t>(nf) * nd + nf);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) theta[XParam(nd, i, j)] = x(i, j);
    theta[YParam(nf, nd, i)] = y[i];
  }
  return theta;
}

// Returns the validity violations of g (empty when valid).
inline std::vector<std::string> CheckPartialAssignment(const Instance& inst,
                                                       const Matrix<double>& g,
                                                       double tolerance = 1e-7) {
  std::vector<std::string> out;
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      if (g(i, j) < -tolerance) {
        out.push_back("g(" + std::to_string(i) + "," + std::to_string(j) +
                      ") is negative");
      }
    }
    if (g.RowSum(i) > inst.capacity(i) + tolerance) {
      out.push_back("facility " + std::to_string(i) + " over capacity in g");
    }
  }
  for (int j = 0; j < g.cols(); ++j) {
    if (g.ColSum(j) > 1.0 + tolerance) {
      out.push_back("client " + std::to_string(j) + " over-assigned in g");
    }
  }
  return out;
}

class MfnNetwork {
 public:
  static constexpr double kNoise = 1e-12;

  MfnNetwork(const Instance& inst, const Matrix<double>& x,
             const std::vector<double>& y, const Matrix<double>& g)
      : nf_(inst.num_facilities()),
        nd_(inst.num_clients()),
        x_(x),
        y_(y),
        g_(g),
        residual_capacity_(nf_, 0.0),
        demand_(nd_, 0.0) {
    if (x.rows() != nf_ || x.cols() != nd_ || g.rows() != nf_ ||
        g.cols() != nd_ || static_cast<int>(y.size()) != nf_) {
      throw ContractError("network inputs do not match the instance");
    }
    const auto bad = CheckPartialAssignment(inst, g);
    if (!bad.empty()) {
      throw ContractError("invalid partial assignment: " + bad.front());
    }
    for (int i = 0; i < nf_; ++i) {
      residual_capacity_[i] = Clamp(inst.capacity(i) - g.RowSum(i));
    }
    for (int j = 0; j < nd_; ++j) demand_[j] = Clamp(1.0 - g.ColSum(j));
  }

  int num_facilities() const { return nf_; }
  int num_clients() const { return nd_; }
  const Matrix<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const Matrix<double>& g() const { return g_; }

  // r_j.
  double demand(int j) const { return demand_[j]; }
  // u_i - sum_j g_ij; the (i, i^t) capacity is y_i times this.
  double residual_capacity(int i) const { return residual_capacity_[i]; }

  double cap_source_arc(int i, int j) const { return Clamp(x_(i, j)); }
  double cap_back_arc(int i, int j) const { return Clamp(g_(i, j)); }
  double cap_facility_arc(int i) const {
    return Clamp(y_[i] * residual_capacity_[i]);
  }
  double cap_sink_arc(int i, int j) const { return Clamp(demand_[j] * y_[i]); }

  // Client source j^s can be entered by other commodities.
  bool has_back_arcs(int j) const {
    for (int i = 0; i < nf_; ++i) {
      if (g_(i, j) > kNoise) return true;
    }
    return false;
  }

 private:
  static double Clamp(double v) { return v < 0.0 && v >= -kNoise ? 0.0 : v; }

  int nf_;
  int nd_;
  Matrix<double> x_;
  std::vector<double> y_;
  Matrix<double> g_;
  std::vector<double> residual_capacity_;
  std::vector<double> demand_;
};

inline MfnNetwork Build(const Instance& inst, const Matrix<double>& x,
                        const std::vector<double>& y, const Matrix<double>& g) {
  return MfnNetwork(inst, x, y, g);
}

// Arc flows of a single commodity k.
struct CommodityArcs {
  // (j^s, i) for every client j (j == k is the commodity's own source).
  Matrix<double> up;
  // (i, j^s).
  Matrix<double> down;
  // (i, i^t); equal to the flow on (i^t, k^t).
  std::vector<double> sink;

  CommodityArcs() = default;
  CommodityArcs(int nf, int nd)
      : up(nf, nd, 0.0), down(nf, nd, 0.0), sink(nf, 0.0) {}

  double Throughput() const {
    double s = 0.0;
    for (double v : sink) s += v;
    return s;
  }
};

// j^s -> i_1 -> k_1^s -> i_2 -> ... -> i_m -> i_m^t -> j^t.
struct FlowPath {
  int commodity = -1;
  std::vector<int> facilities;
  // Client sources passed through, one fewer than facilities.
  std::vector<int> via;
  double flow = 0.0;

  int sink_facility() const { return facilities.back(); }
};

struct CommodityFlow {
  std::vector<CommodityArcs> commodity;
  std::vector<FlowPath> paths;
};

struct FeasibilityResult {
  bool feasible = false;
  CommodityFlow flow;
  lp::Hyperplane cut;
  double violation = 0.0;
  int lp_rows = 0;
  int lp_vars = 0;
};

struct FeasibilityOptions {
  // Total unmet demand below this counts as feasible.
  double infeasibility_tol = 1e-8;
  // Commodities with smaller demand are dropped.
  double min_demand = 1e-9;
};

// Splits one commodity's arc flow into source-to-sink paths. Cycles met on
// the way are cancelled. Throws ContractError when flow is not conserved.
inline std::vector<FlowPath> PathDecompose(int commodity, CommodityArcs arcs,
                                           double eps = 1e-11) {
  const int nf = static_cast<int>(arcs.sink.size());
  const int nd = arcs.up.cols();
  const int k = commodity;
  std::vector<FlowPath> paths;
  // Loose threshold for giving up on float leftovers when stuck.
  const double kStuckTol = 1e-7;
  for (int guard = 0;; ++guard) {
    if (guard > 100000) throw ContractError("path decomposition did not end");
    double out = 0.0;
    for (int i = 0; i < nf; ++i) out += arcs.up(i, k);
    if (out <= eps) break;
    // Walk: alternate facility and client-source nodes.
    std::vector<int> fac;
    std::vector<int> via;
    std::vector<int> pos_f(nf, -1);
    std::vector<int> pos_c(nd, -1);
    pos_c[k] = 0;
    int client = k;
    bool restart = false;
    for (;;) {
      int next = -1;
      for (int i = 0; i < nf; ++i) {
        if (arcs.up(i, client) > eps) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        // Dead end. At the own source only sub-eps crumbs are left.
        if (client == k) {
          for (int i = 0; i < nf; ++i) arcs.up(i, k) = 0.0;
          restart = true;
          break;
        }
        if (arcs.down(fac.back(), client) > kStuckTol) {
          throw ContractError("flow not conserved at a client source");
        }
        arcs.down(fac.back(), client) = 0.0;
        restart = true;
        break;
      }
      if (pos_f[next] >= 0) {
        // Cycle next -> ... -> client -> next. Cancel its bottleneck.
        const int start = pos_f[next];
        double b = arcs.up(next, client);
        for (int p = start; p < static_cast<int>(via.size()); ++p) {
          b = std::min(b, arcs.down(fac[p], via[p]));
          if (p + 1 < static_cast<int>(fac.size())) {
            b = std::min(b, arcs.up(fac[p + 1], via[p]));
          }
        }
        arcs.up(next, client) -= b;
        for (int p = start; p < static_cast<int>(via.size()); ++p) {
          arcs.down(fac[p], via[p]) -= b;
          if (p + 1 < static_cast<int>(fac.size())) {
            arcs.up(fac[p + 1], via[p]) -= b;
          }
        }
        restart = true;
        break;
      }
      pos_f[next] = static_cast<int>(fac.size());
      fac.push_back(next);
      if (arcs.sink[next] > eps) break;
      int nc = -1;
      for (int j = 0; j < nd; ++j) {
        if (j != k && arcs.down(next, j) > eps) {
          nc = j;
          break;
        }
      }
      if (nc < 0) {
        const double in = arcs.up(next, client);
        if (in > kStuckTol) throw ContractError("flow not conserved at a facility");
        arcs.up(next, client) = 0.0;
        restart = true;
        break;
      }
      if (pos_c[nc] >= 0) {
        // Cycle through client nc: nc -> fac[pos] -> ... -> next -> nc.
        const int start = pos_c[nc];
        double b = arcs.down(next, nc);
        for (int p = start; p < static_cast<int>(fac.size()); ++p) {
          const int from = p == 0 ? k : via[p - 1];
          b = std::min(b, arcs.up(fac[p], from));
          if (p + 1 < static_cast<int>(fac.size())) {
            b = std::min(b, arcs.down(fac[p], via[p]));
          }
        }
        arcs.down(next, nc) -= b;
        for (int p = start; p < static_cast<int>(fac.size()); ++p) {
          const int from = p == 0 ? k : via[p - 1];
          arcs.up(fac[p], from) -= b;
          if (p + 1 < static_cast<int>(fac.size())) {
            arcs.down(fac[p], via[p]) -= b;
          }
        }
        restart = true;
        break;
      }
      pos_c[nc] = static_cast<int>(via.size()) + 1;
      via.push_back(nc);
      client = nc;
    }
    if (restart) continue;
    // Strip the bottleneck.
    double b = arcs.sink[fac.back()];
    for (std::size_t p = 0; p < fac.size(); ++p) {
      b = std::min(b, arcs.up(fac[p], p == 0 ? k : via[p - 1]));
      if (p + 1 < fac.size()) b = std::min(b, arcs.down(fac[p], via[p]));
    }
    for (std::size_t p = 0; p < fac.size(); ++p) {
      arcs.up(fac[p], p == 0 ? k : via[p - 1]) -= b;
      if (p + 1 < fac.size()) arcs.down(fac[p], via[p]) -= b;
    }
    arcs.sink[fac.back()] -= b;
    paths.push_back({k, std::move(fac), std::move(via), b});
  }
  return paths;
}

// Decides feasibility of the network. On success returns per-commodity arc
// flows from a basic LP optimum and their path decomposition; otherwise a cut
// over (x, y) in the PackParams layout that the network's (x, y) violates.
inline FeasibilityResult Feasible(const MfnNetwork& net,
                                  const FeasibilityOptions& opts = {}) {
  const int nf = net.num_facilities();
  const int nd = net.num_clients();
  lp::LinearProgram prog(lp::Sense::kMinimize);
  prog.SetParameters(PackParams(net.x(), net.y()));

  std::vector<bool> active(nd, false);
  std::vector<bool> transit(nd, false);
  for (int j = 0; j < nd; ++j) {
    active[j] = net.demand(j) > opts.min_demand;
    transit[j] = net.has_back_arcs(j);
  }
  // Variable ids; -1 when absent.
  std::vector<Matrix<int>> up(nd), down(nd);
  std::vector<std::vector<int>> sink(nd);
  for (int k = 0; k < nd; ++k) {
    if (!active[k]) continue;
    up[k] = Matrix<int>(nf, nd, -1);
    down[k] = Matrix<int>(nf, nd, -1);
    sink[k].assign(nf, -1);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nd; ++j) {
        if (j == k || transit[j]) up[k](i, j) = prog.AddVariable(0, lp::kInf, 0);
        if (j != k && net.cap_back_arc(i, j) > MfnNetwork::kNoise) {
          down[k](i, j) = prog.AddVariable(0, lp::kInf, 0);
        }
      }
      sink[k][i] = prog.AddVariable(0, lp::kInf, 0);
    }
  }
  for (int k = 0; k < nd; ++k) {
    if (!active[k]) continue;
    // Conservation at facility nodes.
    for (int i = 0; i < nf; ++i) {
      std::vector<lp::Term> t;
      for (int j = 0; j < nd; ++j) {
        if (up[k](i, j) >= 0) t.push_back({up[k](i, j), 1.0});
        if (down[k](i, j) >= 0) t.push_back({down[k](i, j), -1.0});
      }
      t.push_back({sink[k][i], -1.0});
      prog.AddRow(std::move(t), lp::Relation::kEqual, 0.0);
    }
    // Conservation at foreign client sources.
    for (int j = 0; j < nd; ++j) {
      if (j == k || !transit[j]) continue;
      std::vector<lp::Term> t;
      for (int i = 0; i < nf; ++i) {
        if (down[k](i, j) >= 0) t.push_back({down[k](i, j), 1.0});
        t.push_back({up[k](i, j), -1.0});
      }
      prog.AddRow(std::move(t), lp::Relation::kEqual, 0.0);
    }
    // Demand.
    std::vector<lp::Term> t;
    for (int i = 0; i < nf; ++i) t.push_back({sink[k][i], 1.0});
    prog.AddRow(std::move(t), lp::Relation::kGreaterEqual, net.demand(k));
  }
  // Joint capacities.
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      std::vector<lp::Term> t;
      for (int k = 0; k < nd; ++k) {
        if (active[k] && up[k](i, j) >= 0) t.push_back({up[k](i, j), 1.0});
      }
      if (t.empty()) continue;
      prog.AddAffineRow(std::move(t), lp::Relation::kLessEqual,
                        lp::AffineRhs{0.0, {{XParam(nd, i, j), 1.0}}});
    }
  }
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      std::vector<lp::Term> t;
      for (int k = 0; k < nd; ++k) {
        if (active[k] && down[k](i, j) >= 0) t.push_back({down[k](i, j), 1.0});
      }
      if (t.empty()) continue;
      prog.AddRow(std::move(t), lp::Relation::kLessEqual, net.cap_back_arc(i, j));
    }
  }
  for (int i = 0; i < nf; ++i) {
    std::vector<lp::Term> t;
    for (int k = 0; k < nd; ++k) {
      if (active[k]) t.push_back({sink[k][i], 1.0});
    }
    if (t.empty()) continue;
    prog.AddAffineRow(
        std::move(t), lp::Relation::kLessEqual,
        lp::AffineRhs{0.0, {{YParam(nf, nd, i), net.residual_capacity(i)}}});
  }
  for (int k = 0; k < nd; ++k) {
    if (!active[k]) continue;
    for (int i = 0; i < nf; ++i) {
      prog.AddAffineRow({{sink[k][i], 1.0}}, lp::Relation::kLessEqual,
                        lp::AffineRhs{0.0, {{YParam(nf, nd, i), net.demand(k)}}});
    }
  }

  lp::SolveOptions so;
  so.feasibility_tol = opts.infeasibility_tol;
  const lp::LpSolution sol = lp::Solve(prog, so);
  FeasibilityResult res;
  res.lp_rows = prog.num_rows();
  res.lp_vars = prog.num_vars();
  if (sol.status == lp::Status::kInfeasible) {
    res.feasible = false;
    res.cut = lp::FarkasCut(prog, sol);
    res.violation = res.cut.Violation(prog.parameters());
    return res;
  }
  if (sol.status != lp::Status::kOptimal) {
    throw SolverFailure("feasibility LP is unbounded");
  }
  res.feasible = true;
  res.flow.commodity.assign(nd, CommodityArcs(nf, nd));
  auto clip = [](double v) { return v > 0.0 ? v : 0.0; };
  for (int k = 0; k < nd; ++k) {
    if (!active[k]) continue;
    CommodityArcs& c = res.flow.commodity[k];
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nd; ++j) {
        if (up[k](i, j) >= 0) c.up(i, j) = clip(sol.x[up[k](i, j)]);
        if (down[k](i, j) >= 0) c.down(i, j) = clip(sol.x[down[k](i, j)]);
      }
      c.sink[i] = clip(sol.x[sink[k][i]]);
    }
    auto paths = PathDecompose(k, c);
    for (auto& p : paths) res.flow.paths.push_back(std::move(p));
  }
  if (static_cast<int>(res.flow.paths.size()) > res.lp_rows) {
    throw InvariantViolation("more flow paths than feasibility LP rows");
  }
  return res;
}

// Largest violation of each constraint family of the path formulation:
// [0] demand, [1] x arcs, [2] g arcs, [3] facility arcs, [4] sink arcs,
// [5] negative path flow.
inline std::vector<double> PathConstraintViolations(
    const MfnNetwork& net, const std::vector<FlowPath>& paths) {
  const int nf = net.num_facilities();
  const int nd = net.num_clients();
  std::vector<double> v(6, 0.0);
  std::vector<double> served(nd, 0.0);
  Matrix<double> on_up(nf, nd, 0.0), on_down(nf, nd, 0.0), on_sink(nf, nd, 0.0);
  std::vector<double> on_fac(nf, 0.0);
  for (const FlowPath& p : paths) {
    v[5] = std::max(v[5], -p.flow);
    served[p.commodity] += p.flow;
    for (std::size_t q = 0; q < p.facilities.size(); ++q) {
      const int from = q == 0 ? p.commodity : p.via[q - 1];
      on_up(p.facilities[q], from) += p.flow;
      if (q + 1 < p.facilities.size()) {
        on_down(p.facilities[q], p.via[q]) += p.flow;
      }
    }
    on_fac[p.sink_facility()] += p.flow;
    on_sink(p.sink_facility(), p.commodity) += p.flow;
  }
  for (int j = 0; j < nd; ++j) v[0] = std::max(v[0], net.demand(j) - served[j]);
  for (int i = 0; i < nf; ++i) {
    v[3] = std::max(v[3], on_fac[i] - net.cap_facility_arc(i));
    for (int j = 0; j < nd; ++j) {
      v[1] = std::max(v[1], on_up(i, j) - net.cap_source_arc(i, j));
      v[2] = std::max(v[2], on_down(i, j) - net.cap_back_arc(i, j));
      v[4] = std::max(v[4], on_sink(i, j) - net.cap_sink_arc(i, j));
    }
  }
  return v;
}

}  // namespace cflapprox::mfn

#endif  // CFLAPPROX_MFN_HPP_
