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

// Flow primitives: Dinic max-flow over real capacities, successive shortest
// path min-cost flow over integer capacities, the facility/client min-cost
// assignment built on it, fractional b-matching, and alternating-path
// reachability in a b-matching.

#ifndef CFLAPPROX_FLOW_HPP_
#define CFLAPPROX_FLOW_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "cflapprox/common.hpp"

namespace cflapprox::flow {

struct Arc {
  int tail;
  int head;
  double capacity;
  double cost = 0.0;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(int num_nodes = 0) : num_nodes_(num_nodes) {}

  int AddNode() { return num_nodes_++; }
  int AddArc(int tail, int head, double capacity, double cost = 0.0) {
    if (tail < 0 || tail >= num_nodes_ || head < 0 || head >= num_nodes_) {
      throw ContractError("arc endpoint out of range");
    }
    if (!(capacity >= 0.0) || !std::isfinite(capacity)) {
      throw ContractError("arc capacity must be finite and nonnegative");
    }
    arcs_.push_back({tail, head, capacity, cost});
    return static_cast<int>(arcs_.size()) - 1;
  }

  int num_nodes() const { return num_nodes_; }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(int a) const { return arcs_[a]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  int num_nodes_;
  std::vector<Arc> arcs_;
};

struct MaxFlowResult {
  double value = 0.0;
  std::vector<double> arc_flow;
  // Nodes on the source side of a minimum cut.
  std::vector<bool> source_side;
};

namespace internal {

// Residual graph with paired forward/backward edges.
class Residual {
 public:
  struct Edge {
    int to;
    int rev;
    double cap;
  };

  explicit Residual(int n) : adj_(n) {}

  int Add(int u, int v, double cap) {
    adj_[u].push_back({v, static_cast<int>(adj_[v].size()), cap});
    adj_[v].push_back({u, static_cast<int>(adj_[u].size()) - 1, 0.0});
    return static_cast<int>(adj_[u].size()) - 1;
  }

  std::vector<std::vector<Edge>>& adj() { return adj_; }

 private:
  std::vector<std::vector<Edge>> adj_;
};

inline constexpr double kFlowEps = 1e-12;

class Dinic {
 public:
  Dinic(Residual* g, int s, int t)
      : g_(*g), s_(s), t_(t), level_(g->adj().size()), it_(g->adj().size()) {}

  double Run() {
    double total = 0.0;
    while (Bfs()) {
      std::fill(it_.begin(), it_.end(), 0);
      for (;;) {
        const double f = Dfs(s_, std::numeric_limits<double>::infinity());
        if (f <= kFlowEps) break;
        total += f;
      }
    }
    return total;
  }

  // Valid after Run(): nodes still reachable from s in the residual graph.
  std::vector<bool> Reachable() {
    std::vector<bool> seen(level_.size(), false);
    std::deque<int> q{s_};
    seen[s_] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const auto& e : g_.adj()[u]) {
        if (e.cap > kFlowEps && !seen[e.to]) {
          seen[e.to] = true;
          q.push_back(e.to);
        }
      }
    }
    return seen;
  }

 private:
  bool Bfs() {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> q{s_};
    level_[s_] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const auto& e : g_.adj()[u]) {
        if (e.cap > kFlowEps && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          q.push_back(e.to);
        }
      }
    }
    return level_[t_] >= 0;
  }

  double Dfs(int u, double pushed) {
    if (u == t_) return pushed;
    auto& edges = g_.adj()[u];
    for (int& i = it_[u]; i < static_cast<int>(edges.size()); ++i) {
      auto& e = edges[i];
      if (e.cap <= kFlowEps || level_[e.to] != level_[u] + 1) continue;
      const double f = Dfs(e.to, std::min(pushed, e.cap));
      if (f > kFlowEps) {
        e.cap -= f;
        g_.adj()[e.to][e.rev].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  Residual& g_;
  int s_;
  int t_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace internal

inline MaxFlowResult MaxFlow(const FlowNetwork& net, int source, int sink) {
  if (source == sink) throw ContractError("source equals sink");
  internal::Residual g(net.num_nodes());
  std::vector<int> where(net.num_arcs());
  for (int a = 0; a < net.num_arcs(); ++a) {
    where[a] = g.Add(net.arc(a).tail, net.arc(a).head, net.arc(a).capacity);
  }
  internal::Dinic dinic(&g, source, sink);
  MaxFlowResult res;
  res.value = dinic.Run();
  res.arc_flow.resize(net.num_arcs());
  for (int a = 0; a < net.num_arcs(); ++a) {
    const auto& e = g.adj()[net.arc(a).tail][where[a]];
    res.arc_flow[a] = std::clamp(net.arc(a).capacity - e.cap, 0.0,
                                 net.arc(a).capacity);
  }
  res.source_side = dinic.Reachable();
  return res;
}

// Successive shortest paths with Johnson potentials. Capacities are integral,
// so the optimal flow found is integral.
class MinCostFlow {
 public:
  explicit MinCostFlow(int num_nodes) : adj_(num_nodes) {}

  int AddArc(int u, int v, int cap, double cost) {
    if (cap < 0) throw ContractError("negative capacity");
    edges_.push_back({u, v, cap, cost, 0});
    adj_[u].push_back(static_cast<int>(edges_.size()) - 1);
    edges_.push_back({v, u, 0, -cost, 0});
    adj_[v].push_back(static_cast<int>(edges_.size()) - 1);
    return static_cast<int>(edges_.size()) - 2;
  }

  // Sends up to `demand` units from s to t at minimum cost. Returns the
  // amount actually sent.
  int Solve(int s, int t, int demand) {
    const int n = static_cast<int>(adj_.size());
    std::vector<double> pot(n, 0.0);
    // Bellman-Ford for potentials in case of negative arc costs.
    for (int round = 0; round < n; ++round) {
      bool changed = false;
      for (const E& e : edges_) {
        if (e.cap - e.flow > 0 && pot[e.from] + e.cost < pot[e.to] - 1e-15) {
          pot[e.to] = pot[e.from] + e.cost;
          changed = true;
        }
      }
      if (!changed) break;
    }
    int sent = 0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n);
    std::vector<int> prev(n);
    while (sent < demand) {
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(prev.begin(), prev.end(), -1);
      dist[s] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.push({0.0, s});
      while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (du > dist[u]) continue;
        for (int id : adj_[u]) {
          const E& e = edges_[id];
          if (e.cap - e.flow <= 0) continue;
          // Reduced costs are >= 0 up to rounding; clamp the noise.
          const double rc = std::max(0.0, e.cost + pot[u] - pot[e.to]);
          const double nd = du + rc;
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            prev[e.to] = id;
            pq.push({nd, e.to});
          }
        }
      }
      if (dist[t] == inf) break;
      for (int v = 0; v < n; ++v) {
        if (dist[v] < inf) pot[v] += dist[v];
      }
      int push = demand - sent;
      for (int v = t; v != s; v = edges_[prev[v]].from) {
        const E& e = edges_[prev[v]];
        push = std::min(push, e.cap - e.flow);
      }
      for (int v = t; v != s; v = edges_[prev[v]].from) {
        edges_[prev[v]].flow += push;
        edges_[prev[v] ^ 1].flow -= push;
      }
      sent += push;
    }
    return sent;
  }

  int flow(int arc) const { return edges_[arc].flow; }
  double TotalCost() const {
    double c = 0.0;
    for (std::size_t i = 0; i < edges_.size(); i += 2) {
      c += edges_[i].cost * edges_[i].flow;
    }
    return c;
  }

 private:
  struct E {
    int from;
    int to;
    int cap;
    double cost;
    int flow;
  };
  std::vector<std::vector<int>> adj_;
  std::vector<E> edges_;
};

struct AssignmentResult {
  // Facility index per client.
  std::vector<int> assign;
  double cost = 0.0;
};

// Assigns every client (column of `cost`) to a facility (row) so that
// facility i receives at most capacity[i] clients, minimizing total cost.
// capacity[i] == 0 marks a closed facility.
inline AssignmentResult MinCostAssignment(const Matrix<double>& cost,
                                          const std::vector<int>& capacity) {
  const int nf = cost.rows();
  const int nd = cost.cols();
  if (static_cast<int>(capacity.size()) != nf) {
    throw ContractError("capacity vector does not match cost rows");
  }
  long long total = 0;
  for (int c : capacity) total += std::max(c, 0);
  if (total < nd) {
    throw InfeasibleError("open capacity is smaller than the number of clients");
  }
  const int s = 0;
  const int t = 1 + nd + nf;
  MinCostFlow mcf(t + 1);
  Matrix<int> arc_id(nf, nd, -1);
  for (int j = 0; j < nd; ++j) mcf.AddArc(s, 1 + j, 1, 0.0);
  for (int i = 0; i < nf; ++i) {
    if (capacity[i] <= 0) continue;
    for (int j = 0; j < nd; ++j) {
      arc_id(i, j) = mcf.AddArc(1 + j, 1 + nd + i, 1, cost(i, j));
    }
    mcf.AddArc(1 + nd + i, t, std::min(capacity[i], nd), 0.0);
  }
  if (mcf.Solve(s, t, nd) != nd) {
    throw InfeasibleError("clients cannot all be assigned");
  }
  AssignmentResult res;
  res.assign.assign(nd, -1);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      if (arc_id(i, j) >= 0 && mcf.flow(arc_id(i, j)) > 0) {
        res.assign[j] = i;
        res.cost += cost(i, j);
      }
    }
  }
  return res;
}

// Maximum fractional b-matching between facilities (rows) and clients
// (columns): 0 <= h_ij <= edge_cap_ij, sum_j h_ij <= facility_cap_i,
// sum_i h_ij <= 1. Rows with zero capacity stay empty.
inline Matrix<double> MaxBMatching(const Matrix<double>& edge_cap,
                                   const std::vector<double>& facility_cap,
                                   double* value = nullptr) {
  const int nf = edge_cap.rows();
  const int nd = edge_cap.cols();
  FlowNetwork net(2 + nd + nf);
  const int s = 0;
  const int t = 1;
  Matrix<int> arc_id(nf, nd, -1);
  for (int j = 0; j < nd; ++j) net.AddArc(s, 2 + j, 1.0);
  for (int i = 0; i < nf; ++i) {
    if (facility_cap[i] <= 0.0) continue;
    bool any = false;
    for (int j = 0; j < nd; ++j) {
      if (edge_cap(i, j) > tol::kZero) {
        arc_id(i, j) = net.AddArc(2 + j, 2 + nd + i, edge_cap(i, j));
        any = true;
      }
    }
    if (any) net.AddArc(2 + nd + i, t, facility_cap[i]);
  }
  const MaxFlowResult mf = MaxFlow(net, s, t);
  Matrix<double> h(nf, nd, 0.0);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nd; ++j) {
      if (arc_id(i, j) >= 0) h(i, j) = mf.arc_flow[arc_id(i, j)];
    }
  }
  if (value) *value = mf.value;
  return h;
}

struct AlternatingReach {
  // Clients with sum_i h_ij < 1 - tol; the search starts from them.
  std::vector<bool> partial_clients;
  std::vector<bool> clients;
  std::vector<bool> facilities;
};

// Alternating search in a b-matching: a client may step to facility i when
// h_ij < cap_ij - tol, a facility may step to client j when h_ij > tol.
inline AlternatingReach ReachFromPartialClients(const Matrix<double>& h,
                                                const Matrix<double>& edge_cap,
                                                double tolerance = tol::kReach) {
  const int nf = h.rows();
  const int nd = h.cols();
  AlternatingReach r;
  r.partial_clients.assign(nd, false);
  r.clients.assign(nd, false);
  r.facilities.assign(nf, false);
  std::deque<int> q;
  for (int j = 0; j < nd; ++j) {
    if (h.ColSum(j) < 1.0 - tolerance) {
      r.partial_clients[j] = true;
      r.clients[j] = true;
      q.push_back(j);
    }
  }
  while (!q.empty()) {
    const int j = q.front();
    q.pop_front();
    for (int i = 0; i < nf; ++i) {
      if (r.facilities[i] || !(h(i, j) < edge_cap(i, j) - tolerance)) continue;
      r.facilities[i] = true;
      for (int k = 0; k < nd; ++k) {
        if (!r.clients[k] && h(i, k) > tolerance) {
          r.clients[k] = true;
          q.push_back(k);
        }
      }
    }
  }
  return r;
}

// Facilities reachable from a partially-assigned client by an alternating
// path.
inline std::vector<bool> TightlyOccupied(const Matrix<double>& h,
                                         const Matrix<double>& edge_cap,
                                         double tolerance = tol::kReach) {
  return ReachFromPartialClients(h, edge_cap, tolerance).facilities;
}

}  // namespace cflapprox::flow

#endif  // CFLAPPROX_FLOW_HPP_
