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

// Hard-capacitated facility location instances with unit client demands.
//
// An instance holds facilities (opening cost, integral capacity), a number of
// clients, and a dense metric over the union of facilities and clients.
// Node indices in the metric are facilities first (0..nf-1), then clients
// (nf..nf+nd-1).

#ifndef CFLAPPROX_INSTANCE_HPP_
#define CFLAPPROX_INSTANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cflapprox/common.hpp"

namespace cflapprox {

struct Facility {
  double open_cost = 0.0;
  int capacity = 1;

  bool operator==(const Facility&) const = default;
};

class Instance {
 public:
  Instance() = default;
  Instance(std::vector<Facility> facilities, int num_clients,
           Matrix<double> metric)
      : facilities_(std::move(facilities)),
        num_clients_(num_clients),
        metric_(std::move(metric)) {
    const int n = num_facilities() + num_clients_;
    if (num_clients_ < 0 || metric_.rows() != n || metric_.cols() != n) {
      throw ContractError("metric must be square over facilities + clients");
    }
  }

  int num_facilities() const { return static_cast<int>(facilities_.size()); }
  int num_clients() const { return num_clients_; }
  int num_nodes() const { return num_facilities() + num_clients_; }

  const std::vector<Facility>& facilities() const { return facilities_; }
  double open_cost(int i) const { return facilities_[i].open_cost; }
  int capacity(int i) const { return facilities_[i].capacity; }
  long long total_capacity() const {
    long long s = 0;
    for (const auto& f : facilities_) s += f.capacity;
    return s;
  }

  // Connection cost between facility i and client j.
  double c(int i, int j) const { return metric_(i, num_facilities() + j); }
  // Connection costs as a facility x client matrix.
  Matrix<double> connection_costs() const {
    Matrix<double> m(num_facilities(), num_clients_);
    for (int i = 0; i < num_facilities(); ++i) {
      for (int j = 0; j < num_clients_; ++j) m(i, j) = c(i, j);
    }
    return m;
  }
  // Distance between two facilities.
  double facility_distance(int i, int k) const { return metric_(i, k); }
  // Raw metric entry over node indices.
  double distance(int a, int b) const { return metric_(a, b); }
  const Matrix<double>& metric() const { return metric_; }

  // True iff every facility costs exactly 1 to open.
  bool cardinality_costs() const {
    return std::all_of(facilities_.begin(), facilities_.end(),
                       [](const Facility& f) { return f.open_cost == 1.0; });
  }

  bool operator==(const Instance&) const = default;

 private:
  std::vector<Facility> facilities_;
  int num_clients_ = 0;
  Matrix<double> metric_;
};

// Fractional multiplicities y (per facility) and assignment x (facility x
// client).
struct FractionalSolution {
  std::vector<double> y;
  Matrix<double> x;

  FractionalSolution() = default;
  FractionalSolution(int nf, int nd) : y(nf, 0.0), x(nf, nd, 0.0) {}
};

// Integral solution: a set of open facilities and a client -> facility map.
struct IntegralSolution {
  std::vector<bool> open;
  std::vector<int> assign;

  FractionalSolution ToFractional(int nd) const {
    FractionalSolution s(static_cast<int>(open.size()), nd);
    for (std::size_t i = 0; i < open.size(); ++i) s.y[i] = open[i] ? 1.0 : 0.0;
    for (int j = 0; j < nd; ++j) {
      if (assign[j] >= 0) s.x(assign[j], j) = 1.0;
    }
    return s;
  }
  int num_open() const {
    return static_cast<int>(std::count(open.begin(), open.end(), true));
  }
};

struct ValidateOptions {
  // The triangle check is cubic in the number of nodes.
  bool check_triangle = true;
  double tolerance = tol::kMetric;
};

// Returns one human-readable message per violated instance invariant; empty
// when the instance is well formed.
inline std::vector<std::string> Validate(const Instance& inst,
                                         const ValidateOptions& opts = {}) {
  std::vector<std::string> out;
  auto note = [&out](const std::string& s) { out.push_back(s); };
  for (int i = 0; i < inst.num_facilities(); ++i) {
    const Facility& f = inst.facilities()[i];
    if (f.capacity < 1) {
      note("facility " + std::to_string(i) + ": capacity " +
           std::to_string(f.capacity) + " < 1");
    }
    if (!(f.open_cost >= 0.0) || !std::isfinite(f.open_cost)) {
      std::ostringstream os;
      os << "facility " << i << ": open cost " << f.open_cost
         << " is not a finite nonnegative number";
      note(os.str());
    }
  }
  const Matrix<double>& m = inst.metric();
  const int n = inst.num_nodes();
  const double eps = opts.tolerance;
  for (int a = 0; a < n; ++a) {
    if (std::abs(m(a, a)) > eps) {
      note("metric(" + std::to_string(a) + "," + std::to_string(a) +
           ") is not zero");
    }
    for (int b = 0; b < n; ++b) {
      if (!std::isfinite(m(a, b)) || m(a, b) < -eps) {
        note("metric(" + std::to_string(a) + "," + std::to_string(b) +
             ") is negative or not finite");
      }
      if (b > a && std::abs(m(a, b) - m(b, a)) > eps) {
        note("metric(" + std::to_string(a) + "," + std::to_string(b) +
             ") is not symmetric");
      }
    }
  }
  if (opts.check_triangle) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int d = 0; d < n; ++d) {
          if (m(a, b) + m(b, d) < m(a, d) - eps) {
            std::ostringstream os;
            os << "triangle inequality violated on (" << a << "," << b << ","
               << d << "): " << m(a, b) << " + " << m(b, d) << " < "
               << m(a, d);
            note(os.str());
          }
        }
      }
    }
  }
  return out;
}

// psi(x, y) = sum_i o_i y_i + sum_{i,j} c_ij x_ij.
inline double Cost(const Instance& inst, const Matrix<double>& x,
                   const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != inst.num_facilities() ||
      x.rows() != inst.num_facilities() || x.cols() != inst.num_clients()) {
    throw ContractError("solution shape does not match instance");
  }
  double total = 0.0;
  for (int i = 0; i < inst.num_facilities(); ++i) {
    total += inst.open_cost(i) * y[i];
    for (int j = 0; j < inst.num_clients(); ++j) total += inst.c(i, j) * x(i, j);
  }
  return total;
}

inline double Cost(const Instance& inst, const FractionalSolution& s) {
  return Cost(inst, s.x, s.y);
}

inline double Cost(const Instance& inst, const IntegralSolution& s) {
  double total = 0.0;
  for (int i = 0; i < inst.num_facilities(); ++i) {
    if (s.open[i]) total += inst.open_cost(i);
  }
  for (int j = 0; j < inst.num_clients(); ++j) {
    if (s.assign[j] >= 0) total += inst.c(s.assign[j], j);
  }
  return total;
}

// xorshift64* generator. Deterministic for a given seed.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed)
      : state_(seed == 0 ? 0x9E3779B97F4A7C15ULL : seed) {
    // Decorrelate nearby seeds.
    for (int k = 0; k < 8; ++k) Next();
  }

  std::uint64_t Next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(Next() % span);
  }

 private:
  std::uint64_t state_;
};

struct GeneratorParams {
  int num_facilities = 3;
  int num_clients = 5;
  std::uint64_t seed = 1;
  std::pair<double, double> cost_range = {0.5, 2.0};
  std::pair<int, int> capacity_range = {1, 4};
  bool cardinality = false;
};

// Random instance with facilities and clients placed uniformly in the unit
// square and Euclidean distances. Capacities are resampled until they cover
// every client.
inline Instance GenerateEuclidean(const GeneratorParams& p) {
  if (p.num_facilities < 1 || p.num_clients < 1) {
    throw ContractError("generator needs at least one facility and client");
  }
  if (p.cost_range.first > p.cost_range.second ||
      p.capacity_range.first > p.capacity_range.second ||
      p.capacity_range.first < 1) {
    throw ContractError("generator ranges must satisfy lo <= hi, capacity >= 1");
  }
  if (static_cast<long long>(p.capacity_range.second) * p.num_facilities <
      p.num_clients) {
    throw InfeasibleError("capacity range cannot cover all clients");
  }
  XorShift64Star rng(p.seed);
  const int nf = p.num_facilities;
  const int nd = p.num_clients;
  const int n = nf + nd;
  std::vector<std::pair<double, double>> pts(n);
  for (auto& pt : pts) {
    pt.first = rng.Uniform();
    pt.second = rng.Uniform();
  }
  std::vector<Facility> fac(nf);
  for (auto& f : fac) {
    f.open_cost = p.cardinality
                      ? 1.0
                      : rng.Uniform(p.cost_range.first, p.cost_range.second);
  }
  for (int attempt = 0;; ++attempt) {
    long long total = 0;
    for (auto& f : fac) {
      f.capacity = rng.UniformInt(p.capacity_range.first, p.capacity_range.second);
      total += f.capacity;
    }
    if (total >= nd) break;
    if (attempt > 100000) {
      throw InfeasibleError("capacity resampling did not reach total demand");
    }
  }
  Matrix<double> metric(n, n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double d = std::hypot(pts[a].first - pts[b].first,
                                  pts[a].second - pts[b].second);
      metric(a, b) = d;
      metric(b, a) = d;
    }
  }
  return Instance(std::move(fac), nd, std::move(metric));
}

}  // namespace cflapprox

#endif  // CFLAPPROX_INSTANCE_HPP_
