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

// Exact solver by facility-subset enumeration, and a solution checker.
//
// Subsets are visited in Gray-code order so the open capacity is updated by
// one facility per step; subsets that cannot hold every client are skipped
// without solving anything. Each remaining subset gets an optimal
// min-cost assignment, which makes the enumeration exact.

#ifndef CFLAPPROX_ORACLE_HPP_
#define CFLAPPROX_ORACLE_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "cflapprox/common.hpp"
#include "cflapprox/flow.hpp"
#include "cflapprox/instance.hpp"

namespace cflapprox::oracle {

inline constexpr int kMaxFacilities = 16;

struct OracleResult {
  double opt_cost = 0.0;
  IntegralSolution opt_solution;
  // Subsets whose assignment problem was solved.
  long long subsets_examined = 0;
};

namespace internal {

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  // Gray-code position; ties go to the earlier one.
  std::uint32_t step = 0;
  std::vector<int> assign;
  long long examined = 0;
};

inline std::uint32_t Gray(std::uint32_t k) { return k ^ (k >> 1); }

// Visits steps [lo, hi) of the Gray sequence.
inline Best Scan(const Instance& inst, const Matrix<double>& cost,
                 std::uint32_t lo, std::uint32_t hi) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  Best best;
  std::uint32_t mask = Gray(lo);
  long long capacity = 0;
  double opening = 0.0;
  for (int i = 0; i < nf; ++i) {
    if (mask >> i & 1) {
      capacity += inst.capacity(i);
      opening += inst.open_cost(i);
    }
  }
  std::vector<int> cap(nf, 0);
  for (std::uint32_t k = lo; k < hi; ++k) {
    if (k > lo) {
      const int flip = std::countr_zero(k);
      mask ^= 1u << flip;
      const int sign = (mask >> flip & 1) ? 1 : -1;
      capacity += sign * inst.capacity(flip);
      // Recomputed rather than updated so the total does not drift.
      opening = 0.0;
      for (int i = 0; i < nf; ++i) {
        if (mask >> i & 1) opening += inst.open_cost(i);
      }
    }
    if (capacity < nd || opening >= best.cost) continue;
    for (int i = 0; i < nf; ++i) cap[i] = (mask >> i & 1) ? inst.capacity(i) : 0;
    const flow::AssignmentResult a = flow::MinCostAssignment(cost, cap);
    ++best.examined;
    const double total = opening + a.cost;
    if (total < best.cost) {
      best.cost = total;
      best.step = k;
      best.assign = a.assign;
    }
  }
  return best;
}

}  // namespace internal

// jobs <= 1 runs on the calling thread. The result does not depend on jobs.
inline OracleResult ExactOpt(const Instance& inst, int jobs = 1) {
  const int nf = inst.num_facilities();
  if (nf > kMaxFacilities) {
    throw GuardError("exact enumeration is limited to " +
                     std::to_string(kMaxFacilities) + " facilities");
  }
  if (inst.total_capacity() < inst.num_clients()) {
    throw InfeasibleError("no facility subset can serve every client");
  }
  const Matrix<double> cost = inst.connection_costs();
  const std::uint32_t total = 1u << nf;
  jobs = std::clamp(jobs, 1, static_cast<int>(std::min<std::uint32_t>(total, 64)));

  std::vector<internal::Best> parts(jobs);
  if (jobs == 1) {
    parts[0] = internal::Scan(inst, cost, 0, total);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      const std::uint32_t lo = total / jobs * t;
      const std::uint32_t hi = t + 1 == jobs ? total : total / jobs * (t + 1);
      pool.emplace_back([&, t, lo, hi] {
        parts[t] = internal::Scan(inst, cost, lo, hi);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  // Merge in step order so ties resolve as in a single scan.
  const internal::Best* best = nullptr;
  long long examined = 0;
  for (const internal::Best& b : parts) {
    examined += b.examined;
    if (b.assign.empty() && inst.num_clients() > 0) continue;
    if (best == nullptr || b.cost < best->cost ||
        (b.cost == best->cost && b.step < best->step)) {
      best = &b;
    }
  }
  if (inst.num_clients() == 0) {
    OracleResult r;
    r.opt_solution.open.assign(nf, false);
    r.subsets_examined = examined;
    return r;
  }
  if (best == nullptr) {
    throw InfeasibleError("no facility subset can serve every client");
  }
  OracleResult r;
  r.subsets_examined = examined;
  const std::uint32_t mask = internal::Gray(best->step);
  r.opt_solution.open.assign(nf, false);
  for (int i = 0; i < nf; ++i) r.opt_solution.open[i] = mask >> i & 1;
  r.opt_solution.assign = best->assign;
  r.opt_cost = Cost(inst, r.opt_solution);
  return r;
}

struct Verification {
  bool feasible = true;
  double cost = 0.0;
  std::vector<std::string> violations;
};

inline Verification Verify(const Instance& inst, const IntegralSolution& s) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  Verification v;
  auto fail = [&v](std::string msg) {
    v.feasible = false;
    v.violations.push_back(std::move(msg));
  };
  if (static_cast<int>(s.open.size()) != nf) {
    fail("open vector has " + std::to_string(s.open.size()) +
         " entries, expected " + std::to_string(nf));
    return v;
  }
  if (static_cast<int>(s.assign.size()) != nd) {
    fail("assignment has " + std::to_string(s.assign.size()) +
         " entries, expected " + std::to_string(nd));
    return v;
  }
  std::vector<int> load(nf, 0);
  for (int j = 0; j < nd; ++j) {
    const int i = s.assign[j];
    if (i < 0 || i >= nf) {
      fail("client " + std::to_string(j) + " is not assigned");
      continue;
    }
    if (!s.open[i]) {
      fail("client " + std::to_string(j) + " is assigned to closed facility " +
           std::to_string(i));
    }
    ++load[i];
  }
  for (int i = 0; i < nf; ++i) {
    if (load[i] > inst.capacity(i)) {
      fail("facility " + std::to_string(i) + " serves " +
           std::to_string(load[i]) + " clients, capacity " +
           std::to_string(inst.capacity(i)));
    }
  }
  if (v.feasible) v.cost = Cost(inst, s);
  return v;
}

}  // namespace cflapprox::oracle

#endif  // CFLAPPROX_ORACLE_HPP_
