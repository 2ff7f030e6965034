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

// Exhaustive enumeration of integral solutions for tiny instances.

#ifndef CFLAPPROX_TESTS_SOLUTION_ORACLES_HPP_
#define CFLAPPROX_TESTS_SOLUTION_ORACLES_HPP_

#include <functional>
#include <limits>
#include <vector>

#include "cflapprox/instance.hpp"

namespace cflapprox::testing {

// Calls fn(open, assign) for every feasible integral solution in which each
// client goes to an open facility within capacity. Facilities may be open
// without clients.
inline void ForEachIntegralSolution(
    const Instance& inst,
    const std::function<void(const std::vector<bool>&, const std::vector<int>&)>&
        fn) {
  const int nf = inst.num_facilities();
  const int nd = inst.num_clients();
  for (int mask = 0; mask < (1 << nf); ++mask) {
    std::vector<bool> open(nf);
    for (int i = 0; i < nf; ++i) open[i] = mask >> i & 1;
    std::vector<int> assign(nd, 0);
    std::vector<int> load(nf, 0);
    auto rec = [&](auto&& self, int j) -> void {
      if (j == nd) {
        fn(open, assign);
        return;
      }
      for (int i = 0; i < nf; ++i) {
        if (!open[i] || load[i] >= inst.capacity(i)) continue;
        ++load[i];
        assign[j] = i;
        self(self, j + 1);
        --load[i];
      }
    };
    rec(rec, 0);
  }
}

inline double BruteForceOptimum(const Instance& inst) {
  double best = std::numeric_limits<double>::infinity();
  ForEachIntegralSolution(inst, [&](const std::vector<bool>& open,
                                    const std::vector<int>& assign) {
    best = std::min(best, Cost(inst, IntegralSolution{open, assign}));
  });
  return best;
}

}  // namespace cflapprox::testing

#endif  // CFLAPPROX_TESTS_SOLUTION_ORACLES_HPP_
