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

// Solves one random instance with both algorithms and compares against the
// exact optimum.

#include <cstdio>

#include "cflapprox/cfl.hpp"
#include "cflapprox/cflcfc.hpp"
#include "cflapprox/instance.hpp"
#include "cflapprox/oracle.hpp"

int main() {
  using namespace cflapprox;  // NOLINT

  GeneratorParams p;
  p.num_facilities = 5;
  p.num_clients = 8;
  p.seed = 42;
  const Instance inst = GenerateEuclidean(p);

  const cfl::CflResult r = cfl::SolveCfl(inst);
  const double opt = oracle::ExactOpt(inst).opt_cost;
  std::printf("cfl     cost %.4f  bound %.4f  opt %.4f  cuts %d\n", r.cost,
              r.lower_bound, opt, r.cuts);

  p.cardinality = true;
  const Instance unit = GenerateEuclidean(p);
  const cfc::CfcResult c = cfc::SolveCflCfc(unit);
  std::printf("cflcfc  cost %.4f  bound %.4f  opt %.4f\n", c.cost,
              c.lower_bound, oracle::ExactOpt(unit).opt_cost);

  for (int j = 0; j < inst.num_clients(); ++j) {
    std::printf("client %d -> facility %d\n", j, r.solution.assign[j]);
  }
  return r.checks.all_ok() && c.checks.all_ok() ? 0 : 3;
}
