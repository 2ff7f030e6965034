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

#include "cflapprox/flow.hpp"

#include <gtest/gtest.h>

#include "cflapprox/lp.hpp"
#include "flow_oracles.hpp"

namespace cflapprox::flow {
namespace {

using ::cflapprox::testing::EnumeratedAssignmentCost;
using ::cflapprox::testing::EnumeratedMinCut;
using ::cflapprox::testing::EnumeratedTightFacilities;
using ::cflapprox::testing::RandomNetwork;

TEST(MaxFlowTest, SingleArc) {
  FlowNetwork net(2);
  net.AddArc(0, 1, 3.0);
  EXPECT_DOUBLE_EQ(MaxFlow(net, 0, 1).value, 3.0);
}

TEST(MaxFlowTest, ParallelPaths) {
  FlowNetwork net(4);
  net.AddArc(0, 1, 1.0);
  net.AddArc(1, 3, 5.0);
  net.AddArc(0, 2, 2.0);
  net.AddArc(2, 3, 2.0);
  EXPECT_DOUBLE_EQ(MaxFlow(net, 0, 3).value, 3.0);
}

TEST(MaxFlowTest, RandomNetworksMatchEnumeratedMinCut) {
  XorShift64Star rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.UniformInt(2, 10);
    const FlowNetwork net = RandomNetwork(rng, n, 0.35);
    const MaxFlowResult r = MaxFlow(net, 0, n - 1);
    EXPECT_NEAR(r.value, EnumeratedMinCut(net, 0, n - 1), 1e-9);
    // Conservation and capacities.
    std::vector<double> excess(n, 0.0);
    for (int a = 0; a < net.num_arcs(); ++a) {
      EXPECT_GE(r.arc_flow[a], 0.0);
      EXPECT_LE(r.arc_flow[a], net.arc(a).capacity + 1e-12);
      excess[net.arc(a).head] += r.arc_flow[a];
      excess[net.arc(a).tail] -= r.arc_flow[a];
    }
    for (int v = 1; v + 1 < n; ++v) EXPECT_NEAR(excess[v], 0.0, 1e-9);
    EXPECT_NEAR(excess[n - 1], r.value, 1e-9);
  }
}

TEST(AssignmentTest, DiagonalIsFree) {
  Matrix<double> c(2, 2);
  c(0, 0) = 0;
  c(0, 1) = 9;
  c(1, 0) = 9;
  c(1, 1) = 0;
  const AssignmentResult r = MinCostAssignment(c, {1, 1});
  EXPECT_EQ(r.assign, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(r.cost, 0.0);
}

TEST(AssignmentTest, SingleFacilityTakesBoth) {
  Matrix<double> c(1, 2);
  c(0, 0) = 1;
  c(0, 1) = 2;
  const AssignmentResult r = MinCostAssignment(c, {2});
  EXPECT_EQ(r.assign, (std::vector<int>{0, 0}));
  EXPECT_DOUBLE_EQ(r.cost, 3.0);
}

TEST(AssignmentTest, InsufficientCapacityThrows) {
  Matrix<double> c(1, 2, 1.0);
  EXPECT_THROW(MinCostAssignment(c, {1}), InfeasibleError);
}

TEST(AssignmentTest, RandomMatchesEnumeration) {
  XorShift64Star rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const int nf = rng.UniformInt(1, 3);
    const int nd = rng.UniformInt(1, 6);
    Matrix<double> c(nf, nd);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nd; ++j) c(i, j) = rng.Uniform(0.0, 10.0);
    }
    std::vector<int> cap(nf);
    int total = 0;
    do {
      total = 0;
      for (int& u : cap) total += (u = rng.UniformInt(0, nd));
    } while (total < nd);
    const AssignmentResult r = MinCostAssignment(c, cap);
    EXPECT_NEAR(r.cost, EnumeratedAssignmentCost(c, cap), 1e-9);
    std::vector<int> load(nf, 0);
    for (int j = 0; j < nd; ++j) ++load[r.assign[j]];
    for (int i = 0; i < nf; ++i) EXPECT_LE(load[i], cap[i]);
  }
}

TEST(MinCostFlowTest, HandlesNegativeCosts) {
  MinCostFlow mcf(3);
  const int a = mcf.AddArc(0, 1, 2, -1.0);
  mcf.AddArc(1, 2, 2, 1.0);
  const int b = mcf.AddArc(0, 2, 2, 5.0);
  EXPECT_EQ(mcf.Solve(0, 2, 3), 3);
  EXPECT_EQ(mcf.flow(a), 2);
  EXPECT_EQ(mcf.flow(b), 1);
  EXPECT_DOUBLE_EQ(mcf.TotalCost(), 5.0);
}

TEST(BMatchingTest, EmptyFacilitySetGivesZero) {
  Matrix<double> cap(0, 3);
  double value = -1.0;
  const Matrix<double> h = MaxBMatching(cap, {}, &value);
  EXPECT_EQ(value, 0.0);
  EXPECT_EQ(h.rows(), 0);
}

TEST(BMatchingTest, SingleEdge) {
  Matrix<double> cap(1, 1, 0.6);
  const Matrix<double> h = MaxBMatching(cap, {1.0});
  EXPECT_NEAR(h(0, 0), 0.6, 1e-15);
}

// Maximum of sum h over the b-matching polytope, solved as an LP.
double BMatchingLpValue(const Matrix<double>& cap,
                        const std::vector<double>& fcap) {
  lp::LinearProgram prog(lp::Sense::kMaximize);
  Matrix<int> var(cap.rows(), cap.cols());
  for (int i = 0; i < cap.rows(); ++i) {
    for (int j = 0; j < cap.cols(); ++j) {
      var(i, j) = prog.AddVariable(0.0, cap(i, j), 1.0);
    }
  }
  for (int i = 0; i < cap.rows(); ++i) {
    std::vector<lp::Term> t;
    for (int j = 0; j < cap.cols(); ++j) t.push_back({var(i, j), 1.0});
    prog.AddRow(t, lp::Relation::kLessEqual, fcap[i]);
  }
  for (int j = 0; j < cap.cols(); ++j) {
    std::vector<lp::Term> t;
    for (int i = 0; i < cap.rows(); ++i) t.push_back({var(i, j), 1.0});
    prog.AddRow(t, lp::Relation::kLessEqual, 1.0);
  }
  return lp::Solve(prog).objective;
}

TEST(BMatchingTest, RandomMatchesLpAndTightFacilitiesAreSaturated) {
  XorShift64Star rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int nf = rng.UniformInt(1, 3);
    const int nd = rng.UniformInt(1, 4);
    Matrix<double> cap(nf, nd);
    std::vector<double> fcap(nf);
    for (int i = 0; i < nf; ++i) {
      fcap[i] = rng.UniformInt(1, 2);
      for (int j = 0; j < nd; ++j) {
        cap(i, j) = rng.Uniform() < 0.3 ? 0.0 : rng.Uniform(0.0, 1.2);
      }
    }
    double value = 0.0;
    const Matrix<double> h = MaxBMatching(cap, fcap, &value);
    EXPECT_NEAR(value, BMatchingLpValue(cap, fcap), 1e-7);
    for (int i = 0; i < nf; ++i) EXPECT_LE(h.RowSum(i), fcap[i] + 1e-12);
    for (int j = 0; j < nd; ++j) EXPECT_LE(h.ColSum(j), 1.0 + 1e-12);

    const std::vector<bool> tight = TightlyOccupied(h, cap);
    EXPECT_EQ(tight, EnumeratedTightFacilities(h, cap, tol::kReach));
    for (int i = 0; i < nf; ++i) {
      if (tight[i]) {
        EXPECT_NEAR(h.RowSum(i), fcap[i], 1e-6);
      }
    }
  }
}

TEST(TightlyOccupiedTest, FullyAssignedClientsReachNothing) {
  Matrix<double> cap(1, 2, 1.0);
  Matrix<double> h(1, 2, 1.0);
  EXPECT_EQ(TightlyOccupied(h, cap), std::vector<bool>{false});
}

TEST(TightlyOccupiedTest, SlackEdgeFromPartialClient) {
  Matrix<double> cap(1, 1, 0.8);
  Matrix<double> h(1, 1, 0.5);
  EXPECT_EQ(TightlyOccupied(h, cap), std::vector<bool>{true});
}

TEST(TightlyOccupiedTest, ChainReachesSecondFacility) {
  // j1 (partial) -slack-> i1 -positive-> j2 -slack-> i2.
  Matrix<double> cap(2, 2, 0.0);
  Matrix<double> h(2, 2, 0.0);
  cap(0, 0) = 0.5;
  h(0, 0) = 0.2;  // j1 partial, slack to i1
  cap(0, 1) = 1.0;
  h(0, 1) = 0.6;  // i1 -> j2
  cap(1, 1) = 0.9;
  h(1, 1) = 0.4;  // j2 full (1.0), slack to i2
  const std::vector<bool> expected =
      EnumeratedTightFacilities(h, cap, tol::kReach);
  EXPECT_EQ(expected, (std::vector<bool>{true, true}));
  EXPECT_EQ(TightlyOccupied(h, cap), expected);
}

}  // namespace
}  // namespace cflapprox::flow
