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

#include "cflapprox/instance.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cflapprox/io.hpp"

namespace cflapprox {
namespace {

bool Mentions(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& m : v) {
    if (m.find(s) != std::string::npos) return true;
  }
  return false;
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("cflapprox_instance_test_" + name))
      .string();
}

TEST(ValidateTest, ZeroMetricIsValid) {
  const Instance inst({{1.0, 1}}, 1, Matrix<double>(2, 2, 0.0));
  EXPECT_TRUE(Validate(inst).empty());
}

TEST(ValidateTest, TriangleViolationNamesTheTriple) {
  // Nodes a=0 (facility), b=1, d=2 (clients).
  Matrix<double> m(3, 3, 0.0);
  m(0, 1) = m(1, 0) = 5.0;
  m(1, 2) = m(2, 1) = 1.0;
  m(0, 2) = m(2, 0) = 10.0;
  const Instance inst({{1.0, 2}}, 2, m);
  const auto v = Validate(inst);
  EXPECT_TRUE(Mentions(v, "(0,1,2)"));
  ValidateOptions skip;
  skip.check_triangle = false;
  EXPECT_TRUE(Validate(inst, skip).empty());
}

TEST(ValidateTest, ZeroCapacity) {
  const Instance inst({{1.0, 0}}, 1, Matrix<double>(2, 2, 0.0));
  EXPECT_TRUE(Mentions(Validate(inst), "capacity"));
}

TEST(ValidateTest, AsymmetryNegativeAndDiagonal) {
  Matrix<double> m(2, 2, 0.0);
  m(0, 1) = 1.0;
  m(1, 0) = 2.0;
  m(1, 1) = 0.5;
  EXPECT_TRUE(Mentions(Validate(Instance({{1.0, 1}}, 1, m)), "symmetric"));
  EXPECT_TRUE(Mentions(Validate(Instance({{1.0, 1}}, 1, m)), "not zero"));
  m(0, 1) = m(1, 0) = -1.0;
  EXPECT_TRUE(Mentions(Validate(Instance({{1.0, 1}}, 1, m)), "negative"));
  EXPECT_TRUE(Mentions(Validate(Instance({{-1.0, 1}}, 1, Matrix<double>(2, 2))),
                       "open cost"));
}

TEST(InstanceTest, CardinalityFlag) {
  EXPECT_TRUE(Instance({{1.0, 1}, {1.0, 2}}, 1, Matrix<double>(3, 3))
                  .cardinality_costs());
  EXPECT_FALSE(Instance({{1.0, 1}, {1.5, 2}}, 1, Matrix<double>(3, 3))
                   .cardinality_costs());
}

TEST(InstanceTest, MetricMustBeSquareOverAllNodes) {
  EXPECT_THROW(Instance({{1.0, 1}}, 2, Matrix<double>(2, 2)), ContractError);
}

TEST(GenerateTest, Deterministic) {
  GeneratorParams p;
  p.num_facilities = 2;
  p.num_clients = 3;
  p.seed = 7;
  EXPECT_EQ(GenerateEuclidean(p), GenerateEuclidean(p));
  GeneratorParams q = p;
  q.seed = 8;
  EXPECT_FALSE(GenerateEuclidean(p) == GenerateEuclidean(q));
}

TEST(GenerateTest, OutputsValidateAndCoverDemand) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    GeneratorParams p;
    p.num_facilities = 1 + seed % 6;
    p.num_clients = 1 + static_cast<int>(seed % (4 * p.num_facilities));
    p.seed = seed;
    p.cardinality = seed % 2 == 0;
    const Instance inst = GenerateEuclidean(p);
    EXPECT_TRUE(Validate(inst).empty()) << "seed " << seed;
    EXPECT_GE(inst.total_capacity(), inst.num_clients());
    EXPECT_EQ(inst.cardinality_costs(), p.cardinality);
    for (int i = 0; i < inst.num_facilities(); ++i) {
      EXPECT_GE(inst.capacity(i), p.capacity_range.first);
      EXPECT_LE(inst.capacity(i), p.capacity_range.second);
    }
  }
}

TEST(GenerateTest, ImpossibleCapacityRange) {
  GeneratorParams p;
  p.num_facilities = 1;
  p.num_clients = 5;
  p.capacity_range = {1, 1};
  EXPECT_THROW(GenerateEuclidean(p), InfeasibleError);
}

TEST(CostTest, HandSums) {
  Matrix<double> m(3, 3, 0.0);
  m(0, 1) = m(1, 0) = 1.0;
  m(0, 2) = m(2, 0) = 1.0;
  const Instance inst({{5.0, 2}}, 2, m);
  EXPECT_EQ(Cost(inst, Matrix<double>(1, 2, 0.0), {0.0}), 0.0);
  EXPECT_EQ(Cost(inst, Matrix<double>(1, 2, 1.0), {1.0}), 7.0);
  EXPECT_EQ(Cost(inst, IntegralSolution{{true}, {0, 0}}), 7.0);

  Matrix<double> far(2, 2, 0.0);
  far(0, 1) = far(1, 0) = 2.0;
  const Instance one({{4.0, 1}}, 1, far);
  EXPECT_DOUBLE_EQ(Cost(one, Matrix<double>(1, 1, 0.5), {0.5}), 3.0);
}

TEST(CostTest, AdditiveOnDisjointSupports) {
  GeneratorParams p;
  p.num_facilities = 3;
  p.num_clients = 4;
  const Instance inst = GenerateEuclidean(p);
  XorShift64Star rng(3);
  Matrix<double> x1(3, 4, 0.0), x2(3, 4, 0.0), sum(3, 4, 0.0);
  std::vector<double> y1(3, 0.0), y2(3, 0.0), ys(3, 0.0);
  for (int i = 0; i < 3; ++i) {
    (i % 2 ? y1 : y2)[i] = rng.Uniform();
    ys[i] = y1[i] + y2[i];
    for (int j = 0; j < 4; ++j) {
      ((i + j) % 2 ? x1 : x2)(i, j) = rng.Uniform();
      sum(i, j) = x1(i, j) + x2(i, j);
    }
  }
  EXPECT_NEAR(Cost(inst, sum, ys), Cost(inst, x1, y1) + Cost(inst, x2, y2),
              1e-12);
  EXPECT_THROW(Cost(inst, x1, {0.0}), ContractError);
}

TEST(IoTest, RoundTripIsExact) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorParams p;
    p.num_facilities = 3;
    p.num_clients = 4;
    p.seed = seed;
    const Instance inst = GenerateEuclidean(p);
    const std::string path = TempPath("rt.json");
    io::SaveInstance(path, inst);
    EXPECT_EQ(io::LoadInstance(path), inst);
    std::remove(path.c_str());
  }
}

TEST(IoTest, TruncatedFileReportsTheLine) {
  GeneratorParams p;
  const std::string text = io::InstanceToJson(GenerateEuclidean(p)).dump(1);
  const std::string cut = text.substr(0, text.size() / 2);
  const int lines = 1 + static_cast<int>(std::count(cut.begin(), cut.end(), '\n'));
  try {
    io::ParseInstance(cut, "half.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("half.json:" + std::to_string(lines) + ":"),
              std::string::npos)
        << msg;
  }
}

TEST(IoTest, SyntaxErrorOnLaterLine) {
  const std::string text = "{\n  \"facilities\": [],\n  \"n_clients\": ,\n}";
  try {
    io::ParseInstance(text, "bad.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos)
        << e.what();
  }
}

TEST(IoTest, SchemaErrors) {
  EXPECT_THROW(io::ParseInstance("[]"), ParseError);
  EXPECT_THROW(io::ParseInstance(R"({"facilities": [], "metric": []})"),
               ParseError);
  EXPECT_THROW(io::ParseInstance(
                   R"({"facilities": [{"open_cost": 1}], "n_clients": 0,
                       "metric": [[0]]})"),
               ParseError);
  EXPECT_THROW(io::ParseInstance(
                   R"({"facilities": [{"open_cost": 1, "capacity": 1.5}],
                       "n_clients": 0, "metric": [[0]]})"),
               ParseError);
  EXPECT_THROW(io::ParseInstance(
                   R"({"facilities": [{"open_cost": 1, "capacity": 1}],
                       "n_clients": 1, "metric": [[0, 1], [1]]})"),
               ParseError);
  EXPECT_THROW(io::LoadInstance(TempPath("does_not_exist.json")), ParseError);
}

TEST(IoTest, InvalidInstanceStillLoads) {
  const Instance inst = io::ParseInstance(
      R"({"facilities": [{"open_cost": 1, "capacity": 0}], "n_clients": 1,
          "metric": [[0, 3], [3, 0]]})");
  EXPECT_EQ(inst.capacity(0), 0);
  EXPECT_FALSE(Validate(inst).empty());
}

TEST(IoTest, SolutionRoundTrip) {
  const IntegralSolution s{{true, false, true}, {0, 2, 2, 0}};
  const std::string path = TempPath("sol.json");
  io::SaveSolution(path, s, 4.5);
  const IntegralSolution back = io::LoadSolution(path);
  EXPECT_EQ(back.open, s.open);
  EXPECT_EQ(back.assign, s.assign);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace cflapprox
