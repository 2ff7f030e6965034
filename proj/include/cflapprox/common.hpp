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

// Shared building blocks: the error hierarchy, a small dense matrix, and the
// tolerance constants used across the library.

#ifndef CFLAPPROX_COMMON_HPP_
#define CFLAPPROX_COMMON_HPP_

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cflapprox {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The instance (or a sub-problem that must be feasible) admits no solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A property that the algorithm guarantees was found violated at runtime.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// The LP solver could not reach a trustworthy answer.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// An iteration budget ran out before the driver converged.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Input larger than a brute-force routine is willing to handle.
class GuardError : public Error {
 public:
  using Error::Error;
};

namespace tol {
// Metric checks on instances.
inline constexpr double kMetric = 1e-9;
// Threshold comparisons inside the rounding algorithms.
inline constexpr double kThreshold = 1e-7;
// Invariant checks recorded by the rounding algorithms.
inline constexpr double kInvariant = 1e-6;
// Residual slack on the b-matching residual graph.
inline constexpr double kReach = 1e-7;
// Values at or below this are treated as zero support.
inline constexpr double kZero = 1e-12;
}  // namespace tol

// Row-major dense matrix. Value semantics; no views.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const T& fill = T())
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T* row_data(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row_data(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  T RowSum(int r) const {
    T s = T();
    for (int c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
  }
  T ColSum(int c) const {
    T s = T();
    for (int r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// One runtime-asserted property: how far it was from holding, and whether
// that stays inside the tolerance.
struct InvariantCheck {
  std::string name;
  double excess = 0.0;
  double tolerance = tol::kInvariant;
  bool ok = true;
};

// Accumulates named checks. Repeated names keep the worst excess.
class InvariantLog {
 public:
  void Record(const std::string& name, double excess,
              double tolerance = tol::kInvariant) {
    Combine({name, excess, tolerance, excess <= tolerance});
  }
  void RecordFlag(const std::string& name, bool holds) {
    Combine({name, holds ? 0.0 : 1.0, 0.0, holds});
  }
  void Merge(const InvariantLog& other) {
    for (const InvariantCheck& c : other.checks_) Combine(c);
  }

  bool all_ok() const {
    for (const InvariantCheck& c : checks_) {
      if (!c.ok) return false;
    }
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const InvariantCheck& c : checks_) {
      if (!c.ok) out.push_back(c.name);
    }
    return out;
  }
  const std::vector<InvariantCheck>& checks() const { return checks_; }

 private:
  void Combine(const InvariantCheck& in) {
    for (InvariantCheck& c : checks_) {
      if (c.name == in.name) {
        if (in.excess > c.excess) c.excess = in.excess;
        c.ok = c.ok && in.ok;
        return;
      }
    }
    checks_.push_back(in);
  }

  std::vector<InvariantCheck> checks_;
};

}  // namespace cflapprox

#endif  // CFLAPPROX_COMMON_HPP_
