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

// Dense two-phase bounded-variable primal simplex.
//
// Every row r is turned into  a_r . z + s_r = b_r  with a slack whose bounds
// encode the relation (<=: s >= 0, >=: s <= 0, =: s == 0). Rows whose initial
// residual does not fit the slack bounds get an artificial column. Phase 1
// minimizes the sum of artificials; on infeasibility its duals are returned as
// a Farkas certificate. Pricing is Dantzig for a fixed number of pivots, then
// Bland's rule.
//
// Solve<double> is the production path. Solve<cpp_rational> runs the same code
// with exact arithmetic and zero tolerances; it is meant for small LPs.

#ifndef CFLAPPROX_LP_HPP_
#define CFLAPPROX_LP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cflapprox/common.hpp"

namespace cflapprox::lp {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kGreaterEqual, kEqual };
enum class Status { kOptimal, kInfeasible, kUnbounded };

// kFreeZero marks a nonbasic variable without finite bounds, held at zero.
enum class BasisStatus { kBasic, kAtLower, kAtUpper, kFreeZero };

struct Term {
  int var;
  double coef;
};

// rhs(theta) = constant + sum_p coef_p * theta_p over external parameters.
struct AffineRhs {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  double Eval(const std::vector<double>& theta) const {
    double v = constant;
    for (const auto& [p, c] : terms) v += c * theta[p];
    return v;
  }
};

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct Row {
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::optional<AffineRhs> affine;
};

class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::kMinimize) : sense_(sense) {}

  Sense sense() const { return sense_; }
  void set_sense(Sense s) { sense_ = s; }

  int AddVariable(double lower, double upper, double cost) {
    if (std::isnan(lower) || std::isnan(upper) || !std::isfinite(cost) ||
        lower > upper || lower == kInf || upper == -kInf) {
      throw ContractError("bad variable bounds or cost");
    }
    vars_.push_back({lower, upper, cost});
    return num_vars() - 1;
  }

  int AddRow(std::vector<Term> terms, Relation rel, double rhs) {
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= num_vars() || !std::isfinite(t.coef)) {
        throw ContractError("row references an undeclared variable");
      }
    }
    if (!std::isfinite(rhs)) throw ContractError("row rhs must be finite");
    rows_.push_back({std::move(terms), rel, rhs, std::nullopt});
    return num_rows() - 1;
  }

  // Row whose rhs is affine in the parameters; the rhs is evaluated at the
  // parameter values set by SetParameters.
  int AddAffineRow(std::vector<Term> terms, Relation rel, AffineRhs rhs) {
    for (const auto& [p, c] : rhs.terms) {
      if (p < 0 || p >= num_params()) {
        throw ContractError("affine rhs references an unknown parameter");
      }
    }
    const int r = AddRow(std::move(terms), rel, rhs.Eval(params_));
    rows_[r].affine = std::move(rhs);
    return r;
  }

  void SetParameters(std::vector<double> theta) { params_ = std::move(theta); }
  int num_params() const { return static_cast<int>(params_.size()); }
  const std::vector<double>& parameters() const { return params_; }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Variable& var(int k) const { return vars_[k]; }
  const Row& row(int r) const { return rows_[r]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_cost(int k, double c) { vars_[k].cost = c; }
  void set_bounds(int k, double lo, double hi) {
    vars_[k].lower = lo;
    vars_[k].upper = hi;
  }

 private:
  Sense sense_;
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<double> params_;
};

template <typename Scalar>
struct Solution {
  Status status = Status::kInfeasible;
  Scalar objective{};
  std::vector<Scalar> x;
  std::vector<Scalar> row_activity;
  // d objective / d rhs, in the sense of the original problem.
  std::vector<Scalar> duals;
  std::vector<Scalar> reduced_costs;
  std::vector<BasisStatus> var_status;
  // Status of the row slack s_r = rhs_r - activity_r.
  std::vector<BasisStatus> row_status;
  // Infeasible only: phase-1 row multipliers pi with pi . b > max over the
  // bound box of (A^T pi) . z, and that gap.
  std::vector<Scalar> farkas;
  Scalar farkas_gap{};
  // Phase-1 optimum (sum of artificials).
  Scalar infeasibility{};
  int iterations = 0;

  double value(int k) const;
};

struct SolveOptions {
  // Phase-1 optimum above this means infeasible.
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  // Negative means a size-based default.
  int dantzig_pivots = -1;
  int max_iterations = -1;
};

namespace internal {

template <typename S>
inline constexpr bool kExact = !std::is_floating_point_v<S>;

template <typename S>
double ToDouble(const S& v) {
  if constexpr (kExact<S>) {
    return v.template convert_to<double>();
  } else {
    return static_cast<double>(v);
  }
}

template <typename S>
S Tol(double t) {
  if constexpr (kExact<S>) {
    return S(0);
  } else {
    return S(t);
  }
}

template <typename S>
S Abs(const S& v) {
  return v < 0 ? S(-v) : S(v);
}

// Full tableau over [structurals | slacks | artificials]. Keeps a dense copy of
// A so the basis can be refactorized from the original data.
template <typename S>
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolveOptions& opts)
      : lp_(lp), opts_(opts), n_(lp.num_vars()), m_(lp.num_rows()) {
    ptol_ = Tol<S>(opts.pivot_tol);
    otol_ = Tol<S>(opts.optimality_tol);
    ftol_ = Tol<S>(opts.feasibility_tol);
    rtol_ = Tol<S>(1e-12);
  }

  Solution<S> Run() {
    Setup();
    Solution<S> sol;
    const int total = m_ + ncols_;
    dantzig_limit_ =
        opts_.dantzig_pivots >= 0 ? opts_.dantzig_pivots : 5 * total + 50;
    max_iters_ =
        opts_.max_iterations >= 0 ? opts_.max_iterations : 50 * total + 10000;

    // Phase 1.
    std::vector<S> c1(ncols_, S(0));
    for (int k = n_ + m_; k < ncols_; ++k) c1[k] = S(1);
    cost_ = c1;
    ComputeReducedCosts();
    if (Iterate(/*phase_one=*/true) != Status::kOptimal) {
      throw SolverFailure("phase 1 reported unbounded");
    }
    S w(0);
    for (int k = n_ + m_; k < ncols_; ++k) w += val_[k];
    sol.infeasibility = w;
    if (w > ftol_) {
      sol.status = Status::kInfeasible;
      BuildFarkas(&sol);
      sol.iterations = iters_;
      return sol;
    }

    // Phase 2: artificials pinned to zero.
    DriveOutArtificials();
    for (int k = n_ + m_; k < ncols_; ++k) {
      has_hi_[k] = true;
      hi_[k] = S(0);
      if (status_[k] != BasisStatus::kBasic) {
        val_[k] = S(0);
        status_[k] = BasisStatus::kAtLower;
      }
    }
    const bool maximize = lp_.sense() == Sense::kMaximize;
    std::vector<S> c2(ncols_, S(0));
    for (int k = 0; k < n_; ++k) {
      c2[k] = S(lp_.var(k).cost);
      if (maximize) c2[k] = -c2[k];
    }
    cost_ = c2;
    ComputeReducedCosts();
    const Status st = Iterate(/*phase_one=*/false);
    sol.iterations = iters_;
    if (st == Status::kUnbounded) {
      sol.status = Status::kUnbounded;
      return sol;
    }
    if constexpr (!kExact<S>) Refactorize();
    Extract(&sol, maximize);
    return sol;
  }

 private:
  void Setup() {
    // Dense copy of A.
    a_ = Matrix<S>(m_, n_, S(0));
    b_.assign(m_, S(0));
    for (int r = 0; r < m_; ++r) {
      const Row& row = lp_.row(r);
      for (const Term& t : row.terms) a_(r, t.var) += S(t.coef);
      b_[r] = S(row.rhs);
    }
    // Bounds for structurals and slacks; artificials appended below.
    const int base = n_ + m_;
    lo_.assign(base, S(0));
    hi_.assign(base, S(0));
    has_lo_.assign(base, false);
    has_hi_.assign(base, false);
    for (int k = 0; k < n_; ++k) {
      const Variable& v = lp_.var(k);
      if (std::isfinite(v.lower)) {
        has_lo_[k] = true;
        lo_[k] = S(v.lower);
      }
      if (std::isfinite(v.upper)) {
        has_hi_[k] = true;
        hi_[k] = S(v.upper);
      }
    }
    for (int r = 0; r < m_; ++r) {
      const int s = n_ + r;
      switch (lp_.row(r).relation) {
        case Relation::kLessEqual:
          has_lo_[s] = true;
          break;
        case Relation::kGreaterEqual:
          has_hi_[s] = true;
          break;
        case Relation::kEqual:
          has_lo_[s] = has_hi_[s] = true;
          break;
      }
    }
    val_.assign(base, S(0));
    status_.assign(base, BasisStatus::kAtLower);
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k]) {
        val_[k] = lo_[k];
        status_[k] = BasisStatus::kAtLower;
      } else if (has_hi_[k]) {
        val_[k] = hi_[k];
        status_[k] = BasisStatus::kAtUpper;
      } else {
        status_[k] = BasisStatus::kFreeZero;
      }
    }
    // Residuals decide slack-basic vs artificial-basic rows.
    std::vector<S> resid(m_);
    std::vector<int> sigma(m_, 0);
    int nart = 0;
    for (int r = 0; r < m_; ++r) {
      S acc = b_[r];
      for (int k = 0; k < n_; ++k) {
        if (a_(r, k) != 0 && val_[k] != 0) acc -= a_(r, k) * val_[k];
      }
      resid[r] = acc;
      const int s = n_ + r;
      const bool fits = (!has_lo_[s] || acc >= lo_[s]) &&
                        (!has_hi_[s] || acc <= hi_[s]);
      if (!fits) {
        sigma[r] = acc > 0 ? 1 : -1;
        ++nart;
      }
    }
    ncols_ = base + nart;
    lo_.resize(ncols_, S(0));
    hi_.resize(ncols_, S(0));
    has_lo_.resize(ncols_, true);
    has_hi_.resize(ncols_, false);
    val_.resize(ncols_, S(0));
    status_.resize(ncols_, BasisStatus::kAtLower);
    art_row_.assign(nart, -1);
    art_sign_.assign(nart, 0);

    t_ = Matrix<S>(m_, ncols_, S(0));
    basis_.assign(m_, -1);
    int next_art = base;
    for (int r = 0; r < m_; ++r) {
      S* row = t_.row_data(r);
      for (int k = 0; k < n_; ++k) row[k] = a_(r, k);
      row[n_ + r] = S(1);
      const int s = n_ + r;
      if (sigma[r] == 0) {
        basis_[r] = s;
        status_[s] = BasisStatus::kBasic;
        val_[s] = resid[r];
      } else {
        const int art = next_art++;
        art_row_[art - base] = r;
        art_sign_[art - base] = sigma[r];
        row[art] = S(sigma[r]);
        // Slack sits at its zero bound.
        val_[s] = S(0);
        status_[s] = has_lo_[s] ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
        if (sigma[r] < 0) {
          for (int k = 0; k < ncols_; ++k) row[k] = -row[k];
        }
        basis_[r] = art;
        status_[art] = BasisStatus::kBasic;
        val_[art] = Abs(resid[r]);
      }
    }
  }

  // Original column k of [A | I | Sigma] times vector v (row space).
  S ColumnDot(int k, const std::vector<S>& y) const {
    if (k < n_) {
      S acc(0);
      for (int r = 0; r < m_; ++r) {
        if (a_(r, k) != 0 && y[r] != 0) acc += a_(r, k) * y[r];
      }
      return acc;
    }
    if (k < n_ + m_) return y[k - n_];
    const int a = k - n_ - m_;
    return S(art_sign_[a]) * y[art_row_[a]];
  }

  void ComputeReducedCosts() {
    d_ = cost_;
    for (int i = 0; i < m_; ++i) {
      const S cb = cost_[basis_[i]];
      if (cb == 0) continue;
      const S* row = t_.row_data(i);
      for (int k = 0; k < ncols_; ++k) {
        if (row[k] != 0) d_[k] -= cb * row[k];
      }
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = S(0);
  }

  bool IsFixed(int k) const {
    return has_lo_[k] && has_hi_[k] && lo_[k] == hi_[k];
  }

  void Pivot(int r, int k) {
    S* prow = t_.row_data(r);
    const S piv = prow[k];
    for (int c = 0; c < ncols_; ++c) {
      if (prow[c] != 0) prow[c] /= piv;
    }
    prow[k] = S(1);
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      S* row = t_.row_data(i);
      const S f = row[k];
      if (f == 0) continue;
      for (int c = 0; c < ncols_; ++c) {
        if (prow[c] != 0) row[c] -= f * prow[c];
      }
      row[k] = S(0);
    }
    const S fd = d_[k];
    if (fd != 0) {
      for (int c = 0; c < ncols_; ++c) {
        if (prow[c] != 0) d_[c] -= fd * prow[c];
      }
    }
    d_[k] = S(0);
  }

  Status Iterate(bool phase_one) {
    (void)phase_one;
    for (;;) {
      if (iters_ >= max_iters_) {
        throw SolverFailure("simplex iteration budget exhausted");
      }
      const bool bland = pivots_ >= dantzig_limit_;
      int enter = -1;
      int dir = 0;
      S best(0);
      for (int k = 0; k < ncols_; ++k) {
        const BasisStatus st = status_[k];
        if (st == BasisStatus::kBasic || IsFixed(k)) continue;
        int kdir = 0;
        if ((st == BasisStatus::kAtLower || st == BasisStatus::kFreeZero) &&
            d_[k] < -otol_) {
          kdir = 1;
        } else if ((st == BasisStatus::kAtUpper ||
                    st == BasisStatus::kFreeZero) &&
                   d_[k] > otol_) {
          kdir = -1;
        }
        if (kdir == 0) continue;
        const S score = Abs(d_[k]);
        if (enter < 0 || score > best) {
          enter = k;
          dir = kdir;
          best = score;
          if (bland) break;
        }
      }
      if (enter < 0) return Status::kOptimal;
      ++iters_;

      // Ratio test.
      int leave = -1;
      S tmin(0);
      bool bounded = false;
      std::vector<S> ratio(m_);
      std::vector<char> cand(m_, 0);
      for (int i = 0; i < m_; ++i) {
        const S alpha = dir > 0 ? t_(i, enter) : S(-t_(i, enter));
        const int b = basis_[i];
        S t;
        if (alpha > ptol_ && has_lo_[b]) {
          t = (val_[b] - lo_[b]) / alpha;
        } else if (alpha < -ptol_ && has_hi_[b]) {
          t = (hi_[b] - val_[b]) / S(-alpha);
        } else {
          continue;
        }
        if (t < 0) t = S(0);
        ratio[i] = t;
        cand[i] = 1;
        if (!bounded || t < tmin) {
          tmin = t;
          bounded = true;
        }
      }
      if (bounded) {
        // Among near-ties pick the largest pivot (Dantzig phase) or the
        // smallest leaving index (Bland phase).
        S best_piv(0);
        for (int i = 0; i < m_; ++i) {
          if (!cand[i] || ratio[i] > tmin + rtol_) continue;
          const S piv = Abs(t_(i, enter));
          if (leave < 0) {
            leave = i;
            best_piv = piv;
            continue;
          }
          if (bland) {
            if (basis_[i] < basis_[leave]) leave = i;
          } else if (piv > best_piv ||
                     (piv == best_piv && basis_[i] < basis_[leave])) {
            leave = i;
            best_piv = piv;
          }
        }
        tmin = ratio[leave];
      }
      bool flip = false;
      if (has_lo_[enter] && has_hi_[enter]) {
        const S span = hi_[enter] - lo_[enter];
        if (!bounded || span <= tmin) {
          flip = true;
          tmin = span;
          bounded = true;
        }
      }
      if (!bounded) return Status::kUnbounded;

      const S delta = dir > 0 ? tmin : S(-tmin);
      if (delta != 0) {
        for (int i = 0; i < m_; ++i) {
          const S tik = t_(i, enter);
          if (tik != 0) val_[basis_[i]] -= tik * delta;
        }
      }
      if (flip) {
        if (dir > 0) {
          val_[enter] = hi_[enter];
          status_[enter] = BasisStatus::kAtUpper;
        } else {
          val_[enter] = lo_[enter];
          status_[enter] = BasisStatus::kAtLower;
        }
        continue;
      }
      const int out = basis_[leave];
      const S alpha = dir > 0 ? t_(leave, enter) : S(-t_(leave, enter));
      val_[enter] += delta;
      if (alpha > 0) {
        val_[out] = lo_[out];
        status_[out] = BasisStatus::kAtLower;
      } else {
        val_[out] = hi_[out];
        status_[out] = BasisStatus::kAtUpper;
      }
      basis_[leave] = enter;
      status_[enter] = BasisStatus::kBasic;
      Pivot(leave, enter);
      ++pivots_;
    }
  }

  // Swap zero-valued basic artificials for real columns where possible. A row
  // with no usable pivot is redundant and keeps its (pinned) artificial.
  void DriveOutArtificials() {
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b < n_ + m_) continue;
      int best = -1;
      S best_piv(0);
      for (int k = 0; k < n_ + m_; ++k) {
        if (status_[k] == BasisStatus::kBasic) continue;
        const S piv = Abs(t_(i, k));
        if (piv > ptol_ && (best < 0 || piv > best_piv)) {
          best = k;
          best_piv = piv;
        }
      }
      if (best < 0) continue;
      status_[b] = BasisStatus::kAtLower;
      val_[b] = S(0);
      basis_[i] = best;
      status_[best] = BasisStatus::kBasic;
      Pivot(i, best);
    }
    if constexpr (!kExact<S>) {
      // Rebuild basic values after the swaps.
      RecomputeBasicValues();
    }
  }

  void BuildFarkas(Solution<S>* sol) const {
    std::vector<S> pi(m_);
    for (int r = 0; r < m_; ++r) {
      S p = -d_[n_ + r];
      // Clip sign noise; the valid sign follows the slack bounds.
      switch (lp_.row(r).relation) {
        case Relation::kLessEqual:
          if (p > 0) p = S(0);
          break;
        case Relation::kGreaterEqual:
          if (p < 0) p = S(0);
          break;
        case Relation::kEqual:
          break;
      }
      pi[r] = p;
    }
    S pib(0);
    for (int r = 0; r < m_; ++r) pib += pi[r] * b_[r];
    S boxmax(0);
    for (int k = 0; k < n_; ++k) {
      S dk = ColumnDot(k, pi);
      if (Abs(dk) <= otol_) continue;
      if (dk > 0) {
        if (!has_hi_[k]) {
          boxmax = S(0);
          sol->farkas_gap = S(-1);
          sol->farkas = pi;
          return;
        }
        boxmax += dk * hi_[k];
      } else {
        if (!has_lo_[k]) {
          sol->farkas_gap = S(-1);
          sol->farkas = pi;
          return;
        }
        boxmax += dk * lo_[k];
      }
    }
    sol->farkas = std::move(pi);
    sol->farkas_gap = pib - boxmax;
  }

  // Double mode only: solve B x_B = b - N x_N and B^T y = c_B from the
  // original data so accumulated tableau drift does not leak into results.
  void RecomputeBasicValues() {
    std::vector<S> rhs = b_;
    for (int k = 0; k < ncols_; ++k) {
      if (status_[k] == BasisStatus::kBasic || val_[k] == 0) continue;
      AddColumn(k, -val_[k], &rhs);
    }
    Matrix<S> bm = BasisMatrix();
    std::vector<S> xb;
    if (!SolveDense(bm, rhs, /*transpose=*/false, &xb)) return;
    for (int i = 0; i < m_; ++i) val_[basis_[i]] = xb[i];
  }

  void Refactorize() {
    RecomputeBasicValues();
    Matrix<S> bm = BasisMatrix();
    std::vector<S> cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    std::vector<S> y;
    if (!SolveDense(bm, cb, /*transpose=*/true, &y)) return;
    for (int k = 0; k < ncols_; ++k) {
      d_[k] = status_[k] == BasisStatus::kBasic ? S(0)
                                                : cost_[k] - ColumnDot(k, y);
    }
    // Snap basic values that drifted by float noise back into their box.
    const S snap = Tol<S>(1e-9);
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (has_lo_[b] && val_[b] < lo_[b] && lo_[b] - val_[b] <= snap) {
        val_[b] = lo_[b];
      }
      if (has_hi_[b] && val_[b] > hi_[b] && val_[b] - hi_[b] <= snap) {
        val_[b] = hi_[b];
      }
    }
  }

  void AddColumn(int k, const S& scale, std::vector<S>* v) const {
    if (k < n_) {
      for (int r = 0; r < m_; ++r) {
        if (a_(r, k) != 0) (*v)[r] += scale * a_(r, k);
      }
    } else if (k < n_ + m_) {
      (*v)[k - n_] += scale;
    } else {
      const int a = k - n_ - m_;
      (*v)[art_row_[a]] += scale * S(art_sign_[a]);
    }
  }

  Matrix<S> BasisMatrix() const {
    Matrix<S> bm(m_, m_, S(0));
    for (int i = 0; i < m_; ++i) {
      std::vector<S> col(m_, S(0));
      AddColumn(basis_[i], S(1), &col);
      for (int r = 0; r < m_; ++r) bm(r, i) = col[r];
    }
    return bm;
  }

  // Gaussian elimination with partial pivoting. Returns false when the basis
  // looks singular, in which case the tableau values are kept.
  static bool SolveDense(Matrix<S> a, std::vector<S> rhs, bool transpose,
                         std::vector<S>* out) {
    const int m = a.rows();
    if (transpose) {
      Matrix<S> at(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) at(r, c) = a(c, r);
      }
      a = std::move(at);
    }
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r) {
        if (Abs(a(r, col)) > Abs(a(piv, col))) piv = r;
      }
      if (Abs(a(piv, col)) < S(1e-12)) return false;
      if (piv != col) {
        for (int c = 0; c < m; ++c) std::swap(a(piv, c), a(col, c));
        std::swap(rhs[piv], rhs[col]);
      }
      for (int r = col + 1; r < m; ++r) {
        const S f = a(r, col) / a(col, col);
        if (f == 0) continue;
        for (int c = col; c < m; ++c) a(r, c) -= f * a(col, c);
        rhs[r] -= f * rhs[col];
      }
    }
    out->assign(m, S(0));
    for (int r = m - 1; r >= 0; --r) {
      S acc = rhs[r];
      for (int c = r + 1; c < m; ++c) acc -= a(r, c) * (*out)[c];
      (*out)[r] = acc / a(r, r);
    }
    return true;
  }

  void Extract(Solution<S>* sol, bool maximize) const {
    sol->status = Status::kOptimal;
    sol->x.assign(val_.begin(), val_.begin() + n_);
    sol->var_status.assign(status_.begin(), status_.begin() + n_);
    sol->row_status.assign(status_.begin() + n_, status_.begin() + n_ + m_);
    sol->reduced_costs.resize(n_);
    for (int k = 0; k < n_; ++k) {
      sol->reduced_costs[k] = maximize ? S(-d_[k]) : d_[k];
    }
    sol->duals.resize(m_);
    for (int r = 0; r < m_; ++r) {
      // y_r = -(reduced cost of slack r); negate again for maximization.
      sol->duals[r] = maximize ? d_[n_ + r] : S(-d_[n_ + r]);
    }
    sol->row_activity.assign(m_, S(0));
    for (int r = 0; r < m_; ++r) {
      S acc(0);
      for (int k = 0; k < n_; ++k) {
        if (a_(r, k) != 0) acc += a_(r, k) * sol->x[k];
      }
      sol->row_activity[r] = acc;
    }
    S obj(0);
    for (int k = 0; k < n_; ++k) obj += S(lp_.var(k).cost) * sol->x[k];
    sol->objective = obj;
  }

  const LinearProgram& lp_;
  SolveOptions opts_;
  int n_;
  int m_;
  int ncols_ = 0;
  S ptol_, otol_, ftol_, rtol_;
  int dantzig_limit_ = 0;
  int max_iters_ = 0;
  int iters_ = 0;
  int pivots_ = 0;

  Matrix<S> a_;
  std::vector<S> b_;
  Matrix<S> t_;
  std::vector<S> lo_, hi_;
  std::vector<bool> has_lo_, has_hi_;
  std::vector<S> val_;
  std::vector<BasisStatus> status_;
  std::vector<int> basis_;
  std::vector<S> cost_, d_;
  std::vector<int> art_row_, art_sign_;
};

}  // namespace internal

template <typename Scalar>
double Solution<Scalar>::value(int k) const {
  return internal::ToDouble(x[k]);
}

template <typename Scalar = double>
Solution<Scalar> Solve(const LinearProgram& lp, const SolveOptions& opts = {}) {
  internal::Simplex<Scalar> simplex(lp, opts);
  return simplex.Run();
}

using LpSolution = Solution<double>;

// Converts an exact solution to doubles (for reporting and comparisons).
inline LpSolution ToDouble(const Solution<Rational>& s) {
  auto conv = [](const std::vector<Rational>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = internal::ToDouble(v[i]);
    }
    return out;
  };
  LpSolution d;
  d.status = s.status;
  d.objective = internal::ToDouble(s.objective);
  d.x = conv(s.x);
  d.row_activity = conv(s.row_activity);
  d.duals = conv(s.duals);
  d.reduced_costs = conv(s.reduced_costs);
  d.var_status = s.var_status;
  d.row_status = s.row_status;
  d.farkas = conv(s.farkas);
  d.farkas_gap = internal::ToDouble(s.farkas_gap);
  d.infeasibility = internal::ToDouble(s.infeasibility);
  d.iterations = s.iterations;
  return d;
}

// Linear inequality a . theta >= b over the parameter space of an LP.
struct Hyperplane {
  std::vector<double> a;
  double b = 0.0;

  double Lhs(const std::vector<double>& theta) const {
    double v = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) v += a[p] * theta[p];
    return v;
  }
  // Positive when theta violates the inequality.
  double Violation(const std::vector<double>& theta) const {
    return b - Lhs(theta);
  }
};

// Lifts the Farkas certificate of an infeasible parametrized LP to an
// inequality over its parameters. Any parameter vector at which the LP is
// feasible satisfies the result; the parameters the LP was built at violate
// it by the certificate gap.
template <typename Scalar>
Hyperplane FarkasCut(const LinearProgram& lp, const Solution<Scalar>& sol) {
  if (sol.status != Status::kInfeasible) {
    throw ContractError("farkas cut needs an infeasible solve");
  }
  if (lp.num_params() == 0) {
    throw ContractError("farkas cut needs affine rhs metadata");
  }
  if (!(internal::ToDouble(sol.farkas_gap) > 0.0)) {
    throw SolverFailure("farkas certificate does not certify infeasibility");
  }
  // pi . b(theta) <= boxmax for every feasible theta, with
  // b_r(theta) = b_r0 + B_r . theta.
  const int m = lp.num_rows();
  std::vector<double> pi(m);
  for (int r = 0; r < m; ++r) pi[r] = internal::ToDouble(sol.farkas[r]);
  double pib0 = 0.0;
  double pib = 0.0;
  Hyperplane h;
  h.a.assign(lp.num_params(), 0.0);
  for (int r = 0; r < m; ++r) {
    if (pi[r] == 0.0) continue;
    const Row& row = lp.row(r);
    pib += pi[r] * row.rhs;
    if (row.affine) {
      pib0 += pi[r] * row.affine->constant;
      for (const auto& [p, c] : row.affine->terms) h.a[p] -= pi[r] * c;
    } else {
      pib0 += pi[r] * row.rhs;
    }
  }
  const double boxmax = pib - internal::ToDouble(sol.farkas_gap);
  h.b = pib0 - boxmax;
  return h;
}

}  // namespace cflapprox::lp

#endif  // CFLAPPROX_LP_HPP_
