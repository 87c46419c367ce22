/// @file lp_model.hpp
/// @brief General-form LP instance, its saddle-point reformulation, the
/// primal/dual projections, reduced costs, and residual/objective
/// evaluation used by termination and the KKT error.
///
/// The instance is
///     min c'x  s.t.  Gx >= h,  Ax = b,  l <= x <= u
/// and its saddle form
///     min_{l<=x<=u} max_{y: y_1..m1 >= 0}  c'x - y'Kx + q'y
/// with K = (G; A) and q = (h; b).

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdhglp/sparse_matrix.hpp"
#include "pdhglp/vector_ops.hpp"

namespace pdhglp {

struct GeneralFormLp {
  CsrMatrix inequality_matrix;        // G, m1 x n
  CsrMatrix equality_matrix;          // A, m2 x n
  std::vector<double> objective;      // c
  std::vector<double> inequality_rhs; // h
  std::vector<double> equality_rhs;   // b
  std::vector<double> lower;          // l, -inf allowed
  std::vector<double> upper;          // u, +inf allowed
  double objective_constant = 0.0;

  index_t num_variables() const { return static_cast<index_t>(objective.size()); }
  index_t num_inequalities() const { return inequality_matrix.num_rows; }
  index_t num_equalities() const { return equality_matrix.num_rows; }
  index_t num_constraints() const { return num_inequalities() + num_equalities(); }
  index_t nnz() const { return inequality_matrix.nnz() + equality_matrix.nnz(); }

  /// Throws std::invalid_argument if dimensions disagree, a bound is NaN,
  /// l_i > u_i, l_i = +inf, or u_i = -inf.
  void validate() const;
};

inline void GeneralFormLp::validate() const {
  const index_t n = num_variables();
  if (inequality_matrix.num_cols != n || equality_matrix.num_cols != n) {
    throw std::invalid_argument("lp: constraint matrices must have n columns");
  }
  if (static_cast<index_t>(inequality_rhs.size()) != num_inequalities() ||
      static_cast<index_t>(equality_rhs.size()) != num_equalities()) {
    throw std::invalid_argument("lp: rhs length does not match row count");
  }
  if (static_cast<index_t>(lower.size()) != n ||
      static_cast<index_t>(upper.size()) != n) {
    throw std::invalid_argument("lp: bound vectors must have length n");
  }
  for (index_t i = 0; i < n; ++i) {
    const double l = lower[static_cast<std::size_t>(i)];
    const double u = upper[static_cast<std::size_t>(i)];
    if (std::isnan(l) || std::isnan(u)) {
      throw std::invalid_argument("lp: NaN bound on variable " + std::to_string(i));
    }
    if (l > u || l == kInf || u == -kInf) {
      throw std::invalid_argument("lp: empty bound interval on variable " +
                                  std::to_string(i));
    }
  }
  for (double v : objective) {
    if (std::isnan(v)) throw std::invalid_argument("lp: NaN objective entry");
  }
}

/// Stacked form: K = (G; A), q = (h; b); the first m1 dual coordinates are
/// sign-constrained.
struct SaddleProblem {
  CsrMatrix constraint_matrix;   // K
  std::vector<double> rhs;       // q
  std::vector<double> objective; // c
  std::vector<double> lower;
  std::vector<double> upper;
  index_t num_inequalities = 0;  // m1

  index_t num_variables() const { return static_cast<index_t>(objective.size()); }
  index_t num_constraints() const { return constraint_matrix.num_rows; }
};

inline SaddleProblem to_saddle(const GeneralFormLp& lp) {
  SaddleProblem s;
  s.constraint_matrix = vstack(lp.inequality_matrix, lp.equality_matrix);
  s.rhs = lp.inequality_rhs;
  s.rhs.insert(s.rhs.end(), lp.equality_rhs.begin(), lp.equality_rhs.end());
  s.objective = lp.objective;
  s.lower = lp.lower;
  s.upper = lp.upper;
  s.num_inequalities = lp.num_inequalities();
  return s;
}

struct PrimalDualPoint {
  std::vector<double> primal; // x
  std::vector<double> dual;   // y

  static PrimalDualPoint zeros(index_t n, index_t m) {
    return {std::vector<double>(static_cast<std::size_t>(n), 0.0),
            std::vector<double>(static_cast<std::size_t>(m), 0.0)};
  }
};

inline void project_primal_in_place(std::vector<double>& x,
                                    const std::vector<double>& lower,
                                    const std::vector<double>& upper) {
  clamp_to_box(x, lower, upper);
}

inline std::vector<double> project_primal(std::vector<double> x,
                                          const GeneralFormLp& lp) {
  project_primal_in_place(x, lp.lower, lp.upper);
  return x;
}

/// Clamps the first m1 components at zero from below; the rest (equality
/// multipliers) are free.
inline void project_dual_in_place(std::vector<double>& y, index_t m1) {
  for (index_t i = 0; i < m1; ++i) {
    double& v = y[static_cast<std::size_t>(i)];
    if (v < 0.0) v = 0.0;
  }
}

inline std::vector<double> project_dual(std::vector<double> y, index_t m1) {
  project_dual_in_place(y, m1);
  return y;
}

/// Reduced costs lambda: the dual slack c - K'y projected onto the signs
/// that keep l'lambda+ - u'lambda- finite. lambda_pos is active only where
/// l is finite and lambda_neg only where u is finite, which makes the 0*inf
/// convention unreachable.
struct ReducedCosts {
  std::vector<double> lambda;
  std::vector<double> lambda_pos;
  std::vector<double> lambda_neg;
};

/// Builds lambda from an already-computed dual slack r = c - K'y.
inline ReducedCosts reduced_costs_from_slack(const std::vector<double>& slack,
                                             const std::vector<double>& lower,
                                             const std::vector<double>& upper) {
  const std::size_t n = slack.size();
  ReducedCosts rc;
  rc.lambda.assign(n, 0.0);
  rc.lambda_pos.assign(n, 0.0);
  rc.lambda_neg.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool lower_finite = lower[i] > -kInf;
    const bool upper_finite = upper[i] < kInf;
    double v = slack[i];
    if (lower_finite && upper_finite) {
      // keep v
    } else if (lower_finite) {
      v = std::max(v, 0.0);
    } else if (upper_finite) {
      v = std::min(v, 0.0);
    } else {
      v = 0.0;
    }
    rc.lambda[i] = v;
    if (v > 0.0) {
      rc.lambda_pos[i] = v;
    } else if (v < 0.0) {
      rc.lambda_neg[i] = -v;
    }
  }
  return rc;
}

/// r = c - G'y1 - A'y2 for the stacked dual vector y = (y1; y2).
inline std::vector<double> dual_slack(const GeneralFormLp& lp,
                                      std::span<const double> y) {
  const index_t m1 = lp.num_inequalities();
  std::vector<double> r = lp.objective;
  std::vector<double> tmp(static_cast<std::size_t>(lp.num_variables()));
  spmv_transpose(lp.inequality_matrix, y.subspan(0, static_cast<std::size_t>(m1)),
                 tmp);
  axpy(-1.0, tmp, r);
  spmv_transpose(lp.equality_matrix, y.subspan(static_cast<std::size_t>(m1)), tmp);
  axpy(-1.0, tmp, r);
  return r;
}

inline ReducedCosts reduced_costs(const GeneralFormLp& lp,
                                  std::span<const double> y) {
  return reduced_costs_from_slack(dual_slack(lp, y), lp.lower, lp.upper);
}

struct PrimalResidual {
  std::vector<double> equality;            // Ax - b
  std::vector<double> inequality_violation; // [h - Gx]+
};

inline PrimalResidual primal_residual(const GeneralFormLp& lp,
                                      std::span<const double> x) {
  PrimalResidual r;
  r.equality = spmv(lp.equality_matrix, x);
  axpy(-1.0, lp.equality_rhs, r.equality);
  std::vector<double> gx = spmv(lp.inequality_matrix, x);
  r.inequality_violation.resize(gx.size());
  for (std::size_t i = 0; i < gx.size(); ++i) {
    r.inequality_violation[i] = std::max(lp.inequality_rhs[i] - gx[i], 0.0);
  }
  return r;
}

inline double primal_residual_norm(const PrimalResidual& r) {
  return std::sqrt(squared_norm(r.equality) +
                   squared_norm(r.inequality_violation));
}

/// c - K'y - lambda
inline std::vector<double> dual_residual(const GeneralFormLp& lp,
                                         std::span<const double> y,
                                         const ReducedCosts& rc) {
  std::vector<double> r = dual_slack(lp, y);
  axpy(-1.0, rc.lambda, r);
  return r;
}

inline double primal_objective(const GeneralFormLp& lp,
                               std::span<const double> x) {
  return dot(lp.objective, x) + lp.objective_constant;
}

/// q'y + l'lambda+ - u'lambda- + const; finite by the ReducedCosts
/// invariants (lambda+ vanishes where l = -inf, lambda- where u = +inf).
inline double dual_objective(const GeneralFormLp& lp, std::span<const double> y,
                             const ReducedCosts& rc) {
  const index_t m1 = lp.num_inequalities();
  double obj = lp.objective_constant;
  for (index_t i = 0; i < m1; ++i) {
    obj += lp.inequality_rhs[static_cast<std::size_t>(i)] *
           y[static_cast<std::size_t>(i)];
  }
  for (index_t i = 0; i < lp.num_equalities(); ++i) {
    obj += lp.equality_rhs[static_cast<std::size_t>(i)] *
           y[static_cast<std::size_t>(m1 + i)];
  }
  for (std::size_t i = 0; i < rc.lambda.size(); ++i) {
    if (rc.lambda_pos[i] != 0.0) obj += lp.lower[i] * rc.lambda_pos[i];
    if (rc.lambda_neg[i] != 0.0) obj -= lp.upper[i] * rc.lambda_neg[i];
  }
  return obj;
}

}  // namespace pdhglp
