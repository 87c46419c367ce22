// Test-only vertex-enumeration oracle for small LPs (n <= ~12): every
// vertex of the feasible set solves some n-subset of active constraints
// drawn from {A rows, G rows, finite bounds}. Redundant (rank-deficient)
// subsets solve to singular systems and are skipped; feasibility is checked
// against the full constraint set, so redundant equalities (balanced
// transportation, assignment) are handled. The optimum of a bounded LP over
// a pointed feasible set is the best vertex.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "oracle/dense_oracle.hpp"
#include "pdhglp/lp_model.hpp"

namespace test_oracle {

struct VertexEnumResult {
  double objective = 0.0;  // includes the instance constant
  std::vector<double> primal;
};

/// Returns the optimal vertex, or nullopt when no subset of active
/// constraints yields a feasible point (infeasible instance or a feasible
/// set with no vertex). Throws when the combination count explodes.
inline std::optional<VertexEnumResult> vertex_enum_solve(
    const pdhglp::GeneralFormLp& lp, double feas_tol = 1e-7,
    std::int64_t combination_limit = 4000000) {
  using pdhglp::index_t;
  const index_t n = lp.num_variables();
  const index_t m1 = lp.num_inequalities();
  const index_t m2 = lp.num_equalities();

  const DenseMatrix g = DenseMatrix::from_csr(lp.inequality_matrix);
  const DenseMatrix a = DenseMatrix::from_csr(lp.equality_matrix);

  struct Candidate {
    enum class Kind { kEquality, kInequality, kLower, kUpper } kind;
    index_t index;
  };
  std::vector<Candidate> pool;
  for (index_t r = 0; r < m2; ++r) {
    pool.push_back({Candidate::Kind::kEquality, r});
  }
  for (index_t r = 0; r < m1; ++r) {
    pool.push_back({Candidate::Kind::kInequality, r});
  }
  for (index_t j = 0; j < n; ++j) {
    if (lp.lower[static_cast<std::size_t>(j)] > -pdhglp::kInf) {
      pool.push_back({Candidate::Kind::kLower, j});
    }
    if (lp.upper[static_cast<std::size_t>(j)] < pdhglp::kInf) {
      pool.push_back({Candidate::Kind::kUpper, j});
    }
  }
  if (static_cast<index_t>(pool.size()) < n) return std::nullopt;

  std::optional<VertexEnumResult> best;
  std::int64_t combinations = 0;

  std::vector<index_t> chosen(static_cast<std::size_t>(n));
  auto try_combination = [&]() {
    if (++combinations > combination_limit) {
      throw std::runtime_error("vertex enumeration: combination limit exceeded");
    }
    DenseMatrix system(n, n);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i) {
      const Candidate& cand =
          pool[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])];
      switch (cand.kind) {
        case Candidate::Kind::kEquality:
          for (index_t c = 0; c < n; ++c) system.at(i, c) = a.at(cand.index, c);
          rhs[static_cast<std::size_t>(i)] =
              lp.equality_rhs[static_cast<std::size_t>(cand.index)];
          break;
        case Candidate::Kind::kInequality:
          for (index_t c = 0; c < n; ++c) system.at(i, c) = g.at(cand.index, c);
          rhs[static_cast<std::size_t>(i)] =
              lp.inequality_rhs[static_cast<std::size_t>(cand.index)];
          break;
        case Candidate::Kind::kLower:
          system.at(i, cand.index) = 1.0;
          rhs[static_cast<std::size_t>(i)] =
              lp.lower[static_cast<std::size_t>(cand.index)];
          break;
        case Candidate::Kind::kUpper:
          system.at(i, cand.index) = 1.0;
          rhs[static_cast<std::size_t>(i)] =
              lp.upper[static_cast<std::size_t>(cand.index)];
          break;
      }
    }
    std::vector<double> x;
    if (!solve_dense_system(std::move(system), std::move(rhs), x)) return;

    for (index_t j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      if (x[js] < lp.lower[js] - feas_tol || x[js] > lp.upper[js] + feas_tol) {
        return;
      }
    }
    const std::vector<double> gx = g.matvec(x);
    for (index_t r = 0; r < m1; ++r) {
      if (gx[static_cast<std::size_t>(r)] <
          lp.inequality_rhs[static_cast<std::size_t>(r)] - feas_tol) {
        return;
      }
    }
    const std::vector<double> ax = a.matvec(x);
    for (index_t r = 0; r < m2; ++r) {
      if (std::abs(ax[static_cast<std::size_t>(r)] -
                   lp.equality_rhs[static_cast<std::size_t>(r)]) > feas_tol) {
        return;
      }
    }

    double obj = lp.objective_constant;
    for (index_t j = 0; j < n; ++j) {
      obj += lp.objective[static_cast<std::size_t>(j)] *
             x[static_cast<std::size_t>(j)];
    }
    if (!best || obj < best->objective) {
      best = VertexEnumResult{obj, x};
    }
  };

  // Iterative n-combination walk over the pool.
  for (index_t i = 0; i < n; ++i) chosen[static_cast<std::size_t>(i)] = i;
  while (true) {
    try_combination();
    index_t i = n - 1;
    while (i >= 0 &&
           chosen[static_cast<std::size_t>(i)] ==
               static_cast<index_t>(pool.size()) - n + i) {
      --i;
    }
    if (i < 0) break;
    chosen[static_cast<std::size_t>(i)] += 1;
    for (index_t j = i + 1; j < n; ++j) {
      chosen[static_cast<std::size_t>(j)] =
          chosen[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace test_oracle
