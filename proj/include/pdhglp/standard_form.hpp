/// @file standard_form.hpp
/// @brief Fixed-step restarted PDHG with uniform averaging for standard-form
/// LP (min c'x s.t. Ax = b, x >= 0), its KKT error, and the epoch trace the
/// linear-convergence property tests consume.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdhglp/lp_model.hpp"
#include "pdhglp/sparse_matrix.hpp"
#include "pdhglp/vector_ops.hpp"

namespace pdhglp {

struct StandardFormLp {
  CsrMatrix constraint_matrix;    // A, m x n
  std::vector<double> rhs;        // b
  std::vector<double> objective;  // c

  index_t num_variables() const { return constraint_matrix.num_cols; }
  index_t num_constraints() const { return constraint_matrix.num_rows; }

  void validate() const {
    if (static_cast<index_t>(rhs.size()) != num_constraints() ||
        static_cast<index_t>(objective.size()) != num_variables()) {
      throw std::invalid_argument("standard-form lp: dimension mismatch");
    }
  }
};

/// ||(Ax - b; [-x]+; [A'y - c]+; [c'x - b'y]+)||_2
inline double kkt_error_standard(const StandardFormLp& lp,
                                 std::span<const double> x,
                                 std::span<const double> y) {
  double sum = 0.0;
  std::vector<double> ax = spmv(lp.constraint_matrix, x);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = ax[i] - lp.rhs[i];
    sum += r * r;
  }
  for (double v : x) {
    const double r = std::max(-v, 0.0);
    sum += r * r;
  }
  std::vector<double> aty = spmv_transpose(lp.constraint_matrix, y);
  for (std::size_t i = 0; i < aty.size(); ++i) {
    const double r = std::max(aty[i] - lp.objective[i], 0.0);
    sum += r * r;
  }
  const double gap = std::max(dot(lp.objective, x) - dot(lp.rhs, y), 0.0);
  sum += gap * gap;
  return std::sqrt(sum);
}

/// Largest singular value by power iteration on A'A. Deterministic: the
/// start vector is all-ones (plus a basis kick if that is orthogonal to the
/// dominant eigenvector).
inline double spectral_norm(const CsrMatrix& a, double tol = 1e-10,
                            int max_iterations = 10000) {
  if (a.num_rows == 0 || a.num_cols == 0 || a.nnz() == 0) return 0.0;
  std::vector<double> v(static_cast<std::size_t>(a.num_cols), 1.0);
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  double lambda = 0.0;
  std::vector<double> av(static_cast<std::size_t>(a.num_rows));
  std::vector<double> atav(static_cast<std::size_t>(a.num_cols));
  for (int it = 0; it < max_iterations; ++it) {
    spmv(a, v, av);
    spmv_transpose(a, av, atav);
    const double next = norm2(atav);
    if (next == 0.0) {
      // v landed in the null space; kick with a basis vector.
      std::fill(v.begin(), v.end(), 0.0);
      v[static_cast<std::size_t>(it) % v.size()] = 1.0;
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = atav[i] / next;
    if (std::abs(next - lambda) <= tol * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

/// ||z||_Ps^2 = ||x||^2 + ||y||^2 + 2 s y'Ax for Ps = (I, sA'; sA, I).
inline double p_s_norm_squared(const StandardFormLp& lp, double step_size,
                               std::span<const double> x,
                               std::span<const double> y) {
  const std::vector<double> ax = spmv(lp.constraint_matrix, x);
  return squared_norm(x) + squared_norm(y) + 2.0 * step_size * dot(y, ax);
}

struct StandardPdhgOptions {
  double step_size = 0.0;        // s; both primal and dual step
  double restart_decay = 0.5;    // beta in (0, 1)
  double convergence_tol = 1e-9; // stop once the epoch-start KKT error drops below
  std::int64_t iteration_limit = 1000000;
  bool record_iterates = false;  // keep every inner iterate per epoch

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
    if (!(restart_decay > 0.0 && restart_decay < 1.0)) {
      throw std::invalid_argument("restart_decay must lie in (0, 1)");
    }
  }
};

struct StandardEpoch {
  PrimalDualPoint start;
  double start_kkt = 0.0;
  std::int64_t length = 0;  // inner iterations until the restart fired
  std::vector<PrimalDualPoint> iterates;  // filled when record_iterates is set
};

struct StandardPdhgTrace {
  std::vector<StandardEpoch> epochs;  // includes the in-progress epoch at exit
  std::int64_t total_iterations = 0;
  bool converged = false;
  bool numerical_failure = false;
};

/// Algorithm: inner loop
///   x+ = proj_{>=0}(x - s (c - A'y)),  y+ = y + s (b - A(2x+ - x)),
/// with uniform running averages; restart to the average as soon as
/// KKT(avg) <= beta * KKT(epoch start).
inline StandardPdhgTrace restarted_pdhg_standard(
    const StandardFormLp& lp, const StandardPdhgOptions& options,
    const PrimalDualPoint& start = {}) {
  lp.validate();
  options.validate();
  const index_t n = lp.num_variables();
  const index_t m = lp.num_constraints();
  const double s = options.step_size;

  PrimalDualPoint z = start.primal.empty() ? PrimalDualPoint::zeros(n, m) : start;
  StandardPdhgTrace trace;

  auto open_epoch = [&](const PrimalDualPoint& point) {
    StandardEpoch epoch;
    epoch.start = point;
    epoch.start_kkt = kkt_error_standard(lp, point.primal, point.dual);
    trace.epochs.push_back(std::move(epoch));
  };
  open_epoch(z);

  std::vector<double> x_avg(static_cast<std::size_t>(n), 0.0);
  std::vector<double> y_avg(static_cast<std::size_t>(m), 0.0);
  std::int64_t inner = 0;

  std::vector<double> aty(static_cast<std::size_t>(n));
  std::vector<double> a_ext(static_cast<std::size_t>(m));
  std::vector<double> extrapolated(static_cast<std::size_t>(n));

  while (trace.total_iterations < options.iteration_limit) {
    StandardEpoch& epoch = trace.epochs.back();
    if (epoch.start_kkt <= options.convergence_tol) {
      trace.converged = true;
      break;
    }

    spmv_transpose(lp.constraint_matrix, z.dual, aty);
    PrimalDualPoint next = z;
    for (index_t i = 0; i < n; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      next.primal[u] =
          std::max(z.primal[u] - s * (lp.objective[u] - aty[u]), 0.0);
      extrapolated[u] = 2.0 * next.primal[u] - z.primal[u];
    }
    spmv(lp.constraint_matrix, extrapolated, a_ext);
    for (index_t i = 0; i < m; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      next.dual[u] = z.dual[u] + s * (lp.rhs[u] - a_ext[u]);
    }
    if (!all_finite(next.primal) || !all_finite(next.dual)) {
      trace.numerical_failure = true;
      break;
    }

    z = std::move(next);
    inner += 1;
    trace.total_iterations += 1;
    const double w = 1.0 / static_cast<double>(inner);
    for (std::size_t i = 0; i < x_avg.size(); ++i) {
      x_avg[i] += w * (z.primal[i] - x_avg[i]);
    }
    for (std::size_t i = 0; i < y_avg.size(); ++i) {
      y_avg[i] += w * (z.dual[i] - y_avg[i]);
    }
    if (options.record_iterates) epoch.iterates.push_back(z);

    const double avg_kkt = kkt_error_standard(lp, x_avg, y_avg);
    if (avg_kkt <= options.restart_decay * epoch.start_kkt) {
      epoch.length = inner;
      z = {x_avg, y_avg};
      open_epoch(z);
      inner = 0;
      std::fill(x_avg.begin(), x_avg.end(), 0.0);
      std::fill(y_avg.begin(), y_avg.end(), 0.0);
    }
  }
  if (!trace.epochs.empty() && trace.epochs.back().length == 0) {
    trace.epochs.back().length = inner;
  }
  return trace;
}

}  // namespace pdhglp
