/// @file solver.hpp
/// @brief Restarted PDHG for general-form LP: adaptive step-size line
/// search, KKT-error restart scheme, primal-weight balancing, relative-KKT
/// termination on the original (unscaled) instance, and approximate-Farkas
/// infeasibility detection.

#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pdhglp/lp_model.hpp"
#include "pdhglp/scaling.hpp"
#include "pdhglp/sparse_matrix.hpp"
#include "pdhglp/vector_ops.hpp"

namespace pdhglp {

enum class SolveStatus {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kIterationLimit,
  kTimeLimit,
  kNumericalError,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kPrimalInfeasible: return "primal_infeasible";
    case SolveStatus::kDualInfeasible: return "dual_infeasible";
    case SolveStatus::kIterationLimit: return "iteration_limit";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kNumericalError: return "numerical_error";
  }
  return "unknown";
}

enum class RestartCriterion { kNone, kSufficientDecay, kNecessaryDecay, kLongInnerLoop };

inline const char* to_string(RestartCriterion c) {
  switch (c) {
    case RestartCriterion::kNone: return "none";
    case RestartCriterion::kSufficientDecay: return "sufficient_decay";
    case RestartCriterion::kNecessaryDecay: return "necessary_decay_no_progress";
    case RestartCriterion::kLongInnerLoop: return "long_inner_loop";
  }
  return "unknown";
}

struct SolverParams {
  double eps_optimal = 1e-4;
  double eps_infeasible = 1e-8;
  double time_limit_seconds = 3600.0;
  std::int64_t iteration_limit = std::numeric_limits<std::int64_t>::max();
  double beta_sufficient = 0.2;
  double beta_necessary = 0.8;
  double beta_artificial = 0.36;
  double theta_smoothing = 0.5;
  double eps_zero = 1e-10;
  std::int64_t evaluation_frequency = 64;  // 1 = evaluate every iteration
  ScalingMode scaling = ScalingMode::kRuizPockChambolle;
  int ruiz_iterations = 10;
  double pock_chambolle_alpha = 1.0;
  double step_reduction_exponent = 0.3;
  double step_growth_exponent = 0.6;
  double omega_min = 1e-8;
  double omega_max = 1e8;
  bool record_step_log = false;

  void validate() const {
    if (!(eps_optimal > 0.0) || !(eps_infeasible > 0.0)) {
      throw std::invalid_argument("params: tolerances must be positive");
    }
    if (!(beta_sufficient > 0.0 && beta_sufficient < beta_necessary &&
          beta_necessary < 1.0)) {
      throw std::invalid_argument("params: need 0 < beta_sufficient < beta_necessary < 1");
    }
    if (theta_smoothing < 0.0 || theta_smoothing > 1.0) {
      throw std::invalid_argument("params: theta_smoothing must lie in [0, 1]");
    }
    if (evaluation_frequency < 1) {
      throw std::invalid_argument("params: evaluation_frequency must be >= 1");
    }
  }
};

/// ||z||_omega = sqrt(omega ||x||^2 + ||y||^2 / omega)
inline double omega_norm(std::span<const double> x, std::span<const double> y,
                         double omega) {
  return std::sqrt(omega * squared_norm(x) + squared_norm(y) / omega);
}

// ---------------------------------------------------------------------------
// KKT error and termination
// ---------------------------------------------------------------------------

/// Residual norms and raw objectives of a point on the original instance.
/// The weighted KKT error is
///   sqrt(omega^2 ||primal residual||^2 + ||dual residual||^2 / omega^2 + gap^2).
struct KktResiduals {
  double primal_residual_norm = 0.0;  // ||(Ax-b; [h-Gx]+)||_2
  double dual_residual_norm = 0.0;    // ||c - K'y - lambda||_2
  double primal_objective_raw = 0.0;  // c'x
  double dual_objective_raw = 0.0;    // q'y + l'lambda+ - u'lambda-

  double gap() const { return dual_objective_raw - primal_objective_raw; }

  double weighted(double omega) const {
    const double pr = omega * primal_residual_norm;
    const double dr = dual_residual_norm / omega;
    const double g = gap();
    return std::sqrt(pr * pr + dr * dr + g * g);
  }
};

struct PointEvaluation {
  KktResiduals residuals;
  ReducedCosts reduced;
};

inline PointEvaluation evaluate_point(const GeneralFormLp& lp,
                                      const PrimalDualPoint& z) {
  PointEvaluation ev;
  const PrimalResidual pr = primal_residual(lp, z.primal);
  ev.residuals.primal_residual_norm = primal_residual_norm(pr);
  const std::vector<double> slack = dual_slack(lp, z.dual);
  ev.reduced = reduced_costs_from_slack(slack, lp.lower, lp.upper);
  std::vector<double> dres = slack;
  axpy(-1.0, ev.reduced.lambda, dres);
  ev.residuals.dual_residual_norm = norm2(dres);
  ev.residuals.primal_objective_raw = dot(lp.objective, z.primal);
  ev.residuals.dual_objective_raw =
      dual_objective(lp, z.dual, ev.reduced) - lp.objective_constant;
  return ev;
}

inline double kkt_error_omega(const GeneralFormLp& lp, const PrimalDualPoint& z,
                              double omega) {
  return evaluate_point(lp, z).residuals.weighted(omega);
}

/// ||q||_2 and ||c||_2 of the original instance, computed once per solve.
struct TerminationNorms {
  double rhs_norm = 0.0;       // ||q||_2 = ||(h; b)||_2
  double objective_norm = 0.0; // ||c||_2
};

inline TerminationNorms termination_norms(const GeneralFormLp& lp) {
  TerminationNorms n;
  n.rhs_norm = std::sqrt(squared_norm(lp.inequality_rhs) +
                         squared_norm(lp.equality_rhs));
  n.objective_norm = norm2(lp.objective);
  return n;
}

struct ConvergenceInfo {
  double primal_objective = 0.0;  // c'x + constant
  double dual_objective = 0.0;    // q'y + l'lambda+ - u'lambda- + constant
  double primal_objective_raw = 0.0;
  double dual_objective_raw = 0.0;
  double gap_abs = 0.0;
  double primal_residual_norm = 0.0;
  double dual_residual_norm = 0.0;
  double relative_gap = 0.0;             // gap_abs / (1 + |raw d| + |raw p|)
  double relative_primal_residual = 0.0; // primal res / (1 + ||q||)
  double relative_dual_residual = 0.0;   // dual res / (1 + ||c||)
  double kkt_omega = 0.0;
};

inline ConvergenceInfo make_convergence_info(const GeneralFormLp& lp,
                                             const KktResiduals& r,
                                             const TerminationNorms& norms,
                                             double omega) {
  ConvergenceInfo info;
  info.primal_objective_raw = r.primal_objective_raw;
  info.dual_objective_raw = r.dual_objective_raw;
  info.primal_objective = r.primal_objective_raw + lp.objective_constant;
  info.dual_objective = r.dual_objective_raw + lp.objective_constant;
  info.gap_abs = std::abs(r.gap());
  info.primal_residual_norm = r.primal_residual_norm;
  info.dual_residual_norm = r.dual_residual_norm;
  info.relative_gap = info.gap_abs / (1.0 + std::abs(r.dual_objective_raw) +
                                      std::abs(r.primal_objective_raw));
  info.relative_primal_residual = r.primal_residual_norm / (1.0 + norms.rhs_norm);
  info.relative_dual_residual = r.dual_residual_norm / (1.0 + norms.objective_norm);
  info.kkt_omega = r.weighted(omega);
  return info;
}

/// The three relative-KKT inequalities, evaluated multiplicatively so the
/// boundary case lhs == eps * rhs terminates (<= is inclusive):
///   |gap|  <= eps (1 + |q'y + l'lam+ - u'lam-| + |c'x|)
///   ||primal residual||_2 <= eps (1 + ||q||_2)
///   ||dual residual||_2   <= eps (1 + ||c||_2)
inline bool termination_criteria_met(const KktResiduals& r, double eps,
                                     const TerminationNorms& norms) {
  // Overflowed residuals or objectives can never certify optimality, even
  // against an overflowed right-hand side.
  if (!std::isfinite(r.primal_residual_norm) ||
      !std::isfinite(r.dual_residual_norm) ||
      !std::isfinite(r.primal_objective_raw) ||
      !std::isfinite(r.dual_objective_raw)) {
    return false;
  }
  const bool gap_ok =
      std::abs(r.gap()) <= eps * (1.0 + std::abs(r.dual_objective_raw) +
                                  std::abs(r.primal_objective_raw));
  const bool primal_ok =
      r.primal_residual_norm <= eps * (1.0 + norms.rhs_norm);
  const bool dual_ok =
      r.dual_residual_norm <= eps * (1.0 + norms.objective_norm);
  return gap_ok && primal_ok && dual_ok;
}

struct TerminationCheck {
  bool terminated = false;
  ConvergenceInfo info;
};

/// Checks the original-instance criteria at an unscaled point; `reduced`
/// must carry the lambda built from that point's dual vector.
inline TerminationCheck check_termination(const GeneralFormLp& lp,
                                          const PrimalDualPoint& z_unscaled,
                                          const ReducedCosts& reduced,
                                          double eps,
                                          const TerminationNorms& norms,
                                          double omega = 1.0) {
  PointEvaluation ev;
  const PrimalResidual pr = primal_residual(lp, z_unscaled.primal);
  ev.residuals.primal_residual_norm = primal_residual_norm(pr);
  std::vector<double> dres = dual_residual(lp, z_unscaled.dual, reduced);
  ev.residuals.dual_residual_norm = norm2(dres);
  ev.residuals.primal_objective_raw = dot(lp.objective, z_unscaled.primal);
  ev.residuals.dual_objective_raw =
      dual_objective(lp, z_unscaled.dual, reduced) - lp.objective_constant;
  TerminationCheck out;
  out.terminated = termination_criteria_met(ev.residuals, eps, norms);
  out.info = make_convergence_info(lp, ev.residuals, norms, omega);
  return out;
}

// ---------------------------------------------------------------------------
// Restart scheme
// ---------------------------------------------------------------------------

/// Greedy candidate: the current iterate when it has strictly smaller
/// weighted KKT error than the average, otherwise the average.
inline PrimalDualPoint restart_candidate(const PrimalDualPoint& current,
                                         const PrimalDualPoint& average,
                                         double omega, const GeneralFormLp& lp) {
  const double kkt_current = kkt_error_omega(lp, current, omega);
  const double kkt_average = kkt_error_omega(lp, average, omega);
  return kkt_current < kkt_average ? current : average;
}

/// Restart test, returning the first criterion that fires:
///   (i)   sufficient decay:  kkt_now <= beta_sufficient * kkt_epoch_start
///   (ii)  necessary decay and no local progress:
///         kkt_now <= beta_necessary * kkt_epoch_start and kkt_now > kkt_prev
///   (iii) long inner loop: t >= beta_artificial * k
inline RestartCriterion should_restart(double kkt_candidate_now,
                                       double kkt_candidate_prev,
                                       double kkt_epoch_start, std::int64_t t,
                                       std::int64_t k,
                                       const SolverParams& params) {
  if (kkt_candidate_now <= params.beta_sufficient * kkt_epoch_start) {
    return RestartCriterion::kSufficientDecay;
  }
  if (kkt_candidate_now <= params.beta_necessary * kkt_epoch_start &&
      kkt_candidate_now > kkt_candidate_prev) {
    return RestartCriterion::kNecessaryDecay;
  }
  if (static_cast<double>(t) >= params.beta_artificial * static_cast<double>(k)) {
    return RestartCriterion::kLongInnerLoop;
  }
  return RestartCriterion::kNone;
}

// ---------------------------------------------------------------------------
// Primal weight
// ---------------------------------------------------------------------------

/// ||c||/||q|| when both norms exceed eps_zero, else 1.
inline double initialize_primal_weight(std::span<const double> objective,
                                       std::span<const double> rhs,
                                       double eps_zero) {
  const double c_norm = norm2(objective);
  const double q_norm = norm2(rhs);
  if (c_norm > eps_zero && q_norm > eps_zero) return c_norm / q_norm;
  return 1.0;
}

/// Log-space smoothing toward the displacement ratio:
///   omega = exp(theta log(dy/dx) + (1-theta) log omega_prev)
/// when both displacements exceed eps_zero, else omega_prev.
inline double update_primal_weight(const PrimalDualPoint& epoch_start_new,
                                   const PrimalDualPoint& epoch_start_prev,
                                   double omega_prev, double theta,
                                   double eps_zero) {
  double dx_sq = 0.0, dy_sq = 0.0;
  for (std::size_t i = 0; i < epoch_start_new.primal.size(); ++i) {
    const double d = epoch_start_new.primal[i] - epoch_start_prev.primal[i];
    dx_sq += d * d;
  }
  for (std::size_t i = 0; i < epoch_start_new.dual.size(); ++i) {
    const double d = epoch_start_new.dual[i] - epoch_start_prev.dual[i];
    dy_sq += d * d;
  }
  const double dx = std::sqrt(dx_sq);
  const double dy = std::sqrt(dy_sq);
  if (dx > eps_zero && dy > eps_zero) {
    return std::exp(theta * std::log(dy / dx) +
                    (1.0 - theta) * std::log(omega_prev));
  }
  return omega_prev;
}

// ---------------------------------------------------------------------------
// PDHG steps
// ---------------------------------------------------------------------------

/// One plain PDHG step:
///   x' = proj_X(x - tau (c - K'y))
///   y' = proj_Y(y + sigma (q - K(2x' - x)))
/// Costs one product with K and one with K'.
inline PrimalDualPoint pdhg_raw_step(const PrimalDualPoint& z, double tau,
                                     double sigma, const SaddleProblem& problem) {
  const index_t n = problem.num_variables();
  PrimalDualPoint next = z;
  std::vector<double> kty(static_cast<std::size_t>(n));
  spmv_transpose(problem.constraint_matrix, z.dual, kty);
  for (index_t i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    next.primal[s] -= tau * (problem.objective[s] - kty[s]);
  }
  clamp_to_box(next.primal, problem.lower, problem.upper);

  std::vector<double> extrapolated(static_cast<std::size_t>(n));
  for (index_t i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    extrapolated[s] = 2.0 * next.primal[s] - z.primal[s];
  }
  std::vector<double> k_ext = spmv(problem.constraint_matrix, extrapolated);
  for (std::size_t i = 0; i < next.dual.size(); ++i) {
    next.dual[i] += sigma * (problem.rhs[i] - k_ext[i]);
  }
  project_dual_in_place(next.dual, problem.num_inequalities);
  return next;
}

struct AdaptiveStepResult {
  PrimalDualPoint next;
  double eta_accepted = 0.0;
  double eta_next = 0.0;
  double eta_bar = 0.0;      // step-size limit at the accepted trial; +inf if
                             // the interaction term was <= 0
  double movement_sq = 0.0;  // ||z' - z||_omega^2 at the accepted trial
  double interaction = 0.0;  // (y' - y)' K (x' - x) at the accepted trial
  int trials = 0;
  bool numerical_failure = false;
  // product caches for the accepted iterate
  std::vector<double> k_x_next;
  std::vector<double> kt_y_next;
};

namespace detail {

/// Adaptive step-size trial loop. `k_x` and `kt_y` are K x and K' y for the
/// incoming iterate; the accepted trial's products come back in the result,
/// so a full step costs one product with K per trial plus one with K' on
/// accept.
inline AdaptiveStepResult adaptive_step_cached(
    const PrimalDualPoint& z, const std::vector<double>& k_x,
    const std::vector<double>& kt_y, double omega, double eta_hat,
    std::int64_t k, const SaddleProblem& problem, const SolverParams& params) {
  constexpr int kMaxTrials = 80;
  const index_t n = problem.num_variables();
  const index_t m = problem.num_constraints();
  const double kp1 = static_cast<double>(k) + 1.0;
  const double reduction = 1.0 - std::pow(kp1, -params.step_reduction_exponent);
  const double growth = 1.0 + std::pow(kp1, -params.step_growth_exponent);

  AdaptiveStepResult res;
  double eta = eta_hat;
  std::vector<double> x_next(static_cast<std::size_t>(n));
  std::vector<double> extrapolated(static_cast<std::size_t>(n));
  std::vector<double> k_x_next(static_cast<std::size_t>(m));
  std::vector<double> y_next(static_cast<std::size_t>(m));

  for (int trial = 0; trial < kMaxTrials; ++trial) {
    res.trials = trial + 1;
    const double tau = eta / omega;
    const double sigma = eta * omega;

    for (index_t i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      x_next[s] = z.primal[s] - tau * (problem.objective[s] - kt_y[s]);
    }
    clamp_to_box(x_next, problem.lower, problem.upper);
    spmv(problem.constraint_matrix, x_next, k_x_next);
    for (index_t i = 0; i < m; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      y_next[s] = z.dual[s] +
                  sigma * (problem.rhs[s] - 2.0 * k_x_next[s] + k_x[s]);
    }
    project_dual_in_place(y_next, problem.num_inequalities);

    if (!all_finite(x_next) || !all_finite(y_next)) {
      res.numerical_failure = true;
      return res;
    }

    double dx_sq = 0.0;
    for (index_t i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      const double d = x_next[s] - z.primal[s];
      dx_sq += d * d;
    }
    double dy_sq = 0.0;
    double interaction = 0.0;  // (y'-y)' K (x'-x) = (y'-y)'(Kx' - Kx)
    for (index_t i = 0; i < m; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      const double d = y_next[s] - z.dual[s];
      dy_sq += d * d;
      interaction += d * (k_x_next[s] - k_x[s]);
    }
    const double movement_sq = omega * dx_sq + dy_sq / omega;
    // The limit uses |interaction|: a negative interaction satisfies the
    // line-search inequality trivially but must still bound the next
    // step-size, or eta grows without bound and the iterates diverge.
    // A zero interaction (e.g. K = 0) gives eta_bar = +inf: immediate accept.
    const double interaction_abs = std::abs(interaction);
    const double eta_bar =
        interaction_abs > 0.0 ? movement_sq / (2.0 * interaction_abs) : kInf;
    const double eta_next = std::min(reduction * eta_bar, growth * eta);

    if (eta <= eta_bar) {
      res.next.primal = x_next;
      res.next.dual = y_next;
      res.eta_accepted = eta;
      res.eta_next = eta_next;
      res.eta_bar = eta_bar;
      res.movement_sq = movement_sq;
      res.interaction = interaction;
      res.k_x_next = k_x_next;
      res.kt_y_next.resize(static_cast<std::size_t>(n));
      spmv_transpose(problem.constraint_matrix, res.next.dual, res.kt_y_next);
      return res;
    }
    eta = eta_next;
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      res.numerical_failure = true;
      return res;
    }
  }
  res.numerical_failure = true;
  return res;
}

}  // namespace detail

/// Adaptive-step entry point for callers without product caches.
inline AdaptiveStepResult adaptive_step(const PrimalDualPoint& z, double omega,
                                        double eta_hat, std::int64_t k,
                                        const SaddleProblem& problem,
                                        const SolverParams& params = {}) {
  const std::vector<double> k_x = spmv(problem.constraint_matrix, z.primal);
  const std::vector<double> kt_y =
      spmv_transpose(problem.constraint_matrix, z.dual);
  return detail::adaptive_step_cached(z, k_x, kt_y, omega, eta_hat, k, problem,
                                      params);
}

// ---------------------------------------------------------------------------
// Infeasibility detection
// ---------------------------------------------------------------------------

struct InfeasibilityCertificate {
  SolveStatus status = SolveStatus::kPrimalInfeasible;
  std::vector<double> primal_ray;           // dual-infeasibility witness
  std::vector<double> dual_ray;             // primal-infeasibility witness
  ReducedCosts dual_ray_reduced_costs;      // lambda~ paired with dual_ray
};

namespace detail {

/// q'y + l'lambda+ - u'lambda- for a homogeneous ray (no objective constant).
inline double ray_dual_objective(const GeneralFormLp& lp,
                                 std::span<const double> y,
                                 const ReducedCosts& rc) {
  return dual_objective(lp, y, rc) - lp.objective_constant;
}

inline std::optional<InfeasibilityCertificate> certificate_from_ray(
    const GeneralFormLp& lp, const PrimalDualPoint& ray, double eps_infeasible,
    double eps_zero) {
  // Primal infeasibility from the dual part. The first m1 components are
  // clamped at zero so the returned ray lies in the dual cone and the
  // Farkas conditions can be rechecked exactly.
  std::vector<double> y = ray.dual;
  project_dual_in_place(y, lp.num_inequalities());
  const double y_norm = norm2(y);
  if (y_norm > eps_zero) {
    std::vector<double> kty(static_cast<std::size_t>(lp.num_variables()));
    {
      std::vector<double> tmp(kty.size());
      spmv_transpose(lp.inequality_matrix,
                     std::span<const double>(y).subspan(
                         0, static_cast<std::size_t>(lp.num_inequalities())),
                     kty);
      spmv_transpose(lp.equality_matrix,
                     std::span<const double>(y).subspan(
                         static_cast<std::size_t>(lp.num_inequalities())),
                     tmp);
      axpy(1.0, tmp, kty);
    }
    std::vector<double> neg_kty(kty.size());
    for (std::size_t i = 0; i < kty.size(); ++i) neg_kty[i] = -kty[i];
    const ReducedCosts lam =
        reduced_costs_from_slack(neg_kty, lp.lower, lp.upper);
    std::vector<double> violation = kty;
    axpy(1.0, lam.lambda, violation);  // K'y + lambda, 0 for an exact ray
    const double residual = norm2(violation);
    const double objective = ray_dual_objective(lp, y, lam);
    if (residual <= eps_infeasible * y_norm &&
        objective > eps_infeasible * y_norm) {
      InfeasibilityCertificate cert;
      cert.status = SolveStatus::kPrimalInfeasible;
      cert.dual_ray = std::move(y);
      cert.dual_ray_reduced_costs = lam;
      return cert;
    }
  }

  // Dual infeasibility from the primal part: an approximate recession ray
  // with negative objective slope.
  const std::vector<double>& x = ray.primal;
  const double x_norm = norm2(x);
  if (x_norm > eps_zero) {
    const double tol = eps_infeasible * x_norm;
    bool ok = norm2(spmv(lp.equality_matrix, x)) <= tol;
    if (ok) {
      const std::vector<double> gx = spmv(lp.inequality_matrix, x);
      for (double v : gx) {
        if (v < -tol) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      for (std::size_t i = 0; i < x.size() && ok; ++i) {
        if (lp.lower[i] > -kInf && x[i] < -tol) ok = false;
        if (lp.upper[i] < kInf && x[i] > tol) ok = false;
      }
    }
    if (ok && dot(lp.objective, x) < -tol) {
      InfeasibilityCertificate cert;
      cert.status = SolveStatus::kDualInfeasible;
      cert.primal_ray = x;
      return cert;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Tests the two candidate rays (iterate difference, then normalized
/// iterate) for approximate Farkas certificates. For each ray, primal
/// infeasibility is tested before dual infeasibility.
inline std::optional<InfeasibilityCertificate> check_infeasibility(
    const PrimalDualPoint& delta_ray, const PrimalDualPoint& normalized_ray,
    const GeneralFormLp& lp, double eps_infeasible, double eps_zero = 1e-10) {
  if (auto cert = detail::certificate_from_ray(lp, delta_ray, eps_infeasible,
                                               eps_zero)) {
    return cert;
  }
  return detail::certificate_from_ray(lp, normalized_ray, eps_infeasible,
                                      eps_zero);
}

// ---------------------------------------------------------------------------
// Solve loop
// ---------------------------------------------------------------------------

struct StepLogEntry {
  std::int64_t step_counter = 0;  // the k passed to the adaptive step
  double omega = 0.0;
  double eta_accepted = 0.0;
  double eta_bar = 0.0;
  double eta_next = 0.0;
  double movement_sq = 0.0;
  double interaction = 0.0;
};

struct RestartEvent {
  std::int64_t total_iterations = 0;  // k at the restart
  std::int64_t epoch_length = 0;      // t at the restart
  RestartCriterion criterion = RestartCriterion::kNone;
  bool candidate_is_average = false;
  double kkt_candidate = 0.0;
  double kkt_previous_candidate = 0.0;
  double kkt_epoch_start = 0.0;
  double omega_before = 0.0;
  double omega_after = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kNumericalError;
  PrimalDualPoint point;   // unscaled; for infeasible exits the certificate ray
  ReducedCosts reduced;    // lambda at the returned point (or the ray's lambda)
  ConvergenceInfo info;
  std::int64_t iterations = 0;
  std::int64_t restarts = 0;
  double solve_seconds = 0.0;
  std::optional<InfeasibilityCertificate> certificate;
  std::vector<StepLogEntry> step_log;
  std::vector<RestartEvent> restart_log;
  std::string message;
};

namespace detail {

class SolveLoop {
 public:
  SolveLoop(const GeneralFormLp& lp, const SolverParams& params)
      : original_(lp),
        params_(params),
        norms_(termination_norms(lp)),
        scaling_(make_scaling(vstack(lp.inequality_matrix, lp.equality_matrix),
                              params.scaling, params.ruiz_iterations,
                              params.pock_chambolle_alpha)),
        scaled_lp_(apply_scaling(lp, scaling_)),
        saddle_(to_saddle(scaled_lp_)),
        average_primal_(static_cast<std::size_t>(lp.num_variables())),
        average_dual_(static_cast<std::size_t>(lp.num_constraints())) {}

  SolveResult run();

 private:
  struct Evaluation {
    PrimalDualPoint candidate_scaled;
    PrimalDualPoint candidate_unscaled;
    PointEvaluation candidate_eval;
    bool candidate_is_average = false;
    double kkt_candidate = 0.0;
    bool terminated = false;
    // The non-candidate point, kept for the secondary termination check.
    PrimalDualPoint other_unscaled;
    PointEvaluation other_eval;
    bool other_terminated = false;
  };

  Evaluation evaluate_candidates() const;
  SolveResult finish(SolveStatus status, const PrimalDualPoint& point_unscaled,
                     const PointEvaluation& eval, std::string message = {});
  PrimalDualPoint average_point() const {
    return {average_primal_.value(), average_dual_.value()};
  }
  double elapsed_seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_time_)
        .count();
  }

  const GeneralFormLp& original_;
  SolverParams params_;
  TerminationNorms norms_;
  DiagonalScaling scaling_;
  GeneralFormLp scaled_lp_;
  SaddleProblem saddle_;

  // Iterate state (scaled space).
  PrimalDualPoint current_;
  PrimalDualPoint epoch_start_;
  WeightedAverage average_primal_;
  WeightedAverage average_dual_;
  std::vector<double> k_x_;   // K x for current_
  std::vector<double> kt_y_;  // K' y for current_
  double eta_ = 0.0;
  double eta_hat_ = 0.0;
  double omega_ = 1.0;
  std::int64_t outer_count_ = 0;  // n
  std::int64_t inner_count_ = 0;  // t
  std::int64_t total_count_ = 0;  // k
  double kkt_epoch_start_ = 0.0;
  double kkt_last_candidate_ = 0.0;
  PrimalDualPoint last_step_delta_;

  std::chrono::steady_clock::time_point start_time_;
  std::vector<StepLogEntry> step_log_;
  std::vector<RestartEvent> restart_log_;
};

inline SolveLoop::Evaluation SolveLoop::evaluate_candidates() const {
  Evaluation ev;
  // An empty epoch (limit hit right after a restart) has no average yet;
  // the epoch start stands in for it.
  const PrimalDualPoint avg =
      average_primal_.empty() ? current_ : average_point();
  const PrimalDualPoint current_unscaled = unscale_point(current_, scaling_);
  const PrimalDualPoint avg_unscaled = unscale_point(avg, scaling_);
  const PointEvaluation eval_current = evaluate_point(original_, current_unscaled);
  const PointEvaluation eval_avg = evaluate_point(original_, avg_unscaled);
  const double kkt_current = eval_current.residuals.weighted(omega_);
  const double kkt_avg = eval_avg.residuals.weighted(omega_);

  ev.candidate_is_average = !(kkt_current < kkt_avg);
  if (ev.candidate_is_average) {
    ev.candidate_scaled = avg;
    ev.candidate_unscaled = avg_unscaled;
    ev.candidate_eval = eval_avg;
    ev.kkt_candidate = kkt_avg;
    ev.other_unscaled = current_unscaled;
    ev.other_eval = eval_current;
  } else {
    ev.candidate_scaled = current_;
    ev.candidate_unscaled = current_unscaled;
    ev.candidate_eval = eval_current;
    ev.kkt_candidate = kkt_current;
    ev.other_unscaled = avg_unscaled;
    ev.other_eval = eval_avg;
  }
  ev.terminated = termination_criteria_met(ev.candidate_eval.residuals,
                                           params_.eps_optimal, norms_);
  ev.other_terminated = termination_criteria_met(ev.other_eval.residuals,
                                                 params_.eps_optimal, norms_);
  return ev;
}

inline SolveResult SolveLoop::finish(SolveStatus status,
                                     const PrimalDualPoint& point_unscaled,
                                     const PointEvaluation& eval,
                                     std::string message) {
  SolveResult result;
  result.status = status;
  result.point = point_unscaled;
  result.reduced = eval.reduced;
  result.info = make_convergence_info(original_, eval.residuals, norms_, omega_);
  result.iterations = total_count_;
  result.restarts = outer_count_;
  result.solve_seconds = elapsed_seconds();
  result.step_log = std::move(step_log_);
  result.restart_log = std::move(restart_log_);
  result.message = std::move(message);
  return result;
}

inline SolveResult SolveLoop::run() {
  start_time_ = std::chrono::steady_clock::now();
  const index_t n = saddle_.num_variables();
  const index_t m = saddle_.num_constraints();

  current_ = PrimalDualPoint::zeros(n, m);
  epoch_start_ = current_;
  k_x_.assign(static_cast<std::size_t>(m), 0.0);
  kt_y_.assign(static_cast<std::size_t>(n), 0.0);
  spmv(saddle_.constraint_matrix, current_.primal, k_x_);
  spmv_transpose(saddle_.constraint_matrix, current_.dual, kt_y_);

  const double max_abs = max_abs_entry(saddle_.constraint_matrix);
  eta_hat_ = max_abs > 0.0 ? 1.0 / max_abs : 1.0;
  eta_ = eta_hat_;
  omega_ = std::clamp(
      initialize_primal_weight(saddle_.objective, saddle_.rhs, params_.eps_zero),
      params_.omega_min, params_.omega_max);

  average_primal_.reset();
  average_dual_.reset();
  last_step_delta_ = PrimalDualPoint::zeros(n, m);

  // Initial evaluation: the all-zero start may already be optimal, and the
  // epoch-start KKT seeds the restart criteria.
  {
    const PrimalDualPoint z0_unscaled = unscale_point(current_, scaling_);
    const PointEvaluation ev0 = evaluate_point(original_, z0_unscaled);
    kkt_epoch_start_ = ev0.residuals.weighted(omega_);
    kkt_last_candidate_ = kkt_epoch_start_;
    if (termination_criteria_met(ev0.residuals, params_.eps_optimal, norms_)) {
      return finish(SolveStatus::kOptimal, z0_unscaled, ev0);
    }
  }

  while (true) {
    if (total_count_ >= params_.iteration_limit) {
      Evaluation ev = evaluate_candidates();
      return finish(SolveStatus::kIterationLimit, ev.candidate_unscaled,
                    ev.candidate_eval);
    }
    if (elapsed_seconds() >= params_.time_limit_seconds) {
      Evaluation ev = evaluate_candidates();
      return finish(SolveStatus::kTimeLimit, ev.candidate_unscaled,
                    ev.candidate_eval);
    }

    // The step counter passed down starts at 1 so the reduction factor
    // 1 - (k+1)^-0.3 never proposes a zero step.
    AdaptiveStepResult step = detail::adaptive_step_cached(
        current_, k_x_, kt_y_, omega_, eta_hat_, total_count_ + 1, saddle_,
        params_);
    if (step.numerical_failure) {
      Evaluation ev = evaluate_candidates();
      return finish(SolveStatus::kNumericalError, ev.candidate_unscaled,
                    ev.candidate_eval,
                    "non-finite iterate in adaptive step at iteration " +
                        std::to_string(total_count_));
    }
    if (params_.record_step_log) {
      step_log_.push_back({total_count_ + 1, omega_, step.eta_accepted,
                           step.eta_bar, step.eta_next, step.movement_sq,
                           step.interaction});
    }

    for (std::size_t i = 0; i < last_step_delta_.primal.size(); ++i) {
      last_step_delta_.primal[i] = step.next.primal[i] - current_.primal[i];
    }
    for (std::size_t i = 0; i < last_step_delta_.dual.size(); ++i) {
      last_step_delta_.dual[i] = step.next.dual[i] - current_.dual[i];
    }

    current_ = std::move(step.next);
    k_x_ = std::move(step.k_x_next);
    kt_y_ = std::move(step.kt_y_next);
    eta_ = step.eta_accepted;
    eta_hat_ = step.eta_next;
    total_count_ += 1;
    inner_count_ += 1;
    average_primal_.add(current_.primal, eta_);
    average_dual_.add(current_.dual, eta_);

    if (inner_count_ % params_.evaluation_frequency != 0) continue;

    // ---- evaluation block: termination, certificates, restart ----
    Evaluation ev = evaluate_candidates();
    if (ev.terminated) {
      return finish(SolveStatus::kOptimal, ev.candidate_unscaled,
                    ev.candidate_eval);
    }
    if (ev.other_terminated) {
      return finish(SolveStatus::kOptimal, ev.other_unscaled, ev.other_eval);
    }

    {
      PrimalDualPoint normalized = current_;
      const double inv_t = 1.0 / static_cast<double>(inner_count_);
      for (std::size_t i = 0; i < normalized.primal.size(); ++i) {
        normalized.primal[i] =
            inv_t * (normalized.primal[i] - epoch_start_.primal[i]);
      }
      for (std::size_t i = 0; i < normalized.dual.size(); ++i) {
        normalized.dual[i] = inv_t * (normalized.dual[i] - epoch_start_.dual[i]);
      }
      const auto cert = check_infeasibility(
          unscale_point(last_step_delta_, scaling_),
          unscale_point(normalized, scaling_), original_,
          params_.eps_infeasible, params_.eps_zero);
      if (cert) {
        PrimalDualPoint ray_point;
        ReducedCosts ray_reduced;
        if (cert->status == SolveStatus::kPrimalInfeasible) {
          ray_point.primal.assign(static_cast<std::size_t>(n), 0.0);
          ray_point.dual = cert->dual_ray;
          ray_reduced = cert->dual_ray_reduced_costs;
        } else {
          ray_point.primal = cert->primal_ray;
          ray_point.dual.assign(static_cast<std::size_t>(m), 0.0);
          ray_reduced = reduced_costs(original_, ray_point.dual);
        }
        SolveResult result =
            finish(cert->status, ray_point, ev.candidate_eval);
        result.reduced = ray_reduced;
        result.certificate = cert;
        return result;
      }
    }

    const double kkt_previous_candidate = kkt_last_candidate_;
    const RestartCriterion criterion =
        should_restart(ev.kkt_candidate, kkt_previous_candidate,
                       kkt_epoch_start_, inner_count_, total_count_, params_);
    kkt_last_candidate_ = ev.kkt_candidate;
    if (criterion == RestartCriterion::kNone) continue;

    assert(criterion != RestartCriterion::kSufficientDecay ||
           ev.kkt_candidate <= params_.beta_sufficient * kkt_epoch_start_);

    RestartEvent event;
    event.total_iterations = total_count_;
    event.epoch_length = inner_count_;
    event.criterion = criterion;
    event.candidate_is_average = ev.candidate_is_average;
    event.kkt_candidate = ev.kkt_candidate;
    event.kkt_previous_candidate = kkt_previous_candidate;
    event.kkt_epoch_start = kkt_epoch_start_;
    event.omega_before = omega_;

    const PrimalDualPoint previous_epoch_start = epoch_start_;
    epoch_start_ = ev.candidate_scaled;
    current_ = ev.candidate_scaled;
    spmv(saddle_.constraint_matrix, current_.primal, k_x_);
    spmv_transpose(saddle_.constraint_matrix, current_.dual, kt_y_);
    outer_count_ += 1;
    inner_count_ = 0;
    average_primal_.reset();
    average_dual_.reset();

    omega_ = std::clamp(
        update_primal_weight(epoch_start_, previous_epoch_start, omega_,
                             params_.theta_smoothing, params_.eps_zero),
        params_.omega_min, params_.omega_max);
    event.omega_after = omega_;
    restart_log_.push_back(event);

    // Epoch-start KKT re-weighted with the fresh omega; the residuals are
    // those of the candidate we just adopted.
    kkt_epoch_start_ = ev.candidate_eval.residuals.weighted(omega_);
    kkt_last_candidate_ = kkt_epoch_start_;
  }
}

}  // namespace detail

/// Full pipeline: precondition, run restarted PDHG from the all-zero point,
/// and return the unscaled exit point with its convergence information.
inline SolveResult solve(const GeneralFormLp& lp, const SolverParams& params) {
  lp.validate();
  params.validate();
  detail::SolveLoop loop(lp, params);
  return loop.run();
}

}  // namespace pdhglp
