// Command-line front end: solve one instance, benchmark a directory, or run
// the fixed-step restart diagnostics on a standard-form conversion.
//
// Exit codes: 0 optimal / success, 1 usage or I/O or parse error,
// 2 primal infeasible, 3 dual infeasible, 4 iteration limit, 5 time limit,
// 6 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "pdhglp/bench.hpp"
#include "pdhglp/mps_io.hpp"
#include "pdhglp/solution_io.hpp"
#include "pdhglp/solver.hpp"
#include "pdhglp/standard_form.hpp"
#include "standard_form_conversion.hpp"

namespace {

using namespace pdhglp;

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return 0;
    case SolveStatus::kPrimalInfeasible: return 2;
    case SolveStatus::kDualInfeasible: return 3;
    case SolveStatus::kIterationLimit: return 4;
    case SolveStatus::kTimeLimit: return 5;
    case SolveStatus::kNumericalError: return 6;
  }
  return 1;
}

ScalingMode scaling_from_string(const std::string& s) {
  if (s == "none") return ScalingMode::kNone;
  if (s == "ruiz") return ScalingMode::kRuiz;
  if (s == "ruiz+pc") return ScalingMode::kRuizPockChambolle;
  throw CLI::ValidationError("--scaling", "expected none|ruiz|ruiz+pc");
}

const char* scaling_to_string(ScalingMode m) {
  switch (m) {
    case ScalingMode::kNone: return "none";
    case ScalingMode::kRuiz: return "ruiz";
    case ScalingMode::kRuizPockChambolle: return "ruiz+pc";
  }
  return "?";
}

void print_config(const SolverParams& p, double time_limit) {
  std::printf("eps_optimal %.17g\n", p.eps_optimal);
  std::printf("eps_infeasible %.17g\n", p.eps_infeasible);
  std::printf("time_limit_seconds %.17g\n", time_limit);
  std::printf("iteration_limit %lld\n", static_cast<long long>(p.iteration_limit));
  std::printf("beta_sufficient %.17g\n", p.beta_sufficient);
  std::printf("beta_necessary %.17g\n", p.beta_necessary);
  std::printf("beta_artificial %.17g\n", p.beta_artificial);
  std::printf("theta_smoothing %.17g\n", p.theta_smoothing);
  std::printf("eps_zero %.17g\n", p.eps_zero);
  std::printf("evaluation_frequency %lld\n",
              static_cast<long long>(p.evaluation_frequency));
  std::printf("scaling %s\n", scaling_to_string(p.scaling));
  std::printf("ruiz_iterations %d\n", p.ruiz_iterations);
  std::printf("pock_chambolle_alpha %.17g\n", p.pock_chambolle_alpha);
  std::printf("step_reduction_exponent %.17g\n", p.step_reduction_exponent);
  std::printf("step_growth_exponent %.17g\n", p.step_growth_exponent);
  std::printf("omega_min %.17g\n", p.omega_min);
  std::printf("omega_max %.17g\n", p.omega_max);
}

void print_summary(const SolveResult& r) {
  std::printf("status: %s\n", to_string(r.status));
  std::printf("iterations: %lld  restarts: %lld  seconds: %.3f\n",
              static_cast<long long>(r.iterations),
              static_cast<long long>(r.restarts), r.solve_seconds);
  std::printf("primal objective: %.12g\n", r.info.primal_objective);
  std::printf("dual objective:   %.12g\n", r.info.dual_objective);
  std::printf("|gap| <= eps(1+|d|+|p|):   %.3e (relative %.3e)\n",
              r.info.gap_abs, r.info.relative_gap);
  std::printf("primal residual / (1+|q|): %.3e (relative %.3e)\n",
              r.info.primal_residual_norm, r.info.relative_primal_residual);
  std::printf("dual residual / (1+|c|):   %.3e (relative %.3e)\n",
              r.info.dual_residual_norm, r.info.relative_dual_residual);
  if (!r.message.empty()) std::printf("note: %s\n", r.message.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order LP solver (restarted PDHG with KKT restarts)"};
  app.require_subcommand(0, 1);

  SolverParams params;
  double time_limit = 3600.0;
  std::string scaling = "ruiz+pc";
  bool eager_restart = false;
  bool show_config = false;
  app.add_flag("--show-config", show_config,
               "print the effective solver configuration and exit");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--eps", params.eps_optimal,
                    "relative KKT termination tolerance")
        ->envname("PDHGLP_EPS");
    cmd->add_option("--eps-infeasible", params.eps_infeasible,
                    "infeasibility certificate tolerance")
        ->envname("PDHGLP_EPS_INFEASIBLE");
    cmd->add_option("--time-limit", time_limit, "wall-clock limit in seconds")
        ->envname("PDHGLP_TIME_LIMIT");
    cmd->add_option("--iteration-limit", params.iteration_limit,
                    "maximum PDHG iterations")
        ->envname("PDHGLP_ITERATION_LIMIT");
    cmd->add_option("--scaling", scaling, "preconditioning: none|ruiz|ruiz+pc")
        ->envname("PDHGLP_SCALING");
    cmd->add_flag("--eager-restart", eager_restart,
                  "evaluate restart candidates every iteration");
  };

  // solve
  std::string instance_path, out_path;
  bool summary = false, vectors = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve one MPS instance");
  solve_cmd->add_option("instance", instance_path, "MPS file (.mps or .mps.gz)")
      ->required();
  add_common(solve_cmd);
  solve_cmd->add_option("--out", out_path, "write a solution file");
  solve_cmd->add_flag("--summary", summary, "print the termination criteria values");
  solve_cmd->add_flag("--vectors", vectors, "include solution vectors in --out");

  // bench
  std::string bench_dir, report_path;
  int jobs = 1;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "solve every instance in a directory");
  bench_cmd->add_option("dir", bench_dir, "directory of .mps/.mps.gz files")
      ->required();
  add_common(bench_cmd);
  bench_cmd->add_option("--report", report_path, "write the tab-separated report");
  bench_cmd->add_option("--jobs", jobs, "parallel solve slots")
      ->envname("PDHGLP_JOBS");

  // theory-check
  std::string theory_path;
  double step_scale = 0.9;
  double beta = 0.5;
  std::int64_t theory_iterations = 200000;
  CLI::App* theory_cmd = app.add_subcommand(
      "theory-check",
      "fixed-step restarted PDHG diagnostics on the standard-form conversion");
  theory_cmd->add_option("instance", theory_path, "MPS file")->required();
  theory_cmd->add_option("--step-scale", step_scale,
                         "step = scale / (2 ||A||_2), scale in (0, 1]");
  theory_cmd->add_option("--beta", beta, "restart decay in (0, 1)");
  theory_cmd->add_option("--iteration-limit", theory_iterations,
                         "inner iteration budget");

  CLI11_PARSE(app, argc, argv);

  try {
    params.scaling = scaling_from_string(scaling);
    if (eager_restart) params.evaluation_frequency = 1;
    params.time_limit_seconds = time_limit;

    if (show_config && !solve_cmd->parsed() && !bench_cmd->parsed() &&
        !theory_cmd->parsed()) {
      print_config(params, time_limit);
      return 0;
    }

    if (solve_cmd->parsed()) {
      const GeneralFormLp lp = read_mps_file(instance_path);
      if (show_config) print_config(params, time_limit);
      const SolveResult result = solve(lp, params);
      if (summary) {
        print_summary(result);
      } else {
        std::printf("%s %s objective %.12g iterations %lld seconds %.3f\n",
                    instance_path.c_str(), to_string(result.status),
                    result.info.primal_objective,
                    static_cast<long long>(result.iterations),
                    result.solve_seconds);
      }
      if (!out_path.empty()) write_solution(result, out_path, vectors);
      return exit_code_for(result.status);
    }

    if (bench_cmd->parsed()) {
      if (show_config) print_config(params, time_limit);
      const BenchmarkReport report =
          run_benchmark(bench_dir, params, time_limit, jobs);
      write_report(report, std::cout);
      if (!report_path.empty()) write_report(report, report_path);
      return 0;
    }

    if (theory_cmd->parsed()) {
      const GeneralFormLp lp = read_mps_file(theory_path);
      const auto conversion = pdhglp_tools::to_standard_form(lp);
      const StandardFormLp& std_lp = conversion.standard;
      const double norm_a = spectral_norm(std_lp.constraint_matrix, 1e-10);
      if (norm_a == 0.0) {
        std::fprintf(stderr, "constraint matrix is zero; nothing to check\n");
        return 1;
      }
      StandardPdhgOptions options;
      options.step_size = step_scale / (2.0 * norm_a);
      options.restart_decay = beta;
      options.convergence_tol = 1e-9;
      options.iteration_limit = theory_iterations;
      const StandardPdhgTrace trace = restarted_pdhg_standard(std_lp, options);

      std::printf("standard form: %lld rows, %lld cols, ||A||_2 = %.6g\n",
                  static_cast<long long>(std_lp.num_constraints()),
                  static_cast<long long>(std_lp.num_variables()), norm_a);
      std::printf("step size s = %.6g, restart decay beta = %.3g\n",
                  options.step_size, beta);
      std::printf("%-8s %-10s %-14s %s\n", "epoch", "length", "start KKT",
                  "ratio to previous");
      bool decay_ok = true;
      for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
        const double ratio =
            e == 0 ? 1.0
                   : trace.epochs[e].start_kkt / trace.epochs[e - 1].start_kkt;
        if (e > 0 && ratio > beta * (1.0 + 1e-9)) decay_ok = false;
        std::printf("%-8zu %-10lld %-14.6e %.4f\n", e,
                    static_cast<long long>(trace.epochs[e].length),
                    trace.epochs[e].start_kkt, ratio);
      }
      std::printf("epochs: %zu, iterations: %lld, converged: %s, decay<=beta: %s\n",
                  trace.epochs.size(),
                  static_cast<long long>(trace.total_iterations),
                  trace.converged ? "yes" : "no", decay_ok ? "yes" : "no");
      return trace.converged && decay_ok ? 0 : 4;
    }

    std::cout << app.help();
    return 1;
  } catch (const MpsParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
