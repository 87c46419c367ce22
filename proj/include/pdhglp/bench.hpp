/// @file bench.hpp
/// @brief Benchmark harness: shifted geometric means, per-instance records,
/// size-class aggregation, and the tab-separated report file.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pdhglp/mps_io.hpp"
#include "pdhglp/solver.hpp"

namespace pdhglp {

/// Shifted geometric mean (prod_i (t_i + shift))^(1/n) - shift, computed in
/// log space. SGM10 is shift = 10.
inline double shifted_geometric_mean(std::span<const double> times,
                                     double shift) {
  if (times.empty()) {
    throw std::invalid_argument("shifted_geometric_mean: empty time list");
  }
  double log_sum = 0.0;
  for (double t : times) {
    if (t < 0.0) {
      throw std::invalid_argument("shifted_geometric_mean: negative time");
    }
    log_sum += std::log(t + shift);
  }
  return std::exp(log_sum / static_cast<double>(times.size())) - shift;
}

enum class SizeClass { kSmall, kMedium, kLarge };

inline const char* to_string(SizeClass c) {
  switch (c) {
    case SizeClass::kSmall: return "small";
    case SizeClass::kMedium: return "medium";
    case SizeClass::kLarge: return "large";
  }
  return "unknown";
}

/// Inclusive-lower thresholds: [0, 1M) small, [1M, 10M) medium, [10M, inf)
/// large; exactly 1,000,000 nonzeros is medium.
inline SizeClass size_class_for(std::int64_t nonzeros) {
  if (nonzeros < 1000000) return SizeClass::kSmall;
  if (nonzeros < 10000000) return SizeClass::kMedium;
  return SizeClass::kLarge;
}

struct BenchmarkRecord {
  std::string instance;
  std::int64_t nonzeros = 0;
  bool parse_failed = false;
  std::string parse_error;
  SolveStatus status = SolveStatus::kNumericalError;
  double solve_seconds = 0.0;  // scaling + solve, excludes parsing
  double total_seconds = 0.0;  // parse + scaling + solve
  std::int64_t iterations = 0;
  double primal_objective = 0.0;
  double relative_gap = 0.0;
  double relative_primal_residual = 0.0;
  double relative_dual_residual = 0.0;

  bool solved() const {
    return !parse_failed && (status == SolveStatus::kOptimal ||
                             status == SolveStatus::kPrimalInfeasible ||
                             status == SolveStatus::kDualInfeasible);
  }
};

struct AggregateRow {
  std::string group;
  std::int64_t instances = 0;
  std::int64_t solved = 0;
  double sgm10 = 0.0;
};

struct BenchmarkReport {
  std::string config_line;  // config hash + key parameters
  double time_limit = 0.0;
  std::vector<BenchmarkRecord> records;   // ordered by instance name
  std::vector<AggregateRow> aggregates;   // per size class, then total
};

/// A record's contribution to SGM10: its conclusive solve time, or the full
/// time limit when the run was inconclusive. Parse failures contribute
/// nothing (they are excluded before this is called).
inline double aggregation_time(const BenchmarkRecord& r, double time_limit) {
  return r.solved() ? std::min(r.solve_seconds, time_limit) : time_limit;
}

/// Pure aggregation of a record set: re-running it on a saved report
/// reproduces identical values.
inline std::vector<AggregateRow> aggregate_records(
    std::span<const BenchmarkRecord> records, double time_limit,
    double shift = 10.0) {
  std::vector<AggregateRow> rows;
  auto build = [&](const std::string& group, auto&& filter) {
    AggregateRow row;
    row.group = group;
    std::vector<double> times;
    for (const BenchmarkRecord& r : records) {
      if (r.parse_failed || !filter(r)) continue;
      row.instances += 1;
      if (r.solved()) row.solved += 1;
      times.push_back(aggregation_time(r, time_limit));
    }
    row.sgm10 = times.empty() ? 0.0 : shifted_geometric_mean(times, shift);
    rows.push_back(row);
  };
  for (SizeClass c : {SizeClass::kSmall, SizeClass::kMedium, SizeClass::kLarge}) {
    build(to_string(c),
          [c](const BenchmarkRecord& r) { return size_class_for(r.nonzeros) == c; });
  }
  build("total", [](const BenchmarkRecord&) { return true; });
  return rows;
}

/// FNV-1a over the canonical parameter string; stamped into the report
/// header so two reports are comparable only when produced by the same
/// configuration.
inline std::string config_hash(const SolverParams& p, double time_limit) {
  std::ostringstream ss;
  ss.precision(17);
  ss << p.eps_optimal << '|' << p.eps_infeasible << '|' << time_limit << '|'
     << p.iteration_limit << '|' << p.beta_sufficient << '|' << p.beta_necessary
     << '|' << p.beta_artificial << '|' << p.theta_smoothing << '|' << p.eps_zero
     << '|' << p.evaluation_frequency << '|' << static_cast<int>(p.scaling) << '|'
     << p.ruiz_iterations << '|' << p.pock_chambolle_alpha << '|'
     << p.step_reduction_exponent << '|' << p.step_growth_exponent << '|'
     << p.omega_min << '|' << p.omega_max;
  const std::string s = ss.str();
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

inline BenchmarkRecord solve_instance_for_benchmark(const std::string& path,
                                                    const SolverParams& params) {
  BenchmarkRecord rec;
  rec.instance = std::filesystem::path(path).filename().string();
  const auto start = std::chrono::steady_clock::now();
  GeneralFormLp lp;
  try {
    lp = read_mps_file(path);
  } catch (const std::exception& e) {
    rec.parse_failed = true;
    rec.parse_error = e.what();
    return rec;
  }
  rec.nonzeros = lp.nnz();
  const SolveResult result = solve(lp, params);
  rec.status = result.status;
  // the record invariant: never exceed the configured limit
  rec.solve_seconds = std::min(result.solve_seconds, params.time_limit_seconds);
  rec.total_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  rec.iterations = result.iterations;
  rec.primal_objective = result.info.primal_objective;
  rec.relative_gap = result.info.relative_gap;
  rec.relative_primal_residual = result.info.relative_primal_residual;
  rec.relative_dual_residual = result.info.relative_dual_residual;
  return rec;
}

/// Runs every *.mps / *.mps.gz under `dir` (non-recursive), `jobs` worker
/// threads, each solve single-threaded. Records are ordered by instance
/// name regardless of completion order. Unsolved runs contribute the time
/// limit to SGM10; unreadable instances become parse-failure rows excluded
/// from the aggregate.
inline BenchmarkReport run_benchmark(const std::string& dir,
                                     SolverParams params, double time_limit,
                                     int jobs = 1) {
  params.time_limit_seconds = time_limit;
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const bool mps = name.ends_with(".mps") || name.ends_with(".mps.gz");
    if (mps) paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());

  std::vector<BenchmarkRecord> records(paths.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < paths.size(); ++i) {
      records[i] = solve_instance_for_benchmark(paths[i], params);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int worker_count = std::min<int>(jobs, static_cast<int>(paths.size()));
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= paths.size()) break;
          records[i] = solve_instance_for_benchmark(paths[i], params);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }
  std::sort(records.begin(), records.end(),
            [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
              return a.instance < b.instance;
            });

  BenchmarkReport report;
  report.config_line = config_hash(params, time_limit);
  report.time_limit = time_limit;
  report.records = std::move(records);
  report.aggregates = aggregate_records(report.records, time_limit);
  return report;
}

/// One header line with the config hash, then tab-separated rows in a
/// stable column order, then aggregate rows.
inline void write_report(const BenchmarkReport& report, std::ostream& out) {
  out.precision(9);
  out << "# pdhglp benchmark report config=" << report.config_line
      << " time_limit=" << report.time_limit << "\n";
  out << "instance\tnonzeros\tstatus\tsolve_seconds\ttotal_seconds\titerations"
      << "\tprimal_objective\trelative_gap\trelative_primal_residual"
      << "\trelative_dual_residual\n";
  for (const BenchmarkRecord& r : report.records) {
    if (r.parse_failed) {
      out << r.instance << "\t0\tparse_error\t0\t0\t0\t0\t0\t0\t0\n";
      continue;
    }
    out << r.instance << '\t' << r.nonzeros << '\t' << to_string(r.status)
        << '\t' << r.solve_seconds << '\t' << r.total_seconds << '\t'
        << r.iterations << '\t' << r.primal_objective << '\t' << r.relative_gap
        << '\t' << r.relative_primal_residual << '\t'
        << r.relative_dual_residual << "\n";
  }
  for (const AggregateRow& a : report.aggregates) {
    out << "aggregate\t" << a.group << "\tinstances=" << a.instances
        << "\tsolved=" << a.solved << "\tsgm10=" << a.sgm10 << "\n";
  }
}

inline void write_report(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_report(report, out);
}

}  // namespace pdhglp
