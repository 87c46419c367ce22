/// @file solution_io.hpp
/// @brief Key-value solution record, one field per line, `format_version 1`
/// header, fixed field order. Doubles are written with max_digits10 so a
/// round-trip read reproduces them exactly.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdhglp/solver.hpp"

namespace pdhglp {

struct SolutionRecord {
  int format_version = 1;
  std::string status;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::int64_t iterations = 0;
  double solve_seconds = 0.0;
  std::optional<std::vector<double>> primal_solution;
  std::optional<std::vector<double>> dual_solution;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(std::numeric_limits<double>::max_digits10);
  ss << v;
  return ss.str();
}

inline double parse_solution_double(const std::string& s) {
  // std::from_chars does not accept "inf"/"nan" spellings portably; strtod does.
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace detail

inline SolutionRecord to_solution_record(const SolveResult& result,
                                         bool include_vectors) {
  SolutionRecord rec;
  rec.status = to_string(result.status);
  rec.primal_objective = result.info.primal_objective;
  rec.dual_objective = result.info.dual_objective;
  rec.relative_gap = result.info.relative_gap;
  rec.primal_residual = result.info.primal_residual_norm;
  rec.dual_residual = result.info.dual_residual_norm;
  rec.iterations = result.iterations;
  rec.solve_seconds = result.solve_seconds;
  if (include_vectors) {
    rec.primal_solution = result.point.primal;
    rec.dual_solution = result.point.dual;
  }
  return rec;
}

inline void write_solution(const SolutionRecord& rec, std::ostream& out) {
  out << "format_version " << rec.format_version << "\n";
  out << "status " << rec.status << "\n";
  out << "primal_objective " << detail::format_double(rec.primal_objective) << "\n";
  out << "dual_objective " << detail::format_double(rec.dual_objective) << "\n";
  out << "relative_gap " << detail::format_double(rec.relative_gap) << "\n";
  out << "primal_residual " << detail::format_double(rec.primal_residual) << "\n";
  out << "dual_residual " << detail::format_double(rec.dual_residual) << "\n";
  out << "iterations " << rec.iterations << "\n";
  out << "solve_seconds " << detail::format_double(rec.solve_seconds) << "\n";
  if (rec.primal_solution) {
    out << "primal_solution " << rec.primal_solution->size() << "\n";
    for (double v : *rec.primal_solution) out << detail::format_double(v) << "\n";
  }
  if (rec.dual_solution) {
    out << "dual_solution " << rec.dual_solution->size() << "\n";
    for (double v : *rec.dual_solution) out << detail::format_double(v) << "\n";
  }
}

inline void write_solution(const SolveResult& result, const std::string& path,
                           bool include_vectors = false) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_solution(to_solution_record(result, include_vectors), out);
}

inline SolutionRecord read_solution(std::istream& in) {
  SolutionRecord rec;
  std::string key;
  bool saw_version = false;
  while (in >> key) {
    if (key == "format_version") {
      in >> rec.format_version;
      if (rec.format_version != 1) {
        throw std::runtime_error("unsupported solution format_version");
      }
      saw_version = true;
    } else if (key == "status") {
      in >> rec.status;
    } else if (key == "iterations") {
      in >> rec.iterations;
    } else if (key == "primal_solution" || key == "dual_solution") {
      std::size_t count = 0;
      in >> count;
      std::vector<double> values(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("truncated vector block");
        values[i] = detail::parse_solution_double(tok);
      }
      if (key == "primal_solution") {
        rec.primal_solution = std::move(values);
      } else {
        rec.dual_solution = std::move(values);
      }
    } else {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("missing value for '" + key + "'");
      const double value = detail::parse_solution_double(tok);
      if (key == "primal_objective") rec.primal_objective = value;
      else if (key == "dual_objective") rec.dual_objective = value;
      else if (key == "relative_gap") rec.relative_gap = value;
      else if (key == "primal_residual") rec.primal_residual = value;
      else if (key == "dual_residual") rec.dual_residual = value;
      else if (key == "solve_seconds") rec.solve_seconds = value;
      else throw std::runtime_error("unknown solution field '" + key + "'");
    }
  }
  if (!saw_version) throw std::runtime_error("missing format_version header");
  return rec;
}

inline SolutionRecord read_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_solution(in);
}

}  // namespace pdhglp
