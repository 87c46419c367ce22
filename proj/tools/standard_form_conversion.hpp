// Conversion of a general-form instance to standard form (min c'x,
// Ax = b, x >= 0) by variable shifting, sign splitting, and slack rows.
// Diagnostic/test machinery, not part of the solver's public surface.

#pragma once

#include <vector>

#include "pdhglp/lp_model.hpp"
#include "pdhglp/standard_form.hpp"

namespace pdhglp_tools {

struct StandardFormConversion {
  pdhglp::StandardFormLp standard;
  double objective_shift = 0.0;  // constant picked up by variable shifts
};

/// Variables with a finite lower bound shift to x = l + v (v >= 0); an
/// upper-bounded-only variable reflects to x = u - w; free variables split
/// into v+ - v-. Finite two-sided bounds add a slack row v + s = u - l, and
/// every G row gains a surplus: g'x - s = h.
inline StandardFormConversion to_standard_form(const pdhglp::GeneralFormLp& lp) {
  using pdhglp::index_t;
  using pdhglp::kInf;
  using pdhglp::Triplet;
  const index_t n = lp.num_variables();

  enum class Kind { kShift, kReflect, kSplit };
  struct VarMap {
    Kind kind;
    index_t column = 0;   // v (or v+)
    index_t column2 = 0;  // v- for splits
    double offset = 0.0;  // l for shifts, u for reflections
  };
  std::vector<VarMap> map(static_cast<std::size_t>(n));
  index_t next = 0;
  for (index_t j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    VarMap& vm = map[js];
    if (lp.lower[js] > -kInf) {
      vm.kind = Kind::kShift;
      vm.offset = lp.lower[js];
      vm.column = next++;
    } else if (lp.upper[js] < kInf) {
      vm.kind = Kind::kReflect;
      vm.offset = lp.upper[js];
      vm.column = next++;
    } else {
      vm.kind = Kind::kSplit;
      vm.column = next++;
      vm.column2 = next++;
    }
  }

  // x_j as an affine expression offset + sum(sign * column)
  auto expand = [&](index_t j, double coeff, index_t row,
                    std::vector<Triplet>& out, double& rhs_shift) {
    const VarMap& vm = map[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case Kind::kShift:
        out.push_back({row, vm.column, coeff});
        rhs_shift += coeff * vm.offset;
        break;
      case Kind::kReflect:
        out.push_back({row, vm.column, -coeff});
        rhs_shift += coeff * vm.offset;
        break;
      case Kind::kSplit:
        out.push_back({row, vm.column, coeff});
        out.push_back({row, vm.column2, -coeff});
        break;
    }
  };

  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  double objective_shift = lp.objective_constant;

  auto add_matrix_rows = [&](const pdhglp::CsrMatrix& m,
                             const std::vector<double>& r, bool surplus) {
    for (index_t i = 0; i < m.num_rows; ++i) {
      const index_t row = static_cast<index_t>(rhs.size());
      double shift = 0.0;
      for (index_t k = m.row_offsets[static_cast<std::size_t>(i)];
           k < m.row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
        expand(m.col_indices[static_cast<std::size_t>(k)],
               m.values[static_cast<std::size_t>(k)], row, triplets, shift);
      }
      if (surplus) triplets.push_back({row, next++, -1.0});
      rhs.push_back(r[static_cast<std::size_t>(i)] - shift);
    }
  };
  add_matrix_rows(lp.inequality_matrix, lp.inequality_rhs, true);
  add_matrix_rows(lp.equality_matrix, lp.equality_rhs, false);

  // box rows: v + s = u - l for two-sided bounds
  for (index_t j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    if (lp.lower[js] > -kInf && lp.upper[js] < kInf &&
        lp.upper[js] > lp.lower[js]) {
      const index_t row = static_cast<index_t>(rhs.size());
      triplets.push_back({row, map[js].column, 1.0});
      triplets.push_back({row, next++, 1.0});
      rhs.push_back(lp.upper[js] - lp.lower[js]);
    } else if (lp.lower[js] == lp.upper[js]) {
      const index_t row = static_cast<index_t>(rhs.size());
      triplets.push_back({row, map[js].column, 1.0});
      rhs.push_back(0.0);  // fixed variable: v = 0
    }
  }

  std::vector<double> objective(static_cast<std::size_t>(next), 0.0);
  for (index_t j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const VarMap& vm = map[js];
    const double c = lp.objective[js];
    if (c == 0.0) continue;
    switch (vm.kind) {
      case Kind::kShift:
        objective[static_cast<std::size_t>(vm.column)] += c;
        objective_shift += c * vm.offset;
        break;
      case Kind::kReflect:
        objective[static_cast<std::size_t>(vm.column)] -= c;
        objective_shift += c * vm.offset;
        break;
      case Kind::kSplit:
        objective[static_cast<std::size_t>(vm.column)] += c;
        objective[static_cast<std::size_t>(vm.column2)] -= c;
        break;
    }
  }

  StandardFormConversion out;
  out.standard.constraint_matrix = pdhglp::CsrMatrix::from_triplets(
      static_cast<index_t>(rhs.size()), next, triplets);
  out.standard.rhs = std::move(rhs);
  out.standard.objective = std::move(objective);
  out.objective_shift = objective_shift;
  return out;
}

}  // namespace pdhglp_tools
