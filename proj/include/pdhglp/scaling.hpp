/// @file scaling.hpp
/// @brief Diagonal preconditioning: Ruiz equilibration, Pock-Chambolle
/// scaling, and applying/undoing the rescaling K -> D1 K D2.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdhglp/lp_model.hpp"
#include "pdhglp/sparse_matrix.hpp"

namespace pdhglp {

enum class ScalingMode { kNone, kRuiz, kRuizPockChambolle };

/// D1 (rows) and D2 (columns), strictly positive.
struct DiagonalScaling {
  std::vector<double> row_scale;
  std::vector<double> col_scale;

  static DiagonalScaling identity(index_t rows, index_t cols) {
    return {std::vector<double>(static_cast<std::size_t>(rows), 1.0),
            std::vector<double>(static_cast<std::size_t>(cols), 1.0)};
  }
};

namespace detail {

/// K with both diagonal scalings applied; used while iterating Ruiz.
inline CsrMatrix scaled_copy(const CsrMatrix& k, const DiagonalScaling& s) {
  CsrMatrix out = k;
  for (index_t r = 0; r < k.num_rows; ++r) {
    const double dr = s.row_scale[static_cast<std::size_t>(r)];
    for (index_t i = k.row_offsets[static_cast<std::size_t>(r)];
         i < k.row_offsets[static_cast<std::size_t>(r) + 1]; ++i) {
      out.values[static_cast<std::size_t>(i)] *=
          dr * s.col_scale[static_cast<std::size_t>(
                   k.col_indices[static_cast<std::size_t>(i)])];
    }
  }
  return out;
}

}  // namespace detail

/// Ruiz equilibration: each iteration divides every row and column by the
/// square root of its current inf-norm (simultaneously, from the same
/// scaled matrix). Rows or columns with norm 0 keep scale 1. The log-spread
/// of the entries roughly halves per iteration.
inline DiagonalScaling ruiz_equilibrate(const CsrMatrix& k, int iterations) {
  if (iterations < 0) throw std::invalid_argument("ruiz: negative iteration count");
  DiagonalScaling s = DiagonalScaling::identity(k.num_rows, k.num_cols);
  for (int it = 0; it < iterations; ++it) {
    const CsrMatrix scaled = detail::scaled_copy(k, s);
    const RowColNorms norms = row_col_inf_norms(scaled);
    for (std::size_t r = 0; r < s.row_scale.size(); ++r) {
      if (norms.row[r] > 0.0) s.row_scale[r] /= std::sqrt(norms.row[r]);
    }
    for (std::size_t c = 0; c < s.col_scale.size(); ++c) {
      if (norms.col[c] > 0.0) s.col_scale[c] /= std::sqrt(norms.col[c]);
    }
  }
  return s;
}

/// Pock-Chambolle diagonal preconditioner:
///   row_scale_j = (sum_i |K_ji|^(2-alpha))^(-1/2)
///   col_scale_i = (sum_j |K_ji|^alpha)^(-1/2)
/// Zero rows/columns keep scale 1.
inline DiagonalScaling pock_chambolle_scale(const CsrMatrix& k, double alpha) {
  if (alpha < 0.0 || alpha > 2.0) {
    throw std::invalid_argument("pock-chambolle: alpha must lie in [0, 2]");
  }
  DiagonalScaling s = DiagonalScaling::identity(k.num_rows, k.num_cols);
  const std::vector<double> row_sums_pow = row_norms(k, 2.0 - alpha);
  const std::vector<double> col_sums_pow = col_norms(k, alpha);
  // row_norms/col_norms return p-norms; the scale needs sum^(-1/2), so undo
  // the 1/p exponent (p = 0 already returns the raw count).
  const double row_p = 2.0 - alpha;
  const double col_p = alpha;
  for (std::size_t r = 0; r < s.row_scale.size(); ++r) {
    double sum = row_sums_pow[r];
    if (row_p != 0.0 && sum > 0.0) sum = std::pow(sum, row_p);
    if (sum > 0.0) s.row_scale[r] = 1.0 / std::sqrt(sum);
  }
  for (std::size_t c = 0; c < s.col_scale.size(); ++c) {
    double sum = col_sums_pow[c];
    if (col_p != 0.0 && sum > 0.0) sum = std::pow(sum, col_p);
    if (sum > 0.0) s.col_scale[c] = 1.0 / std::sqrt(sum);
  }
  return s;
}

/// Componentwise product of two scalings: applying the result equals
/// applying s1 then s2.
inline DiagonalScaling compose(const DiagonalScaling& s1,
                               const DiagonalScaling& s2) {
  if (s1.row_scale.size() != s2.row_scale.size() ||
      s1.col_scale.size() != s2.col_scale.size()) {
    throw std::invalid_argument("compose: scaling dimensions differ");
  }
  DiagonalScaling out = s1;
  for (std::size_t i = 0; i < out.row_scale.size(); ++i) {
    out.row_scale[i] *= s2.row_scale[i];
  }
  for (std::size_t i = 0; i < out.col_scale.size(); ++i) {
    out.col_scale[i] *= s2.col_scale[i];
  }
  return out;
}

/// Scaling pipeline selected by mode, built from the stacked matrix
/// K = (G; A). Default is 10 Ruiz iterations followed by one
/// Pock-Chambolle pass with alpha = 1.
inline DiagonalScaling make_scaling(const CsrMatrix& k, ScalingMode mode,
                                    int ruiz_iterations = 10,
                                    double pc_alpha = 1.0) {
  switch (mode) {
    case ScalingMode::kNone:
      return DiagonalScaling::identity(k.num_rows, k.num_cols);
    case ScalingMode::kRuiz:
      return ruiz_equilibrate(k, ruiz_iterations);
    case ScalingMode::kRuizPockChambolle: {
      DiagonalScaling ruiz = ruiz_equilibrate(k, ruiz_iterations);
      const CsrMatrix after_ruiz = detail::scaled_copy(k, ruiz);
      return compose(ruiz, pock_chambolle_scale(after_ruiz, pc_alpha));
    }
  }
  throw std::logic_error("make_scaling: unknown mode");
}

/// Rescaled instance: G~ = D1g G D2, A~ = D1a A D2, c~ = D2 c,
/// (h~, b~) = D1 (h, b), l~ = D2^-1 l, u~ = D2^-1 u. Infinite bounds stay
/// infinite. Row scales are split (h-block first) to match the stacked K.
inline GeneralFormLp apply_scaling(const GeneralFormLp& lp,
                                   const DiagonalScaling& s) {
  const index_t m1 = lp.num_inequalities();
  if (static_cast<index_t>(s.row_scale.size()) != lp.num_constraints() ||
      static_cast<index_t>(s.col_scale.size()) != lp.num_variables()) {
    throw std::invalid_argument("apply_scaling: dimension mismatch");
  }
  GeneralFormLp out = lp;
  auto scale_matrix = [&s](CsrMatrix& m, index_t row_offset) {
    for (index_t r = 0; r < m.num_rows; ++r) {
      const double dr = s.row_scale[static_cast<std::size_t>(row_offset + r)];
      for (index_t i = m.row_offsets[static_cast<std::size_t>(r)];
           i < m.row_offsets[static_cast<std::size_t>(r) + 1]; ++i) {
        m.values[static_cast<std::size_t>(i)] *=
            dr * s.col_scale[static_cast<std::size_t>(
                     m.col_indices[static_cast<std::size_t>(i)])];
      }
    }
  };
  scale_matrix(out.inequality_matrix, 0);
  scale_matrix(out.equality_matrix, m1);
  for (std::size_t i = 0; i < out.inequality_rhs.size(); ++i) {
    out.inequality_rhs[i] *= s.row_scale[i];
  }
  for (std::size_t i = 0; i < out.equality_rhs.size(); ++i) {
    out.equality_rhs[i] *= s.row_scale[static_cast<std::size_t>(m1) + i];
  }
  for (std::size_t i = 0; i < out.objective.size(); ++i) {
    out.objective[i] *= s.col_scale[i];
    if (std::isfinite(out.lower[i])) out.lower[i] /= s.col_scale[i];
    if (std::isfinite(out.upper[i])) out.upper[i] /= s.col_scale[i];
  }
  return out;
}

/// Maps a point of the scaled instance back to the original one:
/// x = D2 x^, y = D1 y^.
inline PrimalDualPoint unscale_point(const PrimalDualPoint& scaled,
                                     const DiagonalScaling& s) {
  PrimalDualPoint out = scaled;
  for (std::size_t i = 0; i < out.primal.size(); ++i) {
    out.primal[i] *= s.col_scale[i];
  }
  for (std::size_t i = 0; i < out.dual.size(); ++i) {
    out.dual[i] *= s.row_scale[i];
  }
  return out;
}

/// Inverse of unscale_point (original space -> scaled space).
inline PrimalDualPoint scale_point(const PrimalDualPoint& original,
                                   const DiagonalScaling& s) {
  PrimalDualPoint out = original;
  for (std::size_t i = 0; i < out.primal.size(); ++i) {
    out.primal[i] /= s.col_scale[i];
  }
  for (std::size_t i = 0; i < out.dual.size(); ++i) {
    out.dual[i] /= s.row_scale[i];
  }
  return out;
}

}  // namespace pdhglp
