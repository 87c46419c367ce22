/// @file mps_io.hpp
/// @brief MPS reader (fixed and free format, gzip input by extension) and
/// the conversion of the raw records into a GeneralFormLp. Format corner
/// cases and the RANGES table live in docs/mps_format.md.

#pragma once

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdhglp/lp_model.hpp"

namespace pdhglp {

class MpsParseError : public std::runtime_error {
 public:
  MpsParseError(std::int64_t line, const std::string& what)
      : std::runtime_error("mps parse error at line " + std::to_string(line) +
                           ": " + what),
        line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

enum class MpsFormat { kFixed, kFree, kAuto };

enum class MpsRowKind { kObjective, kEquality, kLessEqual, kGreaterEqual };

enum class MpsBoundKind { kLower, kUpper, kFixed, kFree, kMinusInf, kPlusInf,
                          kBinary, kLowerInteger, kUpperInteger };

struct MpsRowRecord {
  MpsRowKind kind;
  std::string name;
};

struct MpsColumnEntry {
  index_t column = 0;  // index into column_names
  index_t row = 0;     // index into rows
  double value = 0.0;
};

struct MpsRhsEntry {
  index_t row = 0;
  double value = 0.0;
};

struct MpsRangeEntry {
  index_t row = 0;
  double value = 0.0;
};

struct MpsBoundEntry {
  MpsBoundKind kind;
  index_t column = 0;
  double value = 0.0;  // unused for FR/MI/PL/BV
};

/// Faithful record capture of one MPS file. Bound records keep file order;
/// integrality markers are recorded and ignored downstream.
struct RawMpsInstance {
  std::string name;
  std::vector<MpsRowRecord> rows;       // declaration order, objective included
  std::vector<std::string> column_names;
  std::vector<bool> column_is_integer;
  std::vector<MpsColumnEntry> entries;
  std::vector<MpsRhsEntry> rhs;
  std::vector<MpsRangeEntry> ranges;
  std::vector<MpsBoundEntry> bounds;
  std::optional<index_t> objective_row;   // first N row
  double objective_rhs = 0.0;             // RHS entry on the objective row
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    std::string_view tok = line.substr(start, i - start);
    if (!tok.empty() && tok.front() == '$') break;  // free-format comment
    tokens.push_back(tok);
  }
  return tokens;
}

// Classic fixed-format field windows, 0-based [start, end).
struct FieldWindow {
  std::size_t start;
  std::size_t end;
};
inline constexpr FieldWindow kFixedFields[6] = {
    {1, 3}, {4, 12}, {14, 22}, {24, 36}, {39, 47}, {49, 61}};

inline std::vector<std::string_view> split_fixed(std::string_view line) {
  std::vector<std::string_view> tokens;
  for (const FieldWindow& w : kFixedFields) {
    if (line.size() <= w.start) break;
    std::string_view field =
        trim(line.substr(w.start, std::min(w.end, line.size()) - w.start));
    if (!field.empty()) tokens.push_back(field);
  }
  return tokens;
}

/// A data line is "column-aligned" when every whitespace token starts inside
/// one of the fixed field windows, in order. Under auto detection a line
/// that is not aligned flips the parse to free format.
inline bool is_fixed_aligned(std::string_view line) {
  std::size_t field = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    while (field < 6 && i >= kFixedFields[field].end) ++field;
    if (field >= 6 || i < kFixedFields[field].start) return false;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    ++field;
  }
  return true;
}

inline double parse_number(std::string_view token, std::int64_t line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw MpsParseError(line, "malformed numeric field '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace detail

/// Parses MPS text. Section order NAME -> ROWS -> COLUMNS -> RHS ->
/// [RANGES] -> [BOUNDS] -> ENDATA is enforced; every error carries the
/// offending line number.
inline RawMpsInstance parse_mps(std::string_view text,
                                MpsFormat format = MpsFormat::kAuto) {
  using detail::split_fixed;
  using detail::split_whitespace;

  RawMpsInstance raw;
  std::map<std::string, index_t, std::less<>> row_index;
  std::map<std::string, index_t, std::less<>> column_index;

  enum class Section { kStart, kRows, kColumns, kRhs, kRanges, kBounds, kDone };
  Section section = Section::kStart;
  bool in_integer_block = false;
  bool free_mode = format == MpsFormat::kFree;

  auto lookup_row = [&](std::string_view name, std::int64_t line) -> index_t {
    const auto it = row_index.find(name);
    if (it == row_index.end()) {
      throw MpsParseError(line, "reference to undeclared row '" + std::string(name) + "'");
    }
    return it->second;
  };
  auto lookup_column = [&](std::string_view name, std::int64_t line) -> index_t {
    const auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw MpsParseError(line, "reference to undeclared column '" + std::string(name) + "'");
    }
    return it->second;
  };

  std::int64_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t newline = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, newline == std::string_view::npos ? text.size() - pos : newline - pos);
    pos = newline == std::string_view::npos ? text.size() + 1 : newline + 1;
    ++line_number;

    if (line.empty() || detail::trim(line).empty()) continue;
    if (line.front() == '*') continue;  // comment

    const bool is_section_header = line.front() != ' ' && line.front() != '\t';
    if (is_section_header) {
      const auto tokens = split_whitespace(line);
      const std::string_view head = tokens.empty() ? std::string_view{} : tokens[0];
      if (head == "NAME") {
        if (section != Section::kStart) {
          throw MpsParseError(line_number, "NAME after the header section");
        }
        if (tokens.size() > 1) raw.name = std::string(tokens[1]);
      } else if (head == "ROWS") {
        if (section != Section::kStart) {
          throw MpsParseError(line_number, "ROWS out of order");
        }
        section = Section::kRows;
      } else if (head == "COLUMNS") {
        if (section != Section::kRows) {
          throw MpsParseError(line_number, "COLUMNS out of order");
        }
        section = Section::kColumns;
      } else if (head == "RHS") {
        if (section != Section::kColumns) {
          throw MpsParseError(line_number, "RHS out of order");
        }
        section = Section::kRhs;
      } else if (head == "RANGES") {
        if (section != Section::kRhs) {
          throw MpsParseError(line_number, "RANGES out of order");
        }
        section = Section::kRanges;
      } else if (head == "BOUNDS") {
        if (section != Section::kRhs && section != Section::kRanges) {
          throw MpsParseError(line_number, "BOUNDS out of order");
        }
        section = Section::kBounds;
      } else if (head == "ENDATA") {
        if (section == Section::kStart) {
          throw MpsParseError(line_number, "ENDATA before any data section");
        }
        section = Section::kDone;
        break;
      } else {
        throw MpsParseError(line_number, "unknown section '" + std::string(head) + "'");
      }
      continue;
    }

    if (section == Section::kDone) continue;
    if (section == Section::kStart) {
      throw MpsParseError(line_number, "data line before ROWS");
    }

    if (format == MpsFormat::kAuto && !free_mode &&
        !detail::is_fixed_aligned(line)) {
      free_mode = true;
    }
    const auto tokens = (format == MpsFormat::kFixed)
                            ? split_fixed(line)
                            : split_whitespace(line);
    if (tokens.empty()) continue;

    switch (section) {
      case Section::kRows: {
        if (tokens.size() != 2 || tokens[0].size() != 1) {
          throw MpsParseError(line_number, "ROWS line must be '<type> <name>'");
        }
        MpsRowKind kind;
        switch (tokens[0][0]) {
          case 'N': case 'n': kind = MpsRowKind::kObjective; break;
          case 'E': case 'e': kind = MpsRowKind::kEquality; break;
          case 'L': case 'l': kind = MpsRowKind::kLessEqual; break;
          case 'G': case 'g': kind = MpsRowKind::kGreaterEqual; break;
          default:
            throw MpsParseError(line_number, "unknown row type '" + std::string(tokens[0]) + "'");
        }
        const std::string name(tokens[1]);
        if (!row_index.emplace(name, static_cast<index_t>(raw.rows.size())).second) {
          throw MpsParseError(line_number, "duplicate row '" + name + "'");
        }
        if (kind == MpsRowKind::kObjective && !raw.objective_row) {
          raw.objective_row = static_cast<index_t>(raw.rows.size());
        }
        raw.rows.push_back({kind, name});
        break;
      }
      case Section::kColumns: {
        // Integrality markers: <name> 'MARKER' 'INTORG'|'INTEND'
        if (tokens.size() >= 3 && tokens[1] == "'MARKER'") {
          if (tokens[2] == "'INTORG'") {
            in_integer_block = true;
          } else if (tokens[2] == "'INTEND'") {
            in_integer_block = false;
          } else {
            throw MpsParseError(line_number, "unknown marker '" + std::string(tokens[2]) + "'");
          }
          break;
        }
        if (tokens.size() != 3 && tokens.size() != 5) {
          throw MpsParseError(line_number,
                              "COLUMNS line must be '<col> <row> <value> [<row> <value>]'");
        }
        const std::string col_name(tokens[0]);
        index_t col;
        const auto it = column_index.find(col_name);
        if (it == column_index.end()) {
          col = static_cast<index_t>(raw.column_names.size());
          column_index.emplace(col_name, col);
          raw.column_names.push_back(col_name);
          raw.column_is_integer.push_back(in_integer_block);
        } else {
          col = it->second;
        }
        for (std::size_t f = 1; f + 1 < tokens.size(); f += 2) {
          const index_t row = lookup_row(tokens[f], line_number);
          const double value = detail::parse_number(tokens[f + 1], line_number);
          raw.entries.push_back({col, row, value});
        }
        break;
      }
      case Section::kRhs:
      case Section::kRanges: {
        // '<set> <row> <value> [<row> <value>]'; the set name is optional in
        // free files, detected by token parity.
        std::size_t first = 1;
        if (tokens.size() % 2 == 0) first = 0;
        if (tokens.size() - first < 2 || (tokens.size() - first) % 2 != 0) {
          throw MpsParseError(line_number, "malformed RHS/RANGES line");
        }
        for (std::size_t f = first; f + 1 < tokens.size(); f += 2) {
          const index_t row = lookup_row(tokens[f], line_number);
          const double value = detail::parse_number(tokens[f + 1], line_number);
          if (section == Section::kRhs) {
            raw.rhs.push_back({row, value});
            if (raw.objective_row && row == *raw.objective_row) {
              raw.objective_rhs = value;
            }
          } else {
            raw.ranges.push_back({row, value});
          }
        }
        break;
      }
      case Section::kBounds: {
        if (tokens.empty() || tokens[0].size() != 2) {
          throw MpsParseError(line_number, "BOUNDS line must start with a two-letter type");
        }
        std::string type(tokens[0]);
        std::transform(type.begin(), type.end(), type.begin(), ::toupper);
        MpsBoundKind kind;
        bool has_value;
        if (type == "LO") { kind = MpsBoundKind::kLower; has_value = true; }
        else if (type == "UP") { kind = MpsBoundKind::kUpper; has_value = true; }
        else if (type == "FX") { kind = MpsBoundKind::kFixed; has_value = true; }
        else if (type == "FR") { kind = MpsBoundKind::kFree; has_value = false; }
        else if (type == "MI") { kind = MpsBoundKind::kMinusInf; has_value = false; }
        else if (type == "PL") { kind = MpsBoundKind::kPlusInf; has_value = false; }
        else if (type == "BV") { kind = MpsBoundKind::kBinary; has_value = false; }
        else if (type == "LI") { kind = MpsBoundKind::kLowerInteger; has_value = true; }
        else if (type == "UI") { kind = MpsBoundKind::kUpperInteger; has_value = true; }
        else {
          throw MpsParseError(line_number, "unknown bound type '" + type + "'");
        }
        // '<type> <set> <col> [<value>]' with the set name optional.
        const std::size_t expect_with_set = has_value ? 4 : 3;
        std::size_t col_field;
        if (tokens.size() == expect_with_set) {
          col_field = 2;
        } else if (tokens.size() == expect_with_set - 1) {
          col_field = 1;
        } else {
          throw MpsParseError(line_number, "malformed BOUNDS line");
        }
        MpsBoundEntry entry;
        entry.kind = kind;
        entry.column = lookup_column(tokens[col_field], line_number);
        if (has_value) {
          entry.value = detail::parse_number(tokens[col_field + 1], line_number);
        }
        raw.bounds.push_back(entry);
        break;
      }
      default:
        throw MpsParseError(line_number, "unexpected data line");
    }
  }

  if (section != Section::kDone) {
    throw MpsParseError(line_number, "missing ENDATA");
  }
  if (!raw.objective_row) {
    throw MpsParseError(line_number, "no objective (N) row declared");
  }
  return raw;
}

/// Conversion into min c'x, Gx >= h, Ax = b, l <= x <= u:
///   - G rows pass through; L rows are negated; ranged rows expand into two
///     >= rows (see docs/mps_format.md for the range table);
///   - default bounds are [0, +inf); bound records apply in file order;
///   - integrality is relaxed: BV -> [0, 1], LI/UI -> real bounds;
///   - the RHS entry on the objective row becomes -objective_constant.
inline GeneralFormLp to_general_form(const RawMpsInstance& raw) {
  const index_t n = static_cast<index_t>(raw.column_names.size());
  const index_t num_rows = static_cast<index_t>(raw.rows.size());

  std::vector<double> rhs_by_row(static_cast<std::size_t>(num_rows), 0.0);
  for (const MpsRhsEntry& e : raw.rhs) {
    rhs_by_row[static_cast<std::size_t>(e.row)] = e.value;
  }
  std::vector<std::optional<double>> range_by_row(static_cast<std::size_t>(num_rows));
  for (const MpsRangeEntry& e : raw.ranges) {
    range_by_row[static_cast<std::size_t>(e.row)] = e.value;
  }

  // Two-sided interval [lo, hi] per constraint row under standard RANGES
  // semantics.
  struct RowInterval {
    double lo = -kInf;
    double hi = kInf;
  };
  std::vector<RowInterval> intervals(static_cast<std::size_t>(num_rows));
  for (index_t r = 0; r < num_rows; ++r) {
    const std::size_t s = static_cast<std::size_t>(r);
    const MpsRowKind kind = raw.rows[s].kind;
    if (kind == MpsRowKind::kObjective) continue;
    const double rhs = rhs_by_row[s];
    const std::optional<double> range = range_by_row[s];
    RowInterval& iv = intervals[s];
    switch (kind) {
      case MpsRowKind::kEquality:
        iv.lo = iv.hi = rhs;
        if (range) {
          if (*range >= 0.0) {
            iv.hi = rhs + *range;
          } else {
            iv.lo = rhs + *range;
          }
        }
        break;
      case MpsRowKind::kLessEqual:
        iv.hi = rhs;
        if (range) iv.lo = rhs - std::abs(*range);
        break;
      case MpsRowKind::kGreaterEqual:
        iv.lo = rhs;
        if (range) iv.hi = rhs + std::abs(*range);
        break;
      default:
        break;
    }
  }

  // Gather each row's coefficients once; entries on dropped (extra N) rows
  // vanish with the row.
  std::vector<std::vector<std::pair<index_t, double>>> row_entries(
      static_cast<std::size_t>(num_rows));
  std::vector<double> objective(static_cast<std::size_t>(n), 0.0);
  for (const MpsColumnEntry& e : raw.entries) {
    if (raw.objective_row && e.row == *raw.objective_row) {
      objective[static_cast<std::size_t>(e.column)] += e.value;
    } else {
      row_entries[static_cast<std::size_t>(e.row)].push_back({e.column, e.value});
    }
  }

  std::vector<Triplet> g_triplets, a_triplets;
  std::vector<double> h, b;
  auto append_geq = [&](const std::vector<std::pair<index_t, double>>& coeffs,
                        double sign, double rhs) {
    const index_t out_row = static_cast<index_t>(h.size());
    for (const auto& [col, value] : coeffs) {
      g_triplets.push_back({out_row, col, sign * value});
    }
    h.push_back(sign * rhs);
  };

  for (index_t r = 0; r < num_rows; ++r) {
    const std::size_t s = static_cast<std::size_t>(r);
    const MpsRowKind kind = raw.rows[s].kind;
    if (kind == MpsRowKind::kObjective) continue;
    const RowInterval iv = intervals[s];
    const auto& coeffs = row_entries[s];
    const bool ranged = range_by_row[s].has_value();
    if (kind == MpsRowKind::kEquality && !ranged) {
      const index_t out_row = static_cast<index_t>(b.size());
      for (const auto& [col, value] : coeffs) {
        a_triplets.push_back({out_row, col, value});
      }
      b.push_back(iv.lo);
      continue;
    }
    // One-sided rows become a single >= row; ranged rows become the pair
    // lo <= a'x and -(a'x) >= -hi.
    if (iv.lo > -kInf) append_geq(coeffs, 1.0, iv.lo);
    if (iv.hi < kInf) append_geq(coeffs, -1.0, iv.hi);
  }

  GeneralFormLp lp;
  lp.inequality_matrix = CsrMatrix::from_triplets(
      static_cast<index_t>(h.size()), n, g_triplets);
  lp.equality_matrix = CsrMatrix::from_triplets(
      static_cast<index_t>(b.size()), n, a_triplets);
  lp.inequality_rhs = std::move(h);
  lp.equality_rhs = std::move(b);
  lp.objective = std::move(objective);
  lp.objective_constant = -raw.objective_rhs;
  lp.lower.assign(static_cast<std::size_t>(n), 0.0);
  lp.upper.assign(static_cast<std::size_t>(n), kInf);

  for (const MpsBoundEntry& e : raw.bounds) {
    const std::size_t c = static_cast<std::size_t>(e.column);
    switch (e.kind) {
      case MpsBoundKind::kLower:
      case MpsBoundKind::kLowerInteger:
        lp.lower[c] = e.value;
        break;
      case MpsBoundKind::kUpper:
      case MpsBoundKind::kUpperInteger:
        lp.upper[c] = e.value;
        break;
      case MpsBoundKind::kFixed:
        lp.lower[c] = e.value;
        lp.upper[c] = e.value;
        break;
      case MpsBoundKind::kFree:
        lp.lower[c] = -kInf;
        lp.upper[c] = kInf;
        break;
      case MpsBoundKind::kMinusInf:
        lp.lower[c] = -kInf;
        break;
      case MpsBoundKind::kPlusInf:
        lp.upper[c] = kInf;
        break;
      case MpsBoundKind::kBinary:
        lp.lower[c] = 0.0;
        lp.upper[c] = 1.0;
        break;
    }
  }
  for (index_t i = 0; i < n; ++i) {
    const std::size_t c = static_cast<std::size_t>(i);
    if (lp.lower[c] > lp.upper[c]) {
      throw std::invalid_argument("infeasible bounds on variable '" +
                                  raw.column_names[c] + "': lower " +
                                  std::to_string(lp.lower[c]) + " > upper " +
                                  std::to_string(lp.upper[c]));
    }
  }
  lp.validate();
  return lp;
}

/// Reads a file into memory, transparently inflating *.gz.
inline std::string read_file_maybe_gzip(const std::string& path) {
  const bool gzip = path.size() > 3 && path.substr(path.size() - 3) == ".gz";
  if (gzip) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) {
      throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string out;
    char buffer[1 << 16];
    int got;
    while ((got = gzread(f, buffer, sizeof(buffer))) > 0) {
      out.append(buffer, static_cast<std::size_t>(got));
    }
    const bool error = got < 0;
    gzclose(f);
    if (error) throw std::runtime_error("gzip read error in '" + path + "'");
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GeneralFormLp read_mps_file(const std::string& path,
                                   MpsFormat format = MpsFormat::kAuto) {
  return to_general_form(parse_mps(read_file_maybe_gzip(path), format));
}

}  // namespace pdhglp
