#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sk/common.hpp"

namespace sk {

/// Rectangular numeric table with named columns, as parsed from CSV.
struct Table {
  std::vector<std::string> columns;
  PointSet values;

  long column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : long(it - columns.begin());
  }
};

struct TableOptions {
  char delimiter = ',';
  bool header = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses CSV text. Errors carry 1-based line numbers; ragged rows and
/// non-numeric cells are rejected, blank lines are skipped.
inline Table load_table_text(const std::string& text, TableOptions options = {}) {
  Table table;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  std::vector<std::vector<double>> rows;
  size_t width = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split_line(trimmed, options.delimiter);
    if (options.header && !have_header) {
      std::unordered_set<std::string_view> seen;
      for (const auto& c : cells) {
        if (c.empty()) throw ParseError(line_no, "empty column name in header");
        if (!seen.insert(c).second)
          throw ParseError(line_no, "duplicate column name '" + std::string(c) + "'");
        table.columns.emplace_back(c);
      }
      width = cells.size();
      have_header = true;
      continue;
    }
    if (width == 0) {
      width = cells.size();
      for (size_t j = 0; j < width; ++j) table.columns.push_back("c" + std::to_string(j));
    }
    if (cells.size() != width)
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(cells.size()));
    std::vector<double> row(width);
    for (size_t j = 0; j < width; ++j) {
      const std::string_view c = cells[j];
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{} || res.ptr != c.data() + c.size())
        throw ParseError(line_no, "cannot parse '" + std::string(c) + "' as a number (column " +
                                      std::to_string(j + 1) + ")");
      if (!std::isfinite(v))
        throw ParseError(line_no, "non-finite value in column " + std::to_string(j + 1));
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (options.header && !have_header) throw ParseError(1, "missing header line");

  table.values.resize(long(rows.size()), long(width));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j) table.values(long(i), long(j)) = rows[i][j];
  return table;
}

inline Table load_table(const std::string& path, TableOptions options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_table_text(ss.str(), options);
}

/// Writes with 17 significant digits so doubles round-trip losslessly.
inline void save_table(const std::string& path, const Table& table, char delimiter = ',') {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  for (size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << delimiter;
    out << table.columns[j];
  }
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j) out << delimiter;
      std::snprintf(buf, sizeof(buf), "%.17g", table.values(i, j));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

/// Extracts a column that must hold integers (class labels).
inline IndexVector integer_column(const Table& table, long col) {
  if (col < 0 || col >= table.values.cols()) throw InputError("integer_column: no such column");
  IndexVector out(table.values.rows());
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, col);
    if (v != std::floor(v) || std::abs(v) > 2e9)
      throw InputError("column " + table.columns[size_t(col)] + " is not integral at row " +
                       std::to_string(i + 1));
    out[i] = int(v);
  }
  return out;
}

inline PointSet drop_column(const Table& table, long col) {
  if (col < 0 || col >= table.values.cols()) return table.values;
  PointSet out(table.values.rows(), table.values.cols() - 1);
  long k = 0;
  for (long j = 0; j < table.values.cols(); ++j) {
    if (j == col) continue;
    out.col(k++) = table.values.col(j);
  }
  return out;
}

}  // namespace sk
