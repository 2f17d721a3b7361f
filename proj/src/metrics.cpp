// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ftlab::xp {

double rmse(const std::vector<double>& reference,
            const std::vector<double>& actual) {
  if (reference.empty()) throw InputError("rmse of empty series");
  if (reference.size() != actual.size())
    throw InputError("rmse series length mismatch");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - actual[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(reference.size()));
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw InputError("mean of empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string table_to_csv(const Table& table) {
  if (table.columns.empty() || table.rows.empty())
    throw InputError("refusing to render an empty metrics table");
  std::ostringstream os;
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw InputError("ragged metrics table");
    for (std::size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
  return os.str();
}

Table table_from_csv(const std::string& csv_text) {
  Table t;
  std::istringstream is(csv_text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty table");
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) t.columns.push_back(col);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    std::string field;
    while (std::getline(rs, field, ',')) row.push_back(parse_double(field));
    if (row.size() != t.columns.size()) throw FormatError("ragged table row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string table_to_text(const Table& table) {
  if (table.columns.empty() || table.rows.empty())
    throw InputError("refusing to render an empty metrics table");
  std::vector<std::vector<std::string>> cells;
  cells.push_back(table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> r;
    r.reserve(row.size());
    for (double v : row) r.push_back(format_double(v));
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(table.columns.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) os << "  ";
      os << cells[r][c]
         << std::string(width[c] - cells[r][c].size(), ' ');
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c)
        total += width[c] + (c ? 2 : 0);
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

void write_table_csv(const Table& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for write: " + path);
  os << table_to_csv(table);
  if (!os) throw InputError("write failed: " + path);
}

Table read_table_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return table_from_csv(ss.str());
}

void report(const Table& table, const std::string& stem) {
  write_table_csv(table, stem + ".csv");
  std::ofstream os(stem + ".txt");
  if (!os) throw InputError("cannot open for write: " + stem + ".txt");
  os << table_to_text(table);
  if (!os) throw InputError("write failed: " + stem + ".txt");
}

}  // namespace ftlab::xp
