// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ftlab/common.hpp"

namespace ftlab::xp {

/// Root mean square error between two equal-length series.
double rmse(const std::vector<double>& reference,
            const std::vector<double>& actual);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 samples.
double sample_std(const std::vector<double>& v);

/// Column-named numeric table; the unit all metrics reporting goes through.
/// CSV and text renderings print identical value strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string table_to_csv(const Table& table);
Table table_from_csv(const std::string& csv_text);
std::string table_to_text(const Table& table);

void write_table_csv(const Table& table, const std::string& path);
Table read_table_csv(const std::string& path);

/// Writes <stem>.csv and <stem>.txt renderings of the same table.
void report(const Table& table, const std::string& stem);

}  // namespace ftlab::xp
