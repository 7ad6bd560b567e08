#pragma once

#include <string>
#include <vector>

#include "alpharnn/linalg.hpp"

namespace arnn {

/// Numeric table read from CSV. A header row is required. The first column
/// is treated as a timestamp when its header is one of timestamp, time,
/// date, datetime, index or t; every other column must be numeric. Lines
/// starting with '#' are comments.
struct Table {
  std::vector<std::string> columns;     // numeric column names
  std::vector<std::string> timestamps;  // empty when the file has none
  Matrix values;                        // rows x columns
  std::vector<std::string> comments;

  Eigen::Index column_index(const std::string& name) const;
  Vector column(const std::string& name) const;
  Eigen::Index rows() const { return values.rows(); }
};

Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Writes a table with an optional timestamp column and leading '#' comment
/// lines. Numbers are printed with 17 significant digits.
void write_csv(const std::string& path, const Table& table);

}  // namespace arnn
