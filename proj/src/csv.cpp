#include "alpharnn/csv.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace arnn {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim spaces and a trailing CR
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_timestamp_header(std::string h) {
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
  return h == "timestamp" || h == "time" || h == "date" || h == "datetime" || h == "index" ||
         h == "t";
}

}  // namespace

Eigen::Index Table::column_index(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw UsageError("column '" + name + "' not found");
  return static_cast<Eigen::Index>(it - columns.begin());
}

Vector Table::column(const std::string& name) const { return values.col(column_index(name)); }

Table parse_csv(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  Table t;
  std::vector<std::string> header;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    header = split(line);
    break;
  }
  if (header.empty()) throw IoError(source + ": missing header row");
  const bool has_time = is_timestamp_header(header.front());
  t.columns.assign(header.begin() + (has_time ? 1 : 0), header.end());
  if (t.columns.empty()) throw IoError(source + ": no numeric columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw IoError(source + ": row " + std::to_string(lineno) + " has " +
                    std::to_string(cells.size()) + " fields, header has " +
                    std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(t.columns.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (has_time && c == 0) {
        t.timestamps.push_back(cells[0]);
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
        row.push_back(v);
      } catch (const std::exception&) {
        throw IoError(source + ": row " + std::to_string(lineno) + ", column '" + header[c] +
                      "': cannot parse '" + cells[c] + "' as a number");
      }
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(i, j) = rows[i][j];
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_csv(ss.str(), path);
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  for (const auto& c : table.comments) os << '#' << c << '\n';
  const bool has_time = !table.timestamps.empty();
  if (has_time) os << "timestamp";
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    os << ((has_time || j) ? "," : "") << table.columns[j];
  os << '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    if (has_time) os << table.timestamps[i];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j)
      os << ((has_time || j) ? "," : "") << table.values(i, j);
    os << '\n';
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace arnn
