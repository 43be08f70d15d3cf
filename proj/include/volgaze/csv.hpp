#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

/// Minimal CSV: comma-separated, '.' decimal, no quoting, first line is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] aligns with header
  std::vector<int> line_numbers;               // 1-based file line per row

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open CSV file: " + path);
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError(path + ": row " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

/// Strict finite-double parse; diagnostics carry file and 1-based line number.
inline double parse_double_cell(const std::string& cell, const std::string& path, int line_no,
                                const std::string& col) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw InputError(path + ": row " + std::to_string(line_no) + ": column '" + col +
                     "': not a finite number: '" + cell + "'");
  return v;
}

inline long parse_long_cell(const std::string& cell, const std::string& path, int line_no,
                            const std::string& col) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(cell.c_str(), &end, 10);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
    throw InputError(path + ": row " + std::to_string(line_no) + ": column '" + col +
                     "': not an integer: '" + cell + "'");
  return v;
}

struct CsvWriter {
  std::ofstream out;

  explicit CsvWriter(const std::string& path) : out(path) {
    if (!out) throw InputError("cannot open CSV for writing: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
};

}  // namespace volgaze
