#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sb::csv {

/// Shortest round-trip decimal representation of a double.
inline std::string num(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  std::string s = ss.str();
  // prefer the shorter form when it round-trips
  std::ostringstream s9;
  s9.precision(12);
  s9 << x;
  if (std::stod(s9.str()) == x) return s9.str();
  return s;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.precision(17);
  return os;
}

/// Minimal CSV reader: splits on commas, no quoting (none of our files need it).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv: missing column " + name);
  }
};

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read(is);
}

}  // namespace sb::csv
