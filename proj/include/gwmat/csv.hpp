#pragma once

// CSV point-data input (header `x,y[,z][,value]`), full-precision CSV
// output helpers, and the key=value parameter-file format shared by the
// fit / predict / cv commands.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwmat/covmat.hpp"

namespace gwmat {

struct Dataset {
  PointSet points;
  std::vector<double> values;  // empty when the file has no value column
  bool has_values = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace detail

inline Dataset read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  do {  // skip leading comment lines (reproducibility headers)
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  } while (!line.empty() && line[0] == '#');
  const auto header = detail::split_csv(line);
  int ix = -1, iy = -1, iz = -1, iv = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") ix = static_cast<int>(c);
    else if (header[c] == "y") iy = static_cast<int>(c);
    else if (header[c] == "z") iz = static_cast<int>(c);
    else if (header[c] == "value") iv = static_cast<int>(c);
  }
  if (ix < 0 || iy < 0)
    throw std::runtime_error(path + ": header must contain x,y[,z][,value]");
  const int dim = (iz >= 0) ? 3 : 2;
  std::vector<double> coords;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": wrong number of columns");
    const auto num = [&](int c) {
      try {
        return std::stod(cells[c]);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": not a number: " + cells[c]);
      }
    };
    coords.push_back(num(ix));
    coords.push_back(num(iy));
    if (iz >= 0) coords.push_back(num(iz));
    if (iv >= 0) values.push_back(num(iv));
  }
  Dataset d{build_pointset(std::move(coords), dim), std::move(values), iv >= 0};
  if (d.has_values && d.values.size() != d.points.size())
    throw std::runtime_error(path + ": value column length mismatch");
  return d;
}

// full-precision numeric formatting for CSV output (17 significant digits)
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// 5-decimal fixed formatting for aligned text tables
inline std::string txt_num(double v, int width = 12) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%*.5f", width, v);
  return buf;
}

// key=value parameter files
inline void write_kv(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

inline std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": expected key=value, got: " + line);
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace gwmat
