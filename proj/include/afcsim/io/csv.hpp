#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "afcsim/error.hpp"
#include "afcsim/fit/least_squares.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/units.hpp"

namespace afcsim::io {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << t.columns[j];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << format_double(r[j]);
    out << '\n';
  }
}

inline std::string to_csv(const Table& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

namespace detail {
inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ';' || c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(' ');
    const auto e = f.find_last_not_of(' ');
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}
}  // namespace detail

/// Reads `x,y[,sigma]` rows. Header and comment lines (anything whose first field is not
/// a number) are skipped; a missing sigma column means unit sigmas.
inline fit::DataSeries read_xy_csv(std::istream& in) {
  fit::DataSeries d;
  std::string line;
  std::size_t lineno = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split_fields(line);
    double x = 0.0;
    if (!units::try_parse_number(f[0], x)) continue;
    if (f.size() < 2) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": need at least x,y");
    const int w = f.size() >= 3 && !f[2].empty() ? 3 : 2;
    if (width < 0) width = w;
    if (w != width) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": inconsistent column count");
    double y = 0.0, s = 1.0;
    if (!units::try_parse_number(f[1], y) || (w == 3 && !units::try_parse_number(f[2], s)))
      fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": malformed number");
    d.x.push_back(x);
    d.y.push_back(y);
    d.sigma.push_back(s);
  }
  if (d.x.empty()) fail(ErrorCode::ParseError, "no data rows found");
  return d;
}

}  // namespace afcsim::io
