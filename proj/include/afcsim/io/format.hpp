#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace afcsim::io {

/// Shortest decimal text that round-trips the double. Locale independent.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return std::string(buf, ptr);
}

}  // namespace afcsim::io
