#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <utility>

#include "afcsim/error.hpp"

namespace afcsim::units {

enum class Dimension { Frequency, Field, Time, Power, Temperature, Dimensionless };

namespace detail {

struct Suffix {
  std::string_view text;
  Dimension dim;
  double factor;
};

// Longest suffixes first so "mT" is not read as "T" with a stray 'm'.
inline constexpr std::array<Suffix, 19> suffixes{{
    {"GHz", Dimension::Frequency, 1e9},
    {"MHz", Dimension::Frequency, 1e6},
    {"kHz", Dimension::Frequency, 1e3},
    {"Hz", Dimension::Frequency, 1.0},
    {"kG", Dimension::Field, 1e-1},
    {"mT", Dimension::Field, 1e-3},
    {"G", Dimension::Field, 1e-4},
    {"T", Dimension::Field, 1.0},
    {"ms", Dimension::Time, 1e-3},
    {"us", Dimension::Time, 1e-6},
    {"ns", Dimension::Time, 1e-9},
    {"s", Dimension::Time, 1.0},
    {"mW", Dimension::Power, 1e-3},
    {"uW", Dimension::Power, 1e-6},
    {"nW", Dimension::Power, 1e-9},
    {"W", Dimension::Power, 1.0},
    {"mK", Dimension::Temperature, 1e-3},
    {"K", Dimension::Temperature, 1.0},
    {"%", Dimension::Dimensionless, 1e-2},
}};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline double parse_number(std::string_view text) {
  text = detail::trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  return value;
}

inline bool try_parse_number(std::string_view text, double& out) {
  text = detail::trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

/// Parses "350G", "6.4GHz", "30 ms" into SI units. A bare number is taken as SI.
inline double parse_quantity(std::string_view text, Dimension expected) {
  auto body = detail::trim(text);
  for (const auto& s : detail::suffixes) {
    if (body.size() > s.text.size() && body.substr(body.size() - s.text.size()) == s.text) {
      if (s.dim != expected && s.dim != Dimension::Dimensionless)
        fail(ErrorCode::ParseError, "unit '" + std::string(s.text) + "' has the wrong dimension in '" +
                                        std::string(text) + "'");
      return parse_number(body.substr(0, body.size() - s.text.size())) * s.factor;
    }
  }
  return parse_number(body);
}

}  // namespace afcsim::units
