#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "afcsim/error.hpp"
#include "afcsim/io/format.hpp"

namespace afcsim::io {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool markers = false;  // points instead of a polyline
  int width = 720;
  int height = 440;
};

namespace detail {

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Fixed two-decimal pixel coordinates keep the bytes stable.
inline std::string px(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

inline std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace detail

/// Static SVG line plot. Every series is drawn as one polyline (or circles with markers).
inline std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  require(!series.empty(), ErrorCode::PreconditionViolated, "nothing to plot");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), ErrorCode::PreconditionViolated, "series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_x && s.x[i] <= 0.0)) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  require(std::isfinite(x0) && std::isfinite(y0), ErrorCode::PreconditionViolated, "no finite points to plot");
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double L = 80, R = 20, T = 40, B = 60;
  const double W = spec.width - L - R, H = spec.height - T - B;
  auto X = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * W; };
  auto Y = [&](double y) { return T + (y1 - y) / (y1 - y0) * H; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << detail::px(L + W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::escape_xml(spec.title) << "</text>\n";
  o << "<rect x=\"" << detail::px(L) << "\" y=\"" << detail::px(T) << "\" width=\"" << detail::px(W)
    << "\" height=\"" << detail::px(H) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = L + W * k / 4.0, gy = T + H - H * k / 4.0;
    o << "<text x=\"" << detail::px(gx) << "\" y=\"" << detail::px(T + H + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::tick_label(spec.log_x ? std::pow(10.0, fx) : fx)
      << "</text>\n";
    o << "<text x=\"" << detail::px(L - 6) << "\" y=\"" << detail::px(gy + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << detail::tick_label(fy) << "</text>\n";
  }
  o << "<text x=\"" << detail::px(L + W / 2) << "\" y=\"" << detail::px(spec.height - 16.0)
    << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::escape_xml(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << detail::px(T + H / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << detail::px(T + H / 2) << ")\">" << detail::escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = palette[k % 6];
    if (spec.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i]) || (spec.log_x && s.x[i] <= 0.0)) continue;
        o << "<circle cx=\"" << detail::px(X(s.x[i])) << "\" cy=\"" << detail::px(Y(s.y[i])) << "\" r=\"3\" fill=\""
          << col << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.2\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i]) || (spec.log_x && s.x[i] <= 0.0)) continue;
        o << (first ? "" : " ") << detail::px(X(s.x[i])) << ',' << detail::px(Y(s.y[i]));
        first = false;
      }
      o << "\"/>\n";
    }
    if (!s.label.empty())
      o << "<text x=\"" << detail::px(L + W - 8) << "\" y=\"" << detail::px(T + 16 + 15.0 * k)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << col << "\">" << detail::escape_xml(s.label)
        << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace afcsim::io
