#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "afcsim/constants.hpp"
#include "afcsim/error.hpp"
#include "afcsim/fit/least_squares.hpp"

namespace afcsim::fit {

namespace detail {
inline constexpr double inf = std::numeric_limits<double>::infinity();

// Log-linear least squares of y = A exp(-x/t) on points with y > 0.
inline bool loglin(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e,
                   double& A, double& t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = b; i < e; ++i) {
    if (!(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++n;
  }
  if (n < 2) return false;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return false;
  const double slope = (n * sxy - sx * sy) / den;
  if (!(slope < 0.0)) return false;
  A = std::exp((sy - slope * sx) / n);
  t = -1.0 / slope;
  return true;
}
}  // namespace detail

/// y(t) = A_s exp(-t/t_s) + A_l exp(-t/t_l), reported as (A_short, t_short, A_long, t_long).
/// Fitted as theta = (A_s, ln t_s, A_l, u) with t_l = t_s exp(exp(u)), so t_s < t_l always.
inline ParametricModel model_double_exponential() {
  ParametricModel m;
  m.name = "double-exponential";
  m.param_names = {"A_short", "t_short", "A_long", "t_long"};
  m.param_units = {"", "s", "", "s"};
  m.evaluate = [](const Vec& th, double t) {
    const double ts = std::exp(th[1]);
    const double tl = ts * std::exp(std::exp(th[3]));
    return th[0] * std::exp(-t / ts) + th[2] * std::exp(-t / tl);
  };
  m.gradient = [](const Vec& th, double t, Eigen::Ref<Vec> g) {
    const double ts = std::exp(th[1]);
    const double ew = std::exp(th[3]);
    const double tl = ts * std::exp(ew);
    const double es = std::exp(-t / ts);
    const double el = std::exp(-t / tl);
    // d/d ln t_s of exp(-t/t_s) = (t/t_s) exp(-t/t_s); t_l scales with t_s too.
    g[0] = es;
    g[1] = th[0] * es * (t / ts) + th[2] * el * (t / tl);
    g[2] = el;
    g[3] = th[2] * el * (t / tl) * ew;
  };
  m.to_reported = [](const Vec& th) {
    const double ts = std::exp(th[1]);
    Vec p(4);
    p << th[0], ts, th[2], ts * std::exp(std::exp(th[3]));
    return p;
  };
  m.from_reported = [](const Vec& p) {
    require(p[1] > 0.0 && p[3] > p[1], ErrorCode::InvalidParameter, "need 0 < t_short < t_long");
    Vec th(4);
    th << p[0], std::log(p[1]), p[2], std::log(std::log(p[3] / p[1]));
    return th;
  };
  m.reported_jacobian = [](const Vec& th) {
    const double ts = std::exp(th[1]);
    const double ew = std::exp(th[3]);
    const double tl = ts * std::exp(ew);
    Mat G = Mat::Zero(4, 4);
    G(0, 0) = 1.0;
    G(1, 1) = ts;
    G(2, 2) = 1.0;
    G(3, 1) = tl;
    G(3, 3) = tl * ew;
    return G;
  };
  m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> xs, ys;
    for (auto i : idx) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    const std::size_t n = xs.size();
    double Al = 0.5 * ys.front(), tl = 0.5 * (xs.back() + xs.front()) + 1e-9;
    detail::loglin(xs, ys, n / 2, n, Al, tl);
    std::vector<double> rest(n);
    for (std::size_t i = 0; i < n; ++i) rest[i] = ys[i] - Al * std::exp(-xs[i] / tl);
    double As = std::max(ys.front() - Al, 1e-3 * std::abs(ys.front())), ts = tl / 10.0;
    detail::loglin(xs, rest, 0, std::max<std::size_t>(n / 2, 2), As, ts);
    if (!(ts > 0.0) || ts >= tl) ts = tl / 10.0;
    As = std::max(As, 0.0);
    Al = std::max(Al, 0.0);
    Vec th(4);
    th << As, std::log(ts), Al, std::log(std::log(tl / ts));
    return th;
  };
  m.default_theta = Vec(4);
  m.default_theta << 0.5, std::log(0.06), 0.5, std::log(std::log(1.0 / 0.06));
  m.lower = Vec(4);
  m.upper = Vec(4);
  m.lower << 0.0, std::log(1e-9), 0.0, -6.0;
  m.upper << detail::inf, std::log(1e9), detail::inf, 4.0;
  return m;
}

/// Long-decay rate versus field, rate(B) = alpha / (Gamma_s + gamma_s B) sech^2(g mu_B B / (2 k_B T)),
/// with alpha, g and T held fixed. Parameters (Gamma_s [Hz], gamma_s [Hz/T]); x is B in tesla.
inline ParametricModel model_flipflop_field(double alpha, double g, double T_kelvin) {
  require(T_kelvin > 0.0, ErrorCode::NonPositiveTemperature, "temperature must be positive");
  require(alpha > 0.0 && g > 0.0, ErrorCode::InvalidParameter, "alpha and g must be positive");
  const double c = g * constants::bohr_magneton / (2.0 * constants::boltzmann * T_kelvin);
  ParametricModel m;
  m.name = "flipflop-field";
  m.param_names = {"Gamma_s", "gamma_s"};
  m.param_units = {"Hz", "Hz/T"};
  auto sech2 = [c](double B) {
    const double ch = std::cosh(c * B);
    return 1.0 / (ch * ch);
  };
  m.evaluate = [=](const Vec& th, double B) { return alpha / (th[0] + th[1] * B) * sech2(B); };
  m.gradient = [=](const Vec& th, double B, Eigen::Ref<Vec> gr) {
    const double w = th[0] + th[1] * B;
    const double r = alpha / w * sech2(B);
    gr[0] = -r / w;
    gr[1] = -r * B / w;
  };
  m.default_theta = Vec(2);
  m.default_theta << 0.5e9, 10e9;
  m.lower = Vec::Zero(2);
  m.upper = Vec::Constant(2, detail::inf);
  return m;
}

/// y = baseline - depth (fwhm/2)^2 / ((nu - nu0)^2 + (fwhm/2)^2); parameters (baseline, depth, nu0, fwhm).
inline ParametricModel model_lorentzian_dip() {
  ParametricModel m;
  m.name = "lorentzian-dip";
  m.param_names = {"baseline", "depth", "nu0", "fwhm"};
  m.param_units = {"OD", "OD", "Hz", "Hz"};
  m.evaluate = [](const Vec& th, double nu) {
    const double h = 0.5 * th[3];
    const double d = nu - th[2];
    return th[0] - th[1] * h * h / (d * d + h * h);
  };
  m.gradient = [](const Vec& th, double nu, Eigen::Ref<Vec> g) {
    const double h = 0.5 * th[3];
    const double d = nu - th[2];
    const double q = d * d + h * h;
    const double L = h * h / q;
    g[0] = 1.0;
    g[1] = -L;
    g[2] = -th[1] * h * h * 2.0 * d / (q * q);
    g[3] = -th[1] * (h * d * d / (q * q));  // dL/dh * dh/dfwhm, dL/dh = 2 h d^2 / q^2
  };
  m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto lo = std::min_element(y.begin(), y.end()) - y.begin();
    const double base = std::max(y.front(), y.back());
    const double depth = std::max(base - y[static_cast<std::size_t>(lo)], 1e-12);
    double fw = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < base - 0.5 * depth) fw += std::abs(x.size() > 1 ? (x.back() - x.front()) / (x.size() - 1) : 1.0);
    Vec th(4);
    th << base, depth, x[static_cast<std::size_t>(lo)], std::max(fw, 1e-9);
    return th;
  };
  m.default_theta = Vec(4);
  m.default_theta << 1.0, 0.5, 0.0, 1.0;
  m.lower = Vec(4);
  m.upper = Vec(4);
  m.lower << -detail::inf, 0.0, -detail::inf, 0.0;
  m.upper << detail::inf, detail::inf, detail::inf, detail::inf;
  return m;
}

/// Lorentzian dip on a sloped baseline; slope is per Hz about the fixed reference x_ref.
/// Parameters (baseline, depth, nu0, fwhm, slope).
inline ParametricModel model_lorentzian_dip_linear(double x_ref) {
  ParametricModel base = model_lorentzian_dip();
  ParametricModel m = base;
  m.name = "lorentzian-dip-linear";
  m.param_names.push_back("slope");
  m.param_units.push_back("OD/Hz");
  m.evaluate = [be = base.evaluate, x_ref](const Vec& th, double nu) {
    return be(th.head(4), nu) + th[4] * (nu - x_ref);
  };
  m.gradient = [bg = base.gradient, x_ref](const Vec& th, double nu, Eigen::Ref<Vec> g) {
    Vec g4(4);
    bg(th.head(4), nu, g4);
    g.head(4) = g4;
    g[4] = nu - x_ref;
  };
  m.initial_guess = nullptr;
  Vec d(5), lo(5), hi(5);
  d << base.default_theta, 0.0;
  lo << base.lower, -detail::inf;
  hi << base.upper, detail::inf;
  m.default_theta = d;
  m.lower = lo;
  m.upper = hi;
  return m;
}

}  // namespace afcsim::fit
