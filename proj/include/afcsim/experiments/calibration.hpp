#pragma once

#include <cmath>
#include <functional>

#include "afcsim/experiments/scenarios.hpp"

namespace afcsim::experiments {

struct CalibrationTargets {
  double probe_depth_ratio = 1.0 / 3.0;  // max-power / min-power probe depth
  double probe_width_increase = 5e6;     // Hz, max-power minus min-power probe width
  double ratio_tol = 2e-4;
  double width_tol = 0.01e6;
};

struct CalibrationResult {
  TlsParams tls;
  double probe_depth_ratio = 0.0;
  double probe_width_increase = 0.0;
  int evaluations = 0;
};

struct PumpProbeSummary {
  double depth_ratio = 0.0;
  double width_increase = 0.0;
  double pump_depth_ratio = 0.0;
};

inline PumpProbeSummary pump_probe_summary(const ExperimentConfig& c, const TlsParams& tls) {
  const auto lo = run_fig5_point(c, c.fig5.pump_powers.front(), tls);
  const auto hi = run_fig5_point(c, c.fig5.pump_powers.back(), tls);
  return {hi.probe.depth / lo.probe.depth, hi.probe.fwhm - lo.probe.fwhm, hi.pump.depth / lo.pump.depth};
}

namespace detail {

// Root of a monotone f on [a, b] in log coordinates by the Illinois variant of regula falsi.
inline double log_root(const std::function<double(double)>& f, double a, double b, double ftol, int max_iter = 40) {
  double la = std::log(a), lb = std::log(b);
  double fa = f(a), fb = f(b);
  if (fa * fb > 0.0) return std::abs(fa) < std::abs(fb) ? a : b;
  int side = 0;
  for (int i = 0; i < max_iter; ++i) {
    const double lc = (la * fb - lb * fa) / (fb - fa);
    const double fc = f(std::exp(lc));
    if (std::abs(fc) <= ftol) return std::exp(lc);
    if (fc * fb > 0.0) {
      lb = lc;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      la = lc;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(lb - la) < 1e-10) break;
  }
  return std::exp(0.5 * (la + lb));
}

}  // namespace detail

/// Fixes kappa_fill from the probe-depth ratio and kappa_diff from the probe-width increase.
/// The inner solve matches the ratio for a trial kappa_diff; the outer one matches the width.
inline CalibrationResult calibrate_tls(const ExperimentConfig& c, const CalibrationTargets& t = {},
                                       double kd_lo = 3e18, double kd_hi = 2e20, double kf_lo = 1e3, double kf_hi = 1e6) {
  c.validate();
  CalibrationResult out;
  auto fill_for = [&](double kd) {
    auto f = [&](double kf) {
      ++out.evaluations;
      return pump_probe_summary(c, {kf, kd}).depth_ratio - t.probe_depth_ratio;
    };
    return detail::log_root(f, kf_lo, kf_hi, t.ratio_tol);
  };
  auto g = [&](double kd) {
    const double kf = fill_for(kd);
    ++out.evaluations;
    return pump_probe_summary(c, {kf, kd}).width_increase - t.probe_width_increase;
  };
  const double kd = detail::log_root(g, kd_lo, kd_hi, t.width_tol);
  out.tls = {fill_for(kd), kd};
  const auto s = pump_probe_summary(c, out.tls);
  out.probe_depth_ratio = s.depth_ratio;
  out.probe_width_increase = s.width_increase;
  return out;
}

}  // namespace afcsim::experiments
