#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "afcsim/constants.hpp"
#include "afcsim/grid.hpp"
#include "afcsim/material.hpp"
#include "afcsim/pump_sequence.hpp"

namespace afcsim {

namespace detail {

// Antiderivative of the top-hat (unit height, width w) convolved with a Lorentzian of
// half width a, as a function of detuning u from the feature centre.
inline double tophat_lorentz_cdf(double u, double w, double a) {
  auto F = [a](double x) {
    const double r = x / a;
    return x * std::atan(r) - 0.5 * a * std::log1p(r * r);
  };
  return (F(u + 0.5 * w) - F(u - 0.5 * w)) / constants::pi;
}

// Antiderivative of a Gaussian with FWHM w scaled so its integral equals w.
inline double gaussian_cdf_scaled(double u, double w) {
  const double sigma = w / constants::fwhm_per_sigma;
  return 0.5 * w * std::erf(u / (std::sqrt(2.0) * sigma));
}

}  // namespace detail

/// Bin-averaged normalized shape of a feature (integral over frequency equals width).
inline double feature_shape_bin_average(double lo, double hi, const PumpFeature& f, PitShape shape, double gamma_h) {
  const double u0 = lo - f.center;
  const double u1 = hi - f.center;
  if (shape == PitShape::Gaussian) {
    const double gw = std::sqrt(f.width * f.width + gamma_h * gamma_h);
    const double scale = f.width / gw;
    return scale * (detail::gaussian_cdf_scaled(u1, gw) - detail::gaussian_cdf_scaled(u0, gw)) / (hi - lo);
  }
  const double a = 0.5 * gamma_h;
  return (detail::tophat_lorentz_cdf(u1, f.width, a) - detail::tophat_lorentz_cdf(u0, f.width, a)) / (hi - lo);
}

/// Optical pumping rate per bin (s^-1). Each feature contributes
/// pump_rate_per_psd * power / width times its shape; the carrier leak is a
/// homogeneous-width feature at zero detuning.
inline std::vector<double> pump_rate_profile(const PumpSegment& seg, const FrequencyGrid& grid, const MaterialParams& p) {
  std::vector<double> rate(grid.size(), 0.0);
  const double bw = grid.bin_width();
  auto add = [&](const PumpFeature& f, PitShape shape) {
    if (f.power <= 0.0) return;
    const double r0 = p.pump_rate_per_psd * f.power / f.width;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lo = grid.nu_min() + static_cast<double>(i) * bw;
      rate[i] += r0 * feature_shape_bin_average(lo, lo + bw, f, shape, p.gamma_h_fwhm);
    }
  };
  for (const auto& f : seg.features) add(f, seg.shape);
  if (seg.carrier_power() > 0.0) add({0.0, p.gamma_h_fwhm, seg.carrier_power()}, PitShape::TopHat);
  for (auto& r : rate)
    if (r < 0.0) r = 0.0;
  return rate;
}

/// Steady-state excited fraction of a driven two-level bin.
inline double steady_state_excited_fraction(double rate, double T1) {
  const double s = rate * T1;
  return s / (1.0 + 2.0 * s);
}

}  // namespace afcsim
