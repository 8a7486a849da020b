#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "afcsim/absorption.hpp"
#include "afcsim/constants.hpp"
#include "afcsim/ensemble.hpp"
#include "afcsim/error.hpp"
#include "afcsim/fit/least_squares.hpp"
#include "afcsim/fit/models.hpp"
#include "afcsim/material.hpp"

namespace afcsim {

struct ReadoutSettings {
  double center = 0.0;       // Hz, middle of the swept window
  double span = 100e6;       // Hz, width of the swept window
  double sweep_time = 1e-3;  // s per sweep; the probe is weak enough not to disturb the state
  int repeats = 20;
  double noise_rel = 0.0;    // per-sweep noise standard deviation relative to the peak OD
  std::uint64_t seed = 0;
};

/// Averages `repeats` noisy frequency sweeps of the spectrum over the window.
inline AbsorptionSpectrum simulate_readout(const EnsembleState& state, const MaterialParams& p,
                                           const ReadoutSettings& r) {
  require(r.repeats >= 1, ErrorCode::InvalidParameter, "repeats must be >= 1");
  require(r.span > 0.0 && r.sweep_time > 0.0, ErrorCode::InvalidParameter, "span and sweep time must be > 0");
  require(r.noise_rel >= 0.0, ErrorCode::InvalidParameter, "noise must be >= 0");
  const FrequencyGrid win = state.grid.subgrid(r.center - 0.5 * r.span, r.center + 0.5 * r.span);
  AbsorptionSpectrum spec = absorption_spectrum(state, p, win);
  if (r.noise_rel > 0.0) {
    std::mt19937_64 rng(r.seed);
    std::normal_distribution<double> normal(0.0, r.noise_rel * state.peak_od);
    for (double& v : spec.od) {
      double acc = 0.0;
      for (int k = 0; k < r.repeats; ++k) acc += v + normal(rng);
      v = acc / r.repeats;
    }
  }
  return spec;
}

struct HoleMetrics {
  double center = 0.0;    // Hz
  double depth = 0.0;     // OD
  double fwhm = 0.0;      // Hz
  double area = 0.0;      // OD Hz
  double baseline = 0.0;  // OD at the hole centre
  double area_sigma = 0.0;
};

struct HoleSearch {
  double search_halfwidth = 25e6;  // Hz around the guess where the minimum must lie
  double min_depth = 0.0;          // OD; 0 picks a threshold from the spectrum's own noise
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

// Noise level from first differences, robust to smooth structure.
inline double noise_level(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d;
  for (std::size_t i = 1; i < y.size(); ++i) d.push_back(std::abs(y[i] - y[i - 1]));
  return 1.4826 * median(d) / std::sqrt(2.0);
}

// Interpolated crossing of `level` walking outward from index i0 in direction dir.
inline bool crossing(const AbsorptionSpectrum& s, std::size_t i0, int dir, const std::function<double(double)>& level,
                     double& where) {
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(i0);
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  while (true) {
    const std::ptrdiff_t j = i + dir;
    if (j < 0 || j >= n) return false;
    const double xi = s.detuning(static_cast<std::size_t>(i)), xj = s.detuning(static_cast<std::size_t>(j));
    const double yi = s.od[static_cast<std::size_t>(i)] - level(xi);
    const double yj = s.od[static_cast<std::size_t>(j)] - level(xj);
    if (yi < 0.0 && yj >= 0.0) {
      where = xi + (xj - xi) * (-yi) / (yj - yi);
      return true;
    }
    i = j;
  }
}

}  // namespace detail

/// Locates the hole nearest the guess and fits a Lorentzian dip on a linear baseline
/// over +-2 estimated widths. Area is depth * (pi/2) * fwhm.
inline HoleMetrics measure_hole(const AbsorptionSpectrum& spec, double center_guess, const HoleSearch& opt = {}) {
  const std::size_t n = spec.size();
  if (n < 8) fail(ErrorCode::NoHoleFound, "spectrum too short");
  // Baseline through the mean of each edge (outer tenth of the window).
  const std::size_t edge = std::max<std::size_t>(2, n / 10);
  double xl = 0, yl = 0, xr = 0, yr = 0;
  for (std::size_t i = 0; i < edge; ++i) {
    xl += spec.detuning(i);
    yl += spec.od[i];
    xr += spec.detuning(n - 1 - i);
    yr += spec.od[n - 1 - i];
  }
  xl /= edge;
  yl /= edge;
  xr /= edge;
  yr /= edge;
  const double slope = (yr - yl) / (xr - xl);
  auto base = [&](double x) { return yl + slope * (x - xl); };

  std::size_t imin = n;
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = spec.detuning(i);
    if (std::abs(x - center_guess) > opt.search_halfwidth) continue;
    const double dip = base(x) - spec.od[i];
    if (imin == n || dip > best) {
      imin = i;
      best = dip;
    }
  }
  const double noise = detail::noise_level(spec.od);
  const double threshold = opt.min_depth > 0.0 ? opt.min_depth : std::max(5.0 * noise, 1e-9 * std::max(1.0, std::abs(yl)));
  if (imin == n || !(best > threshold)) fail(ErrorCode::NoHoleFound, "no dip near the guessed centre");

  const double x0 = spec.detuning(imin);
  auto half = [&](double x) { return base(x) - 0.5 * best; };
  double left = 0.0, right = 0.0;
  const bool hl = detail::crossing(spec, imin, -1, half, left);
  const bool hr = detail::crossing(spec, imin, +1, half, right);
  double fw_est;
  if (hl && hr) fw_est = right - left;
  else if (hl) fw_est = 2.0 * (x0 - left);
  else if (hr) fw_est = 2.0 * (right - x0);
  else fw_est = 0.5 * (spec.detuning(n - 1) - spec.detuning(0));
  fw_est = std::max(fw_est, 2.0 * spec.grid.bin_width());
  const double c_est = (hl && hr) ? 0.5 * (left + right) : x0;

  fit::DataSeries d;
  for (double reach = 2.0;; reach *= 1.5) {
    d = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double x = spec.detuning(i);
      if (std::abs(x - c_est) <= reach * fw_est) {
        d.x.push_back(x);
        d.y.push_back(spec.od[i]);
        d.sigma.push_back(1.0);
      }
    }
    if (d.size() >= 12 || reach > 50.0) break;
  }
  if (d.size() < 6) fail(ErrorCode::FitDiverged, "too few points across the hole");

  const auto model = fit::model_lorentzian_dip_linear(c_est);
  fit::FitOptions fo;
  fit::Vec th0(5);
  th0 << base(c_est), best, c_est, fw_est, slope;
  fo.theta0 = th0;
  fit::FitResult fr;
  try {
    fr = fit::fit_curve(model, d, fo);
  } catch (const Error& e) {
    fail(ErrorCode::FitDiverged, std::string("hole fit failed: ") + e.what());
  }
  const double depth = fr.params[1], fwhm = fr.params[3], center = fr.params[2];
  if (!(fwhm > 0.0) || !(depth > 0.0) || !std::isfinite(depth + fwhm + center) ||
      std::abs(center - c_est) > 2.0 * fw_est + opt.search_halfwidth)
    fail(ErrorCode::FitDiverged, "hole fit produced an unphysical result");

  HoleMetrics h;
  h.center = center;
  h.depth = depth;
  h.fwhm = fwhm;
  h.baseline = fr.params[0];
  h.area = depth * 0.5 * constants::pi * fwhm;
  // Standard error of the area, scaled by the residual scatter of the fit.
  const double dof = static_cast<double>(d.size()) - 5.0;
  const double s2 = dof > 0.0 ? fr.chi2 / dof : 0.0;
  const double ga = 0.5 * constants::pi * fwhm, gf = 0.5 * constants::pi * depth;
  const auto& C = fr.covariance;
  const double var = ga * ga * C(1, 1) + gf * gf * C(3, 3) + 2.0 * ga * gf * C(1, 3);
  h.area_sigma = std::sqrt(std::max(var * s2, 0.0));
  return h;
}

}  // namespace afcsim

namespace afcsim {

/// Depth of a hole with known centre and width: linear least squares of the Lorentzian
/// template on a sloped baseline. Stays usable when the hole is too shallow for a free fit.
inline HoleMetrics measure_hole_fixed_shape(const AbsorptionSpectrum& spec, double center, double fwhm,
                                            double reach = 2.0) {
  require(fwhm > 0.0, ErrorCode::InvalidParameter, "template width must be positive");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (std::abs(spec.detuning(i) - center) <= reach * fwhm) {
      xs.push_back(spec.detuning(i));
      ys.push_back(spec.od[i]);
    }
  if (xs.size() < 6) fail(ErrorCode::FitDiverged, "too few points across the hole");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  const double h = 0.5 * fwhm;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = xs[static_cast<std::size_t>(i)] - center;
    A(i, 0) = 1.0;
    A(i, 1) = -h * h / (d * d + h * h);
    A(i, 2) = d / fwhm;
    y[i] = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * c;
  const double s2 = res.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(n - 3, 1));
  const Eigen::MatrixXd cov = (A.transpose() * A).inverse() * s2;
  HoleMetrics m;
  m.center = center;
  m.fwhm = fwhm;
  m.baseline = c[0];
  m.depth = std::max(c[1], 0.0);
  m.area = m.depth * 0.5 * constants::pi * fwhm;
  m.area_sigma = std::sqrt(std::max(cov(1, 1), 0.0)) * 0.5 * constants::pi * fwhm;
  return m;
}

}  // namespace afcsim
