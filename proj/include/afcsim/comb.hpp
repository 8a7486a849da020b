#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "afcsim/absorption.hpp"
#include "afcsim/error.hpp"
#include "afcsim/readout.hpp"

namespace afcsim {

struct CombMetrics {
  double d_peak = 0.0;      // OD, median tooth maximum
  double d0 = 0.0;          // OD, median trough background
  double spacing = 0.0;     // Hz
  double tooth_fwhm = 0.0;  // Hz
  double finesse = 1.0;
  double bandwidth = 0.0;   // Hz covered by the detected teeth
  double phase = 0.0;       // Hz, position of a tooth centre modulo the spacing
  std::size_t teeth = 0;
};

struct CombAnalysisOptions {
  bool exclude_zero = true;         // skip the troughs near zero detuning (carrier hole)
  double detection_sigma = 6.0;     // harmonic amplitude needed, in units of its noise
};

/// Measures a periodic comb with known spacing. Teeth are found by folding the spectrum
/// modulo the spacing; widths come from half-maximum crossings between d0 and the tooth top.
inline CombMetrics analyze_comb(const AbsorptionSpectrum& spec, double spacing, const CombAnalysisOptions& opt = {}) {
  require(spacing > 0.0, ErrorCode::NonPositiveSpacing, "spacing must be positive");
  const double bw = spec.grid.bin_width();
  const double x0 = spec.grid.nu_min();
  const double x1 = spec.grid.nu_max();
  if (x1 - x0 < 3.0 * spacing * (1.0 - 1e-9)) fail(ErrorCode::NoCombDetected, "window shorter than three spacings");
  const auto per = static_cast<std::size_t>(std::max(4.0, std::round(spacing / bw)));

  // Fold: mean OD per phase bin.
  std::vector<double> sum(per, 0.0);
  std::vector<std::size_t> cnt(per, 0);
  auto phase_index = [&](double x) {
    double ph = std::fmod(x, spacing);
    if (ph < 0.0) ph += spacing;
    auto k = static_cast<std::size_t>(ph / spacing * static_cast<double>(per));
    return std::min(k, per - 1);
  };
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto k = phase_index(spec.detuning(i));
    sum[k] += spec.od[i];
    ++cnt[k];
  }
  std::vector<double> fold(per, 0.0);
  for (std::size_t k = 0; k < per; ++k) fold[k] = cnt[k] ? sum[k] / static_cast<double>(cnt[k]) : 0.0;
  double resid2 = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double r = spec.od[i] - fold[phase_index(spec.detuning(i))];
    resid2 += r * r;
  }
  const double N = static_cast<double>(spec.size());
  const double sigma = std::sqrt(resid2 / std::max(N - static_cast<double>(per), 1.0));
  // Detection: Fourier amplitude at the first harmonics of the spacing against white noise.
  double mean = 0.0;
  for (double v : spec.od) mean += v;
  mean /= N;
  double best_amp = 0.0;
  for (int k = 1; k <= 3; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double ang = 2.0 * constants::pi * k * spec.detuning(i) / spacing;
      re += (spec.od[i] - mean) * std::cos(ang);
      im += (spec.od[i] - mean) * std::sin(ang);
    }
    best_amp = std::max(best_amp, 2.0 / N * std::hypot(re, im));
  }
  const auto [mn, mx] = std::minmax_element(fold.begin(), fold.end());
  const double contrast = *mx - *mn;
  if (!(best_amp > opt.detection_sigma * sigma * std::sqrt(2.0 / N)) || contrast <= 0.0)
    fail(ErrorCode::NoCombDetected, "no periodic structure at the given spacing");

  // Tooth phase: centre of mass of the folded profile above its mid level (handles flat tops).
  const double mid = 0.5 * (*mx + *mn);
  const auto kmax = static_cast<std::size_t>(mx - fold.begin());
  double cs = 0.0, cc = 0.0;
  for (std::size_t k = 0; k < per; ++k) {
    const double w = std::max(fold[k] - mid, 0.0);
    const double ang = 2.0 * constants::pi * (static_cast<double>(k) - static_cast<double>(kmax)) / static_cast<double>(per);
    cs += w * std::sin(ang);
    cc += w * std::cos(ang);
  }
  double phase = (static_cast<double>(kmax) + 0.5 + std::atan2(cs, cc) / (2.0 * constants::pi) * static_cast<double>(per)) /
                 static_cast<double>(per) * spacing;
  phase = std::fmod(phase, spacing);
  if (phase < 0.0) phase += spacing;

  auto mean_over = [&](double lo, double hi) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double x = spec.detuning(i);
      if (x >= lo && x <= hi) {
        s += spec.od[i];
        ++c;
      }
    }
    return c ? s / static_cast<double>(c) : std::nan("");
  };
  auto max_over = [&](double lo, double hi) {
    double m = -1.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double x = spec.detuning(i);
      if (x >= lo && x <= hi) m = std::max(m, spec.od[i]);
    }
    return m;
  };

  // Tooth centres whose full period lies inside the window.
  std::vector<double> teeth;
  const double first = phase + spacing * std::floor((x0 - phase) / spacing);
  for (double c = first - spacing; c <= x1 + spacing; c += spacing)
    if (c - 0.5 * spacing >= x0 - 1e-9 * spacing && c + 0.5 * spacing <= x1 + 1e-9 * spacing) teeth.push_back(c);
  if (teeth.size() < 2) fail(ErrorCode::NoCombDetected, "fewer than two complete teeth in the window");

  std::vector<double> tops;
  for (double c : teeth) tops.push_back(max_over(c - 0.25 * spacing, c + 0.25 * spacing));
  const double d_peak_est = detail::median(tops);

  // Troughs midway between teeth (both sides of each tooth, deduplicated by construction).
  std::vector<double> trough_centres;
  for (double c : teeth) trough_centres.push_back(c - 0.5 * spacing);
  trough_centres.push_back(teeth.back() + 0.5 * spacing);

  auto trough_levels = [&](double exclude) {
    std::vector<double> v;
    for (double t : trough_centres) {
      if (opt.exclude_zero && std::abs(t) < exclude) continue;
      const double m = mean_over(t - spacing / 8.0, t + spacing / 8.0);
      if (std::isfinite(m)) v.push_back(m);
    }
    return v;
  };
  auto troughs = trough_levels(0.25 * spacing);
  if (troughs.empty()) troughs = trough_levels(0.0);
  double d0 = detail::median(troughs);

  auto widths = [&](double floor_level) {
    std::vector<double> v;
    for (std::size_t t = 0; t < teeth.size(); ++t) {
      const double c = teeth[t];
      const double level = 0.5 * (tops[t] + floor_level);
      // Walk outward from the tooth maximum to the half level on each side.
      const std::size_t lo_i = spec.grid.index_of(c - 0.5 * spacing), hi_i = spec.grid.index_of(c + 0.5 * spacing);
      std::size_t imax = lo_i;
      for (std::size_t i = lo_i; i <= hi_i; ++i)
        if (std::abs(spec.detuning(i) - c) <= 0.25 * spacing && spec.od[i] > spec.od[imax]) imax = i;
      auto cross = [&](int dir, double& where) {
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(imax);
        while (true) {
          const std::ptrdiff_t j = i + dir;
          if (j < static_cast<std::ptrdiff_t>(lo_i) || j > static_cast<std::ptrdiff_t>(hi_i)) return false;
          const double yi = spec.od[static_cast<std::size_t>(i)] - level, yj = spec.od[static_cast<std::size_t>(j)] - level;
          if (yi >= 0.0 && yj < 0.0) {
            const double xi = spec.detuning(static_cast<std::size_t>(i)), xj = spec.detuning(static_cast<std::size_t>(j));
            where = xi + (xj - xi) * yi / (yi - yj);
            return true;
          }
          i = j;
        }
      };
      double l = 0, r = 0;
      if (cross(-1, l) && cross(+1, r)) v.push_back(r - l);
    }
    return v;
  };
  auto w = widths(d0);
  double fwhm = w.empty() ? spacing : detail::median(w);
  // Refine the carrier exclusion with the measured width.
  if (opt.exclude_zero) {
    auto t2 = trough_levels(2.0 * fwhm);
    if (!t2.empty()) {
      d0 = detail::median(t2);
      w = widths(d0);
      if (!w.empty()) fwhm = detail::median(w);
    }
  }
  fwhm = std::clamp(fwhm, bw, spacing);

  CombMetrics m;
  m.spacing = spacing;
  m.d0 = std::max(d0, 0.0);
  m.d_peak = std::max(d_peak_est, m.d0);
  m.tooth_fwhm = fwhm;
  m.finesse = std::max(1.0, spacing / fwhm);
  m.teeth = teeth.size();
  m.bandwidth = static_cast<double>(teeth.size()) * spacing;
  m.phase = phase;
  return m;
}

inline double storage_time(double spacing) {
  require(spacing > 0.0, ErrorCode::NonPositiveSpacing, "spacing must be positive");
  return 1.0 / spacing;
}

/// Forward-recall efficiency with effective depth (d_peak - d0) / F.
inline double afc_efficiency(const CombMetrics& m) {
  require(m.finesse >= 1.0 && m.d0 >= 0.0 && m.d_peak >= m.d0, ErrorCode::InvalidParameter, "invalid comb metrics");
  const double dt = (m.d_peak - m.d0) / m.finesse;
  return dt * dt * std::exp(-dt) * std::exp(-7.0 / (m.finesse * m.finesse)) * std::exp(-m.d0);
}

inline double afc_efficiency(double d_peak, double d0, double finesse) {
  CombMetrics m;
  m.d_peak = d_peak;
  m.d0 = d0;
  m.finesse = finesse;
  return afc_efficiency(m);
}

}  // namespace afcsim
