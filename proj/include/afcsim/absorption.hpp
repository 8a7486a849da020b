#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "afcsim/constants.hpp"
#include "afcsim/ensemble.hpp"
#include "afcsim/error.hpp"
#include "afcsim/grid.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/material.hpp"

namespace afcsim {

/// Optical depth per bin, as read out by a frequency sweep after the excited state has decayed.
struct AbsorptionSpectrum {
  FrequencyGrid grid;
  std::vector<double> od;

  std::size_t size() const noexcept { return od.size(); }
  double detuning(std::size_t i) const noexcept { return grid.center(i); }

  /// Restriction to the bins covering [lo, hi].
  AbsorptionSpectrum window(double lo, double hi) const {
    FrequencyGrid sub = grid.subgrid(lo, hi);
    const auto first = static_cast<std::size_t>(std::llround(sub.offset_in_bins(grid)));
    return {sub, std::vector<double>(od.begin() + first, od.begin() + first + sub.size())};
  }
};

inline void write_csv(std::ostream& out, const AbsorptionSpectrum& spec) {
  out << "detuning_hz,od\n";
  for (std::size_t i = 0; i < spec.size(); ++i)
    out << io::format_double(spec.detuning(i)) << ',' << io::format_double(spec.od[i]) << '\n';
}

namespace detail {

// Probability mass of a unit-area line shape falling in [d - w/2, d + w/2].
inline double lorentzian_bin_mass(double d, double w, double fwhm) {
  const double h = 0.5 * fwhm;
  return (std::atan((d + 0.5 * w) / h) - std::atan((d - 0.5 * w) / h)) / constants::pi;
}

inline double gaussian_bin_mass(double d, double w, double fwhm) {
  const double s = fwhm / constants::fwhm_per_sigma * std::sqrt(2.0);
  const double lo = d - 0.5 * w, hi = d + 0.5 * w;
  // Evaluate on the tail side so far-offset kernels keep their precision.
  if (lo > 0.0) return 0.5 * (std::erfc(lo / s) - std::erfc(hi / s));
  if (hi < 0.0) return 0.5 * (std::erfc(-hi / s) - std::erfc(-lo / s));
  return 1.0 - 0.5 * (std::erfc(hi / s) + std::erfc(-lo / s));
}

/// Kernel tabulated against the integer offset k = j - i between evaluation bin j and source bin i.
struct ToeplitzKernel {
  std::vector<double> values;  // index k + (n_source - 1)
  std::ptrdiff_t first_nonzero = 0, last_nonzero = -1;
};

template <class Mass>
ToeplitzKernel tabulate(std::size_t n_source, std::size_t n_eval, double bin_width, double origin_offset,
                        double shift, Mass&& mass) {
  ToeplitzKernel k;
  const auto ns = static_cast<std::ptrdiff_t>(n_source), ne = static_cast<std::ptrdiff_t>(n_eval);
  k.values.assign(static_cast<std::size_t>(ns + ne - 1), 0.0);
  k.first_nonzero = static_cast<std::ptrdiff_t>(k.values.size());
  for (std::ptrdiff_t idx = 0; idx < ns + ne - 1; ++idx) {
    const double d = origin_offset + static_cast<double>(idx - (ns - 1)) * bin_width - shift;
    const double m = mass(d);
    k.values[static_cast<std::size_t>(idx)] = m;
    if (m != 0.0) {
      k.first_nonzero = std::min(k.first_nonzero, idx);
      k.last_nonzero = idx;
    }
  }
  return k;
}

}  // namespace detail

/// Absorption of `state` evaluated on `eval_grid` (same bin width as the state grid).
///
/// Ions outside the simulated window sit at equilibrium, so the spectrum is the ambient
/// n_g_eq * G(nu) plus the redistribution of each bin's deviation from equilibrium:
/// n_g deviations through the homogeneous Lorentzian, n_z deviations through the anti-hole Gaussian
/// displaced by the Zeeman splitting, and the superhyperfine shelf through a narrow Gaussian smear.
inline AbsorptionSpectrum absorption_spectrum(const EnsembleState& state, const MaterialParams& params,
                                              const FrequencyGrid& eval_grid) {
  const FrequencyGrid& src = state.grid;
  require(std::abs(eval_grid.bin_width() - src.bin_width()) <= 1e-9 * src.bin_width(), ErrorCode::InvalidRange,
          "evaluation grid must share the state's bin width");
  const double bw = src.bin_width();
  const double origin = eval_grid.nu_min() - src.nu_min();
  const std::size_t ns = src.size(), ne = eval_grid.size();

  const double gh = params.gamma_h_fwhm;
  const double ah_fwhm = antihole_fwhm(params);
  const double ah_shift = antihole_offset(params);
  const double shf_fwhm = params.shf_fwhm;

  auto lor = detail::tabulate(ns, ne, bw, origin, 0.0, [&](double d) { return detail::lorentzian_bin_mass(d, bw, gh); });
  auto anti = detail::tabulate(ns, ne, bw, origin, ah_shift,
                               [&](double d) { return detail::gaussian_bin_mass(d, bw, ah_fwhm); });
  auto shf = detail::tabulate(ns, ne, bw, origin, 0.0,
                              [&](double d) { return params.shf_weight * detail::gaussian_bin_mass(d, bw, shf_fwhm); });

  AbsorptionSpectrum out{eval_grid, std::vector<double>(ne)};
  for (std::size_t j = 0; j < ne; ++j) out.od[j] = state.ambient_weight(eval_grid.center(j)) * state.n_g_eq;

  auto accumulate = [&](const detail::ToeplitzKernel& ker, std::size_t i, double amplitude) {
    if (amplitude == 0.0 || ker.last_nonzero < ker.first_nonzero) return;
    const auto si = static_cast<std::ptrdiff_t>(i);
    const auto base = static_cast<std::ptrdiff_t>(ns) - 1 - si;  // values index = j + base
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, ker.first_nonzero - base);
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ne) - 1, ker.last_nonzero - base);
    const double* kv = ker.values.data() + base;
    for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) out.od[static_cast<std::size_t>(j)] += amplitude * kv[j];
  };

  for (std::size_t i = 0; i < ns; ++i) {
    const double w = state.weight[i];
    accumulate(lor, i, w * (state.n_g[i] - state.n_g_eq));
    accumulate(anti, i, w * (state.n_z[i] - state.n_z_eq));
    accumulate(shf, i, w * state.n_h[i]);
  }
  for (double& v : out.od) v = std::max(v, 0.0);
  return out;
}

inline AbsorptionSpectrum absorption_spectrum(const EnsembleState& state, const MaterialParams& params) {
  return absorption_spectrum(state, params, state.grid);
}

}  // namespace afcsim
