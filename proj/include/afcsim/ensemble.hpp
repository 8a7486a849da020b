#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "afcsim/constants.hpp"
#include "afcsim/error.hpp"
#include "afcsim/grid.hpp"
#include "afcsim/material.hpp"

namespace afcsim {

/// Shape of the optical inhomogeneous line, normalised so its maximum is 1.
/// Flat is the default: the simulated window is tiny next to the full erbium line.
struct InhomogeneousProfile {
  enum class Kind { Flat, Gaussian };
  Kind kind = Kind::Flat;
  double fwhm = 0.0;    // Hz, Gaussian only
  double center = 0.0;  // Hz

  static InhomogeneousProfile flat() { return {}; }
  static InhomogeneousProfile gaussian(double fwhm, double center = 0.0) {
    require(fwhm > 0.0, ErrorCode::InvalidParameter, "profile width must be positive");
    return {Kind::Gaussian, fwhm, center};
  }

  double shape(double nu) const noexcept {
    if (kind == Kind::Flat) return 1.0;
    const double s = fwhm / constants::fwhm_per_sigma;
    const double x = (nu - center) / s;
    return std::exp(-0.5 * x * x);
  }
};

/// Per-bin population fractions of the four level classes.
///  n_g: ground sub-level addressed by the laser
///  n_z: the other Zeeman sub-level (long-lived shelf)
///  n_h: superhyperfine shelf (short-lived)
///  n_e: optically excited
/// Each bin's fractions sum to one. weight[i] is the bin's OD when fully in n_g.
struct EnsembleState {
  FrequencyGrid grid;
  InhomogeneousProfile profile;
  double peak_od = 0.0;
  double n_g_eq = 1.0;
  double n_z_eq = 0.0;
  std::vector<double> weight;
  std::vector<double> n_g, n_z, n_h, n_e;

  std::size_t size() const noexcept { return grid.size(); }

  double ambient_weight(double nu) const noexcept { return peak_od * profile.shape(nu); }

  double max_conservation_error() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      worst = std::max(worst, std::abs(n_g[i] + n_z[i] + n_h[i] + n_e[i] - 1.0));
    return worst;
  }

  bool populations_in_unit_interval(double tol = 1e-12) const noexcept {
    for (std::size_t i = 0; i < size(); ++i)
      for (double v : {n_g[i], n_z[i], n_h[i], n_e[i]})
        if (!(v >= -tol && v <= 1.0 + tol)) return false;
    return true;
  }

  void check_finite() const {
    for (std::size_t i = 0; i < size(); ++i)
      if (!std::isfinite(n_g[i] + n_z[i] + n_h[i] + n_e[i]))
        fail(ErrorCode::NonFiniteState, "population became non-finite in bin " + std::to_string(i));
  }
};

/// Thermal state before any burning: everyone in the ground doublet, Boltzmann split.
inline EnsembleState init_equilibrium_state(const FrequencyGrid& grid, const MaterialParams& params,
                                            const InhomogeneousProfile& profile = InhomogeneousProfile::flat()) {
  params.validate();
  const double p = boltzmann_polarization(params.B_field, params.temperature, params.g_factor);
  EnsembleState s{grid, profile, params.peak_od, 0.5 * (1.0 + p), 0.5 * (1.0 - p), {}, {}, {}, {}, {}};
  const std::size_t n = grid.size();
  s.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.weight[i] = s.ambient_weight(grid.center(i));
  s.n_g.assign(n, s.n_g_eq);
  s.n_z.assign(n, s.n_z_eq);
  s.n_h.assign(n, 0.0);
  s.n_e.assign(n, 0.0);
  return s;
}

}  // namespace afcsim
