#pragma once

#include <cmath>

#include "afcsim/error.hpp"
#include "afcsim/material.hpp"

namespace afcsim {

/// Phenomenological coupling of laser-excited host two-level systems to the erbium spins.
///  kappa_fill: grating relaxation rate per watt of optical power driving the host (W^-1 s^-1)
///  kappa_diff: spectral-diffusion variance per joule of that power (Hz^2 / J)
struct TlsParams {
  double kappa_fill = 0.0;
  double kappa_diff = 0.0;

  void validate() const {
    require(std::isfinite(kappa_fill) && kappa_fill >= 0.0, ErrorCode::InvalidParameter, "kappa_fill must be >= 0");
    require(std::isfinite(kappa_diff) && kappa_diff >= 0.0, ErrorCode::InvalidParameter, "kappa_diff must be >= 0");
  }
  bool enabled() const noexcept { return kappa_fill > 0.0 || kappa_diff > 0.0; }
};

/// Spin flip-flop limited lifetime of the Zeeman shelf:
///   1/t = alpha / (Gamma_s + gamma_s B) * sech^2(g mu_B B / 2 k_B T)
inline double flipflop_rate(double B, double T_kelvin, const MaterialParams& p) {
  require(B >= 0.0, ErrorCode::NegativeField, "field must be >= 0");
  const double x = zeeman_thermal_ratio(B, T_kelvin, p.g_factor);
  const double width = p.Gamma_s + p.gamma_s * B;
  require(width > 0.0, ErrorCode::DegenerateModel, "spin inhomogeneous width vanishes");
  const double sech = 1.0 / std::cosh(x);
  return p.alpha_ff / width * sech * sech;
}

inline double flipflop_lifetime(double B, double T_kelvin, const MaterialParams& p) {
  const double rate = flipflop_rate(B, T_kelvin, p);
  require(rate > 0.0, ErrorCode::DegenerateModel, "flip-flop rate underflows at this field/temperature");
  return 1.0 / rate;
}

/// Instantaneous spectral diffusion width from a density of excited ions.
inline double isd_broadening(double excited_density, double C_isd) {
  require(excited_density >= 0.0 && C_isd >= 0.0, ErrorCode::NonPositiveInput, "inputs must be >= 0");
  return C_isd * excited_density;
}

/// Flip-flop rate extrapolated from a reference concentration. Dipolar pair rates go as r^-6 and
/// r ~ density^(-1/3), hence the default exponent 2.
inline double flipflop_rate_concentration(double density, double ref_density, double ref_rate,
                                          double exponent = 2.0) {
  require(density > 0.0 && ref_density > 0.0 && ref_rate > 0.0, ErrorCode::NonPositiveInput,
          "density, reference density and reference rate must be positive");
  return ref_rate * std::pow(density / ref_density, exponent);
}

/// Reference point for flipflop_rate_concentration: a 0.1% doped bulk crystal
/// (1.8e19 cm^-3) with a 1 Hz pair flip-flop rate. At the waveguide's 0.2% this gives 4 Hz.
inline constexpr double flipflop_reference_density = 1.8e19;
inline constexpr double flipflop_reference_rate = 1.0;

/// Rate at which the ground-state grating relaxes toward equilibrium under illumination.
inline double tls_fill_rate(double absorbed_power, const TlsParams& tls) {
  require(absorbed_power >= 0.0, ErrorCode::NonPositiveInput, "power must be >= 0");
  return tls.kappa_fill * absorbed_power;
}

/// Spectral-diffusion variance accumulated for a given deposited optical energy.
inline double tls_diffusion_variance(double absorbed_energy, const TlsParams& tls) {
  require(absorbed_energy >= 0.0, ErrorCode::NonPositiveInput, "energy must be >= 0");
  return tls.kappa_diff * absorbed_energy;
}

}  // namespace afcsim
