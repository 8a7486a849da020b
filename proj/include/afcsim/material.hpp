#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "afcsim/constants.hpp"
#include "afcsim/error.hpp"

namespace afcsim {

/// Material and spectroscopic constants of the erbium ensemble. SI units throughout.
struct MaterialParams {
  double g_factor = 15.13;
  double T1_opt = 2.1e-3;      // s, optical population lifetime
  double t_short = 0.06;       // s, superhyperfine shelf lifetime
  double alpha_ff = 1e9;       // s^-2, flip-flop scaling coefficient
  double Gamma_s = 0.4e9;      // Hz, static spin inhomogeneous width
  double gamma_s = 14.5e9;     // Hz/T, field-dependent spin inhomogeneous width
  double gamma_h_fwhm = 0.2e6; // Hz, homogeneous linewidth
  double beta_zeeman = 0.4;    // excited-state branching into the other Zeeman sub-level
  double beta_shf = 0.1;       // excited-state branching into the superhyperfine shelf
  double peak_od = 2.0;
  double er_density = 3.6e19;  // cm^-3
  double C_isd = 2e-13;        // Hz cm^3 per excited ion
  double temperature = 0.7;    // K
  double B_field = 0.3;        // T

  double shf_fwhm = 50e6;      // Hz, smear of the superhyperfine shelf absorption
  double shf_weight = 0.5;     // fraction of shelved ions that still absorb inside that smear
  double pump_rate_per_psd = 1e15;  // s^-1 per (W/Hz): optical pumping rate per power spectral density

  // Positive controls only: replace the physical anti-hole position and width.
  std::optional<double> zeeman_splitting_override;
  std::optional<double> antihole_fwhm_override;

  void validate() const {
    auto positive = [](double v, const char* name) {
      require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidParameter, std::string(name) + " must be positive");
    };
    positive(g_factor, "g_factor");
    positive(T1_opt, "T1_opt");
    positive(t_short, "t_short");
    positive(alpha_ff, "alpha_ff");
    positive(gamma_h_fwhm, "gamma_h_fwhm");
    positive(peak_od, "peak_od");
    positive(er_density, "er_density");
    positive(C_isd, "C_isd");
    positive(shf_fwhm, "shf_fwhm");
    positive(pump_rate_per_psd, "pump_rate_per_psd");
    require(std::isfinite(temperature) && temperature > 0.0, ErrorCode::NonPositiveTemperature,
            "temperature must be positive");
    require(std::isfinite(B_field) && B_field >= 0.0, ErrorCode::NegativeField, "B_field must be >= 0");
    require(Gamma_s >= 0.0 && gamma_s >= 0.0 && Gamma_s + gamma_s > 0.0, ErrorCode::InvalidParameter,
            "spin inhomogeneous widths must be >= 0 and not both zero");
    require(beta_zeeman >= 0.0 && beta_shf >= 0.0 && beta_zeeman + beta_shf <= 1.0, ErrorCode::InvalidParameter,
            "branching fractions must lie in [0,1] and sum to <= 1");
    require(shf_weight >= 0.0 && shf_weight <= 1.0, ErrorCode::InvalidParameter, "shf_weight must lie in [0,1]");
    if (zeeman_splitting_override)
      require(*zeeman_splitting_override >= 0.0, ErrorCode::InvalidParameter, "splitting override must be >= 0");
    if (antihole_fwhm_override)
      require(*antihole_fwhm_override > 0.0, ErrorCode::InvalidParameter, "anti-hole width override must be > 0");
  }
};

/// g mu_B B / h.
inline double zeeman_splitting(double B, double g) {
  require(B >= 0.0, ErrorCode::NegativeField, "field must be >= 0");
  return g * constants::bohr_magneton * B / constants::planck;
}

/// Gamma_s + gamma_s B.
inline double spin_inhom_width(double B, double Gamma_s, double gamma_s) {
  require(B >= 0.0, ErrorCode::NegativeField, "field must be >= 0");
  require(Gamma_s >= 0.0 && gamma_s >= 0.0, ErrorCode::InvalidParameter, "widths must be >= 0");
  return Gamma_s + gamma_s * B;
}

/// Half the Zeeman energy over k_B T; the argument of both tanh and sech^2.
inline double zeeman_thermal_ratio(double B, double T_kelvin, double g) {
  require(T_kelvin > 0.0, ErrorCode::NonPositiveTemperature, "temperature must be positive");
  return g * constants::bohr_magneton * B / (2.0 * constants::boltzmann * T_kelvin);
}

/// Thermal polarization of the ground doublet. Lower level holds (1+p)/2.
/// Odd in B, so negative fields are accepted here.
inline double boltzmann_polarization(double B, double T_kelvin, double g) {
  return std::tanh(zeeman_thermal_ratio(B, T_kelvin, g));
}

/// Anti-hole offset actually used by the spectrum model.
inline double antihole_offset(const MaterialParams& p) {
  return p.zeeman_splitting_override.value_or(zeeman_splitting(p.B_field, p.g_factor));
}

inline double antihole_fwhm(const MaterialParams& p) {
  return p.antihole_fwhm_override.value_or(spin_inhom_width(p.B_field, p.Gamma_s, p.gamma_s));
}

}  // namespace afcsim
