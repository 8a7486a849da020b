#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "afcsim/absorption.hpp"
#include "afcsim/comb.hpp"
#include "afcsim/decay.hpp"
#include "afcsim/evolve.hpp"
#include "afcsim/experiments/config.hpp"
#include "afcsim/fit/models.hpp"
#include "afcsim/readout.hpp"

namespace afcsim::experiments {

// Fig. 2: hole decays versus field ---------------------------------------------------------

struct FieldDecay {
  double field = 0.0;
  DecayCurve curve;
  fit::FitResult fit;
  double t_long_input = 0.0;  // flip-flop lifetime the simulation was run with
};

struct Fig2Report {
  std::vector<FieldDecay> fields;
  fit::FitResult field_fit;  // (Gamma_s, gamma_s) from the long rates
};

inline HoleDecaySettings hole_decay_settings(const ExperimentConfig& c) {
  HoleDecaySettings s;
  s.hole_center = c.fig2.hole_center;
  s.hole_width = c.fig2.hole_width;
  s.burn_duration = c.fig2.burn_duration;
  s.burn_power = c.fig2.burn_power;
  s.bin_width = c.bin_width;
  s.readout = {c.fig2.hole_center, c.fig2.read_span, 1e-3, c.fig2.repeats, c.fig2.noise_rel, c.seed};
  s.modulator = c.modulator;
  s.evolve = c.evolve;
  return s;
}

inline fit::DataSeries decay_series(const DecayCurve& curve) {
  fit::DataSeries d;
  for (const auto& p : curve.points) {
    d.x.push_back(p.delay);
    d.y.push_back(p.area);
    d.sigma.push_back(p.sigma);
  }
  return d;
}

inline Fig2Report run_fig2(const ExperimentConfig& c) {
  c.validate();
  require(!c.fig2.fields.empty(), ErrorCode::PreconditionViolated, "field list is empty");
  const auto delays = log_spaced(c.fig2.delay_min, c.fig2.delay_max, static_cast<std::size_t>(c.fig2.delay_count));
  const auto settings = hole_decay_settings(c);
  Fig2Report rep;
  fit::DataSeries rates;
  for (std::size_t k = 0; k < c.fig2.fields.size(); ++k) {
    const double B = c.fig2.fields[k];
    FieldDecay fd;
    fd.field = B;
    fd.t_long_input = flipflop_lifetime(B, c.material.temperature, c.material);
    fd.curve = hole_decay_experiment(B, delays, c.material, c.tls, c.seed + k, settings);
    fd.fit = fit::fit_curve(fit::model_double_exponential(), decay_series(fd.curve));
    const double tl = fd.fit.params[3];
    rates.x.push_back(B);
    rates.y.push_back(1.0 / tl);
    rates.sigma.push_back(1.0);
    rep.fields.push_back(std::move(fd));
  }
  if (rates.size() >= 2) {
    rep.field_fit = fit::fit_curve(fit::model_flipflop_field(c.material.alpha_ff, c.material.g_factor, c.material.temperature),
                                   rates);
  }
  return rep;
}

// Fig. 4: background versus comb bandwidth -------------------------------------------------

struct BandwidthPoint {
  double bandwidth = 0.0;
  std::size_t pits = 0;
  double d0 = 0.0;
};

struct Fig4Report {
  std::vector<BandwidthPoint> points;
};

inline FrequencyGrid comb_grid(double lo, double hi, double margin, double bin_width) {
  // Align the grid so bin edges fall on multiples of the bin width.
  const double a = std::floor((lo - margin) / bin_width) * bin_width;
  const double b = std::ceil((hi + margin) / bin_width) * bin_width;
  return FrequencyGrid(a, b, bin_width);
}

/// Mean OD over the pit cores (+-spacing/8) of the pits lying within +-halfwidth of zero.
inline double pit_background(const AbsorptionSpectrum& spec, const std::vector<PumpFeature>& pits, double spacing,
                             double halfwidth) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : pits) {
    if (std::abs(f.center) > halfwidth) continue;
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (std::abs(spec.detuning(i) - f.center) <= spacing / 8.0) {
        sum += spec.od[i];
        ++n;
      }
  }
  require(n > 0, ErrorCode::InvalidCombGeometry, "no pits inside the background window");
  return sum / static_cast<double>(n);
}

struct CombRun {
  EnsembleState state;
  AbsorptionSpectrum spectrum;  // over the whole simulated grid
  std::vector<PumpFeature> pits;
};

inline CombRun run_comb(const ExperimentConfig& c, const MaterialParams& p, double bandwidth, double separation = 0.0) {
  const auto& f = c.fig4;
  const FrequencyGrid grid = comb_grid(-separation - 0.5 * bandwidth, 0.5 * bandwidth, f.margin, c.bin_width);
  const auto s0 = init_equilibrium_state(grid, p);
  const auto seq = build_afc_pair_sequence(bandwidth, f.total_power, separation, f.spacing, f.pit_width, f.duration,
                                           f.idle, c.modulator);
  auto s = evolve_final(s0, seq, p, c.tls, c.evolve);
  auto spec = absorption_spectrum(s, p);
  return {std::move(s), std::move(spec), comb_features(bandwidth, f.spacing, f.pit_width, f.total_power)};
}

inline Fig4Report run_fig4(const ExperimentConfig& c, std::optional<double> peak_od = std::nullopt) {
  c.validate();
  const auto& f = c.fig4;
  require(!f.bandwidths.empty() && std::is_sorted(f.bandwidths.begin(), f.bandwidths.end()),
          ErrorCode::PreconditionViolated, "bandwidth list must be ascending");
  MaterialParams p = c.material;
  if (peak_od) p.peak_od = *peak_od;
  Fig4Report rep;
  for (double bw : f.bandwidths) {
    const auto run = run_comb(c, p, bw);
    rep.points.push_back({bw, run.pits.size(), pit_background(run.spectrum, run.pits, f.spacing, f.d0_halfwidth)});
  }
  return rep;
}

// Table 1: back-filling by a second comb -----------------------------------------------------

struct Table1Point {
  double detuning = 0.0;
  double d0 = 0.0;
};

struct Table1Report {
  std::vector<Table1Point> points;
  double antihole_offset = 0.0;
  double antihole_fwhm = 0.0;
};

inline Table1Report run_table1(const ExperimentConfig& c) {
  c.validate();
  MaterialParams p = c.material;
  p.peak_od = c.table1.peak_od;
  if (c.table1.forced_zeeman) p.zeeman_splitting_override = *c.table1.forced_zeeman;
  if (c.table1.forced_antihole_fwhm) p.antihole_fwhm_override = *c.table1.forced_antihole_fwhm;
  p.validate();
  Table1Report rep;
  rep.antihole_offset = antihole_offset(p);
  rep.antihole_fwhm = antihole_fwhm(p);
  for (double D : c.table1.detunings) {
    const auto run = run_comb(c, p, c.table1.bandwidth, D);
    rep.points.push_back({D, pit_background(run.spectrum, run.pits, c.fig4.spacing, c.fig4.d0_halfwidth)});
  }
  return rep;
}

// Fig. 5: pump-induced change of a probe hole --------------------------------------------

struct PumpProbePoint {
  double pump_power = 0.0;
  HoleMetrics probe;
  HoleMetrics pump;
};

struct Fig5Report {
  std::vector<PumpProbePoint> points;
};

inline PumpProbePoint run_fig5_point(const ExperimentConfig& c, double pump_power, const TlsParams& tls) {
  const auto& f = c.fig5;
  MaterialParams p = c.material;
  p.B_field = f.field;
  const FrequencyGrid grid(f.grid_min, f.grid_max, c.bin_width);
  const auto s0 = init_equilibrium_state(grid, p);
  const auto seq = build_two_hole_sequence(pump_power, f.probe_power, f.separation, f.hole_width, f.probe_center,
                                           f.burn_duration, f.idle, c.modulator);
  const auto s = evolve_final(s0, seq, p, tls, c.evolve);
  const auto spec = absorption_spectrum(s, p);
  const double half = 0.5 * f.separation;
  PumpProbePoint pt;
  pt.pump_power = pump_power;
  pt.probe = measure_hole(spec.window(f.probe_center - half, f.probe_center + half), f.probe_center, {f.hole_width, 0.0});
  const double pc = f.probe_center + f.separation;
  pt.pump = measure_hole(spec.window(pc - half, std::min(pc + half, grid.nu_max())), pc, {f.hole_width, 0.0});
  return pt;
}

inline Fig5Report run_fig5(const ExperimentConfig& c) {
  c.validate();
  require(!c.fig5.pump_powers.empty() && std::is_sorted(c.fig5.pump_powers.begin(), c.fig5.pump_powers.end()),
          ErrorCode::PreconditionViolated, "pump power list must be ascending");
  Fig5Report rep;
  for (double P : c.fig5.pump_powers) rep.points.push_back(run_fig5_point(c, P, c.tls));
  return rep;
}

// Efficiency prediction -----------------------------------------------------------------

struct EfficiencyReport {
  CombMetrics metrics;
  double efficiency = 0.0;
  double storage_time = 0.0;
  AbsorptionSpectrum section;
};

inline EfficiencyReport run_efficiency(const ExperimentConfig& c) {
  c.validate();
  const auto run = run_comb(c, c.material, c.efficiency.bandwidth);
  EfficiencyReport rep;
  rep.section = run.spectrum.window(-0.5 * c.efficiency.window, 0.5 * c.efficiency.window);
  rep.metrics = analyze_comb(rep.section, c.fig4.spacing);
  rep.efficiency = afc_efficiency(rep.metrics);
  rep.storage_time = storage_time(c.fig4.spacing);
  return rep;
}

}  // namespace afcsim::experiments
