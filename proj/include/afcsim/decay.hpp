#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcsim/comb.hpp"
#include "afcsim/error.hpp"
#include "afcsim/evolve.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/readout.hpp"

namespace afcsim {

struct DecayPoint {
  double delay = 0.0;  // s after the end of the burn
  double area = 0.0;   // OD Hz
  double sigma = 0.0;  // OD Hz
};

struct DecayCurve {
  std::vector<DecayPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      require(points[i].area >= 0.0, ErrorCode::InvalidParameter, "hole areas must be >= 0");
      if (i > 0)
        require(points[i].delay > points[i - 1].delay, ErrorCode::InvalidParameter, "delays must increase strictly");
    }
  }
};

inline void write_csv(std::ostream& out, const DecayCurve& c) {
  out << "delay_s,area_od_hz,sigma\n";
  for (const auto& p : c.points)
    out << io::format_double(p.delay) << ',' << io::format_double(p.area) << ',' << io::format_double(p.sigma) << '\n';
}

inline nlohmann::json to_json(const DecayCurve& c) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : c.points) a.push_back({{"delay_s", p.delay}, {"area_od_hz", p.area}, {"sigma", p.sigma}});
  return a;
}

struct HoleDecaySettings {
  double hole_center = 250e6;  // Hz
  double hole_width = 25e6;    // Hz
  double burn_duration = 0.3;  // s
  double burn_power = 3e-6;    // W
  double bin_width = 0.5e6;    // Hz
  ReadoutSettings readout{250e6, 100e6, 1e-3, 20, 0.0, 0};
  ModulatorParams modulator{};
  EvolveOptions evolve{};
  // Fit the centre and width only at the first delay and reuse them afterwards.
  // The hole keeps its shape while it decays, and late, shallow holes stay measurable.
  bool template_shape = true;
};

/// Burn a hole, wait in the dark for each delay, read it out and measure its area.
/// The field given here overrides p.B_field.
inline DecayCurve hole_decay_experiment(double B, const std::vector<double>& delays, MaterialParams p,
                                        const TlsParams& tls, std::uint64_t seed, const HoleDecaySettings& cfg = {}) {
  require(!delays.empty(), ErrorCode::PreconditionViolated, "no delays given");
  for (std::size_t i = 0; i < delays.size(); ++i) {
    require(delays[i] > 5.0 * p.T1_opt, ErrorCode::PreconditionViolated,
            "delays must exceed five optical lifetimes");
    if (i > 0) require(delays[i] > delays[i - 1], ErrorCode::PreconditionViolated, "delays must increase strictly");
  }
  p.B_field = B;
  p.validate();
  const double half = 0.5 * cfg.readout.span;
  const FrequencyGrid grid(cfg.readout.center - half - 2.0 * cfg.hole_width, cfg.readout.center + half + 2.0 * cfg.hole_width,
                           cfg.bin_width);
  const auto s0 = init_equilibrium_state(grid, p);
  auto seq = build_hole_sequence(cfg.burn_power, cfg.hole_center, cfg.burn_duration, cfg.hole_width, delays.back(),
                                 cfg.modulator);
  std::vector<double> times;
  for (double d : delays) times.push_back(cfg.burn_duration + d);
  const auto tr = evolve(s0, seq, p, tls, times, cfg.evolve);

  DecayCurve out;
  HoleMetrics first;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    ReadoutSettings r = cfg.readout;
    r.seed = seed * 1000003ULL + i;
    const auto spec = simulate_readout(tr.states[i], p, r);
    HoleMetrics h;
    if (i == 0 || !cfg.template_shape) {
      h = measure_hole(spec, cfg.hole_center, {cfg.hole_width, 0.0});
      if (i == 0) first = h;
    } else {
      h = measure_hole_fixed_shape(spec, first.center, first.fwhm);
    }
    out.points.push_back({delays[i], h.area, std::max(h.area_sigma, 1e-12 * std::max(h.area, first.area))});
  }
  out.validate();
  return out;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo && n >= 2, ErrorCode::InvalidParameter, "need 0 < lo < hi and n >= 2");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  v.back() = hi;
  return v;
}

}  // namespace afcsim
