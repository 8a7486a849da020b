#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcsim/error.hpp"

namespace afcsim {

enum class PitShape { TopHat, Gaussian };

inline std::string to_string(PitShape s) { return s == PitShape::TopHat ? "top-hat" : "gaussian"; }
inline PitShape pit_shape_from_string(const std::string& s) {
  if (s == "top-hat" || s == "tophat") return PitShape::TopHat;
  if (s == "gaussian") return PitShape::Gaussian;
  fail(ErrorCode::ParseError, "unknown pit shape '" + s + "'");
}

/// One burned spectral feature. `power` is what reaches the feature after the modulator.
struct PumpFeature {
  double center = 0.0;  // Hz
  double width = 0.0;   // Hz
  double power = 0.0;   // W
};

struct PumpSegment {
  double duration = 0.0;               // s
  std::vector<PumpFeature> features;
  double carrier_leak = 0.0;           // fraction of incident power left at zero detuning
  double incident_power = 0.0;         // W launched into the waveguide during the segment
  PitShape shape = PitShape::TopHat;

  double carrier_power() const noexcept { return carrier_leak * incident_power; }

  void validate() const {
    require(std::isfinite(duration) && duration > 0.0, ErrorCode::InvalidParameter, "segment duration must be > 0");
    require(carrier_leak >= 0.0 && carrier_leak <= 1.0, ErrorCode::InvalidParameter, "carrier leak must lie in [0,1]");
    require(incident_power >= 0.0, ErrorCode::InvalidParameter, "incident power must be >= 0");
    double delivered = carrier_power();
    for (const auto& f : features) {
      require(std::isfinite(f.center), ErrorCode::InvalidParameter, "feature centre must be finite");
      require(f.width > 0.0, ErrorCode::InvalidParameter, "feature widths must be > 0");
      require(f.power >= 0.0, ErrorCode::InvalidParameter, "feature powers must be >= 0");
      delivered += f.power;
    }
    require(delivered <= incident_power * (1.0 + 1e-12) + 1e-300, ErrorCode::InvalidParameter,
            "features carry more power than was launched");
  }
};

/// Timed pumping segments followed by a dark wait.
struct PumpSequence {
  std::vector<PumpSegment> segments;
  double idle_duration = 0.0;  // s

  double pumping_duration() const noexcept {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
  double total_duration() const noexcept { return pumping_duration() + idle_duration; }

  void validate() const {
    require(!segments.empty() || idle_duration > 0.0, ErrorCode::InvalidParameter, "sequence is empty");
    require(idle_duration >= 0.0, ErrorCode::InvalidParameter, "idle duration must be >= 0");
    for (const auto& s : segments) s.validate();
    require(total_duration() > 0.0, ErrorCode::InvalidParameter, "sequence has zero duration");
  }
};

/// Serrodyne phase modulator. The first-order sideband efficiency falls linearly
/// with detuning; a share of the lost power stays on the carrier.
struct ModulatorParams {
  double eff_at_1ghz = 0.5;
  double carrier_share = 0.005;
  PitShape shape = PitShape::TopHat;
};

inline double serrodyne_efficiency(double detuning, double eff_at_1ghz = 0.5) {
  require(detuning >= 0.0, ErrorCode::InvalidParameter, "detuning must be >= 0");
  require(eff_at_1ghz >= 0.0 && eff_at_1ghz <= 1.0, ErrorCode::InvalidParameter, "efficiency must lie in [0,1]");
  const double eff = 1.0 - (1.0 - eff_at_1ghz) * detuning / 1e9;
  return eff > 0.0 ? eff : 0.0;
}

/// Applies the modulator to nominal (centre, width, power) requests.
inline PumpSegment modulated_segment(double duration, const std::vector<PumpFeature>& nominal,
                                     const ModulatorParams& mod) {
  PumpSegment seg;
  seg.duration = duration;
  seg.shape = mod.shape;
  double leak = 0.0;
  for (const auto& f : nominal) {
    const double eff = serrodyne_efficiency(std::abs(f.center), mod.eff_at_1ghz);
    seg.features.push_back({f.center, f.width, f.power * eff});
    seg.incident_power += f.power;
    leak += (1.0 - eff) * f.power * mod.carrier_share;
  }
  seg.carrier_leak = seg.incident_power > 0.0 ? leak / seg.incident_power : 0.0;
  return seg;
}

inline PumpSequence build_hole_sequence(double power, double detuning = 250e6, double burn_duration = 0.3,
                                        double hole_width = 25e6, double idle = 0.0,
                                        const ModulatorParams& mod = {}) {
  require(power > 0.0, ErrorCode::NonPositivePower, "burn power must be positive");
  require(hole_width > 0.0 && burn_duration > 0.0, ErrorCode::InvalidParameter, "hole width and duration must be > 0");
  PumpSequence seq{{modulated_segment(burn_duration, {{detuning, hole_width, power}}, mod)}, idle};
  seq.validate();
  return seq;
}

/// Comb of pits at centre + (j - (n-1)/2) * spacing, n = round(bandwidth / spacing),
/// sharing total_power equally so the pumping energy does not depend on bandwidth.
inline std::vector<PumpFeature> comb_features(double bandwidth, double spacing, double pit_width, double total_power,
                                              double center = 0.0) {
  require(spacing > 0.0 && bandwidth >= spacing * (1.0 - 1e-12), ErrorCode::InvalidCombGeometry,
          "comb bandwidth must be at least one spacing");
  require(pit_width > 0.0 && pit_width < spacing, ErrorCode::InvalidCombGeometry, "pits must be narrower than the spacing");
  require(total_power >= 0.0, ErrorCode::InvalidParameter, "power must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(bandwidth / spacing));
  std::vector<PumpFeature> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double offset = (static_cast<double>(j) - 0.5 * static_cast<double>(n - 1)) * spacing;
    out.push_back({center + offset, pit_width, total_power / static_cast<double>(n)});
  }
  return out;
}

inline PumpSequence build_afc_sequence(double bandwidth, double total_power, double spacing = 50e6,
                                       double pit_width = 25e6, double total_duration = 0.3, double idle = 0.03,
                                       const ModulatorParams& mod = {}) {
  require(total_power > 0.0, ErrorCode::NonPositivePower, "comb power must be positive");
  PumpSequence seq{{modulated_segment(total_duration, comb_features(bandwidth, spacing, pit_width, total_power), mod)},
                   idle};
  seq.validate();
  return seq;
}

/// Two combs burned together from one source, sharing total_power. The second comb is
/// displaced by -separation (the side whose anti-holes land on the first one).
/// separation == 0 puts both on the same frequencies, i.e. a single comb at total_power.
inline PumpSequence build_afc_pair_sequence(double bandwidth, double total_power, double separation,
                                            double spacing = 50e6, double pit_width = 25e6,
                                            double total_duration = 0.3, double idle = 0.03,
                                            const ModulatorParams& mod = {}) {
  require(total_power > 0.0, ErrorCode::NonPositivePower, "comb power must be positive");
  require(separation >= 0.0, ErrorCode::InvalidCombGeometry, "separation must be >= 0");
  require(separation == 0.0 || separation >= bandwidth, ErrorCode::InvalidCombGeometry, "paired combs must not overlap");
  if (separation == 0.0) return build_afc_sequence(bandwidth, total_power, spacing, pit_width, total_duration, idle, mod);
  auto features = comb_features(bandwidth, spacing, pit_width, 0.5 * total_power);
  auto second = comb_features(bandwidth, spacing, pit_width, 0.5 * total_power, -separation);
  features.insert(features.end(), second.begin(), second.end());
  PumpSequence seq{{modulated_segment(total_duration, features, mod)}, idle};
  seq.validate();
  return seq;
}

/// Probe hole at probe_center, pump hole at probe_center + separation.
inline PumpSequence build_two_hole_sequence(double pump_power, double probe_power, double separation = 200e6,
                                            double hole_width = 25e6, double probe_center = 250e6,
                                            double burn_duration = 0.3, double idle = 0.03,
                                            const ModulatorParams& mod = {}) {
  require(pump_power >= 0.0 && probe_power >= 0.0, ErrorCode::InvalidParameter, "powers must be >= 0");
  require(hole_width > 0.0 && separation > hole_width, ErrorCode::InvalidGeometry,
          "hole separation must exceed the hole width");
  PumpSequence seq{{modulated_segment(burn_duration,
                                      {{probe_center, hole_width, probe_power},
                                       {probe_center + separation, hole_width, pump_power}},
                                      mod)},
                   idle};
  seq.validate();
  return seq;
}

// JSON persistence --------------------------------------------------------------------------

inline nlohmann::json to_json(const PumpSequence& seq) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : seq.segments) {
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : s.features) feats.push_back({{"center_hz", f.center}, {"width_hz", f.width}, {"power_w", f.power}});
    segs.push_back({{"duration_s", s.duration},
                    {"incident_power_w", s.incident_power},
                    {"carrier_leak", s.carrier_leak},
                    {"shape", to_string(s.shape)},
                    {"features", feats}});
  }
  return {{"segments", segs}, {"idle_duration_s", seq.idle_duration}};
}

inline PumpSequence pump_sequence_from_json(const nlohmann::json& j) {
  try {
    PumpSequence seq;
    seq.idle_duration = j.value("idle_duration_s", 0.0);
    for (const auto& s : j.at("segments")) {
      PumpSegment seg;
      seg.duration = s.at("duration_s").get<double>();
      seg.incident_power = s.at("incident_power_w").get<double>();
      seg.carrier_leak = s.value("carrier_leak", 0.0);
      seg.shape = pit_shape_from_string(s.value("shape", std::string("top-hat")));
      for (const auto& f : s.at("features"))
        seg.features.push_back({f.at("center_hz").get<double>(), f.at("width_hz").get<double>(), f.at("power_w").get<double>()});
      seq.segments.push_back(std::move(seg));
    }
    seq.validate();
    return seq;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("pump sequence JSON: ") + e.what());
  }
}

}  // namespace afcsim
