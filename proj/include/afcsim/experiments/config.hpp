#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afcsim/evolve.hpp"
#include "afcsim/material.hpp"
#include "afcsim/pump_sequence.hpp"
#include "afcsim/relaxation.hpp"

namespace afcsim::experiments {

struct Fig2Config {
  std::vector<double> fields{0.035, 0.06, 0.08};  // T
  double delay_min = 0.02;                          // s
  double delay_max = 5.0;                           // s
  int delay_count = 30;
  double hole_center = 250e6;
  double hole_width = 25e6;
  double burn_duration = 0.3;
  double burn_power = 3e-6;
  double read_span = 100e6;
  int repeats = 20;
  double noise_rel = 0.0;
};

struct Fig4Config {
  std::vector<double> bandwidths{0.2e9, 0.4e9, 0.8e9, 1.6e9, 3.2e9, 6.4e9};
  double spacing = 50e6;
  double pit_width = 25e6;
  double total_power = 300e-6;  // W, shared by all pits
  double duration = 0.3;
  double idle = 0.03;
  double margin = 250e6;        // simulated margin beyond the comb on each side
  double d0_halfwidth = 100e6;  // background is assessed within +-this of zero
};

struct Fig5Config {
  std::vector<double> pump_powers{10e-6, 30e-6, 100e-6, 200e-6, 350e-6, 500e-6};
  double probe_power = 3e-6;
  double separation = 200e6;
  double probe_center = 250e6;
  double hole_width = 25e6;
  double burn_duration = 0.3;
  double idle = 0.03;
  double grid_min = 100e6;
  double grid_max = 600e6;
  double field = 0.3;  // T
};

struct Table1Config {
  std::vector<double> detunings{0.0, 0.6e9, 1.0e9, 1.4e9};
  double peak_od = 0.8;
  double bandwidth = 200e6;
  std::optional<double> forced_zeeman;   // positive control: anti-hole offset, Hz
  std::optional<double> forced_antihole_fwhm;
};

struct EfficiencyConfig {
  double bandwidth = 6.4e9;
  double window = 200e6;  // analysed section centred on zero detuning
};

struct ExperimentConfig {
  MaterialParams material{};
  // From calibrate_tls on the default pump-probe scenario.
  TlsParams tls{7.586e4, 3.399e19};
  ModulatorParams modulator{};
  EvolveOptions evolve{};
  double bin_width = 0.5e6;
  std::uint64_t seed = 1;
  std::string output_dir = "afcsim-output";
  Fig2Config fig2{};
  Fig4Config fig4{};
  Fig5Config fig5{};
  Table1Config table1{};
  EfficiencyConfig efficiency{};

  void validate() const {
    material.validate();
    tls.validate();
    require(bin_width > 0.0, ErrorCode::InvalidParameter, "bin width must be positive");
  }
};

}  // namespace afcsim::experiments
