// Prepares a 400 MHz comb, analyses the section around the carrier and prints the expected efficiency.
#include <cstdio>

#include "afcsim/afcsim.hpp"

using namespace afcsim;
using namespace afcsim::experiments;

int main() {
  ExperimentConfig cfg;
  cfg.efficiency.bandwidth = 400e6;
  const auto r = run_efficiency(cfg);
  const auto& m = r.metrics;
  std::printf("teeth        %zu\n", m.teeth);
  std::printf("d_peak       %.3f OD\n", m.d_peak);
  std::printf("d0           %.3f OD\n", m.d0);
  std::printf("tooth fwhm   %.2f MHz\n", m.tooth_fwhm / 1e6);
  std::printf("finesse      %.2f\n", m.finesse);
  std::printf("efficiency   %.3f %%\n", 100.0 * r.efficiency);
  std::printf("storage time %.1f ns\n", r.storage_time * 1e9);
}
