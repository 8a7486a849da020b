#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "afcsim/absorption.hpp"
#include "afcsim/evolve.hpp"
#include "afcsim/fit/least_squares.hpp"
#include "afcsim/fit/models.hpp"

using namespace afcsim;

namespace {

MaterialParams field(double B) {
  MaterialParams p;
  p.B_field = B;
  return p;
}

PumpSequence dark(double t) { return PumpSequence{{}, t}; }

// Shelve a band: n_g -> n_z and n_h in the given proportion.
EnsembleState with_hole(EnsembleState s, double lo, double hi, double to_z, double to_h) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double nu = s.grid.center(i);
    if (nu < lo || nu > hi) continue;
    const double m = s.n_g[i];
    s.n_g[i] = 0.0;
    s.n_z[i] += to_z * m;
    s.n_h[i] += to_h * m;
    s.n_e[i] += (1.0 - to_z - to_h) * m;
  }
  return s;
}

double grating_area(const EnsembleState& s) {
  double a = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) a += s.weight[i] * (s.n_g_eq - s.n_g[i]) * s.grid.bin_width();
  return a;
}

PumpSequence random_sequence(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PumpSequence seq;
  const int nseg = 1 + static_cast<int>(u(rng) * 3);
  for (int k = 0; k < nseg; ++k) {
    std::vector<PumpFeature> f;
    const int nf = 1 + static_cast<int>(u(rng) * 3);
    for (int j = 0; j < nf; ++j)
      f.push_back({lo + u(rng) * (hi - lo), 1e6 + u(rng) * 20e6, std::pow(10.0, -7.0 + 4.5 * u(rng))});
    ModulatorParams mod{u(rng), 0.05 * u(rng), u(rng) < 0.5 ? PitShape::TopHat : PitShape::Gaussian};
    seq.segments.push_back(modulated_segment(std::pow(10.0, -4.0 + 3.5 * u(rng)), f, mod));
  }
  seq.idle_duration = u(rng) < 0.5 ? 0.0 : 0.5 * u(rng);
  return seq;
}

}  // namespace

TEST(Evolve, DarkRelaxationIsDoubleExponential) {
  auto p = field(0.035);
  p.shf_weight = 0.0;
  const auto grid = make_grid(200e6, 300e6, 0.5e6);
  const auto s0 = with_hole(init_equilibrium_state(grid, p), 240e6, 260e6, 0.6, 0.4);
  std::vector<double> t;
  for (int k = 0; k < 30; ++k) t.push_back(0.02 * std::pow(5.0 / 0.02, k / 29.0));
  const auto tr = evolve(s0, dark(5.0), p, {}, t);
  fit::DataSeries d;
  for (std::size_t k = 0; k < t.size(); ++k) {
    d.x.push_back(t[k]);
    d.y.push_back(grating_area(tr.states[k]));
    d.sigma.push_back(1.0);
  }
  const auto r = fit::fit_curve(fit::model_double_exponential(), d);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.params[1], p.t_short, 0.05 * p.t_short);
  const double tl = flipflop_lifetime(0.035, p.temperature, p);
  EXPECT_NEAR(r.params[3], tl, 0.05 * tl);
}

TEST(Evolve, ExcitedStateGoneAfterWait) {
  const auto p = field(0.035);
  const auto s0 = init_equilibrium_state(make_grid(150e6, 350e6, 0.5e6), p);
  const auto s = evolve_final(s0, build_hole_sequence(3e-6, 250e6, 0.3, 25e6, 0.03), p, {});
  EXPECT_LT(*std::max_element(s.n_e.begin(), s.n_e.end()), 1e-6);
}

TEST(Evolve, TlsPreventsTransparency) {
  const auto p = field(0.3);
  const auto grid = make_grid(150e6, 350e6, 0.5e6);
  const auto s0 = init_equilibrium_state(grid, p);
  const auto seq = build_hole_sequence(500e-6, 250e6, 0.3, 25e6, 0.03);
  const auto with = absorption_spectrum(evolve_final(s0, seq, p, {7.586e4, 3.399e19}), p);
  const auto without = absorption_spectrum(evolve_final(s0, seq, p, {}), p);
  const std::size_t k = grid.index_of(250e6);
  EXPECT_GT(with.od[k], 0.05);
  EXPECT_GT(with.od[k], without.od[k] + 0.05);
}

TEST(Evolve, FuzzConservationAndBounds) {
  std::mt19937_64 rng(20260501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    MaterialParams p;
    p.B_field = 0.5 * u(rng);
    p.beta_zeeman = 0.8 * u(rng);
    p.beta_shf = (1.0 - p.beta_zeeman) * u(rng);
    const auto grid = make_grid(-20e6, 20e6, 1e6);
    const auto seq = random_sequence(rng, -25e6, 25e6);
    const TlsParams tls{u(rng) < 0.5 ? 0.0 : 1e6 * u(rng), u(rng) < 0.5 ? 0.0 : 1e20 * u(rng)};
    const auto s = evolve_final(init_equilibrium_state(grid, p), seq, p, tls);
    worst = std::max(worst, s.max_conservation_error());
    ASSERT_TRUE(s.populations_in_unit_interval()) << "trial " << trial;
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Evolve, ExtremeRatesStayBounded) {
  MaterialParams p;
  p.pump_rate_per_psd = 1e22;
  const auto grid = make_grid(-30e6, 30e6, 0.5e6);
  const auto seq = build_hole_sequence(1e-2, 0.0, 1e-3, 10e6);
  for (const TlsParams& tls : {TlsParams{}, TlsParams{1e6, 1e21}}) {
    const auto tr = evolve(init_equilibrium_state(grid, p), seq, p, tls, {1e-7, 1e-5, 1e-3});
    for (const auto& s : tr.states) {
      EXPECT_TRUE(s.populations_in_unit_interval());
      EXPECT_LE(s.max_conservation_error(), 1e-9);
    }
  }
}

TEST(Evolve, LongDarknessReturnsToEquilibrium) {
  const auto p = field(0.08);
  const auto grid = make_grid(0, 50e6, 0.5e6);
  const auto s_eq = init_equilibrium_state(grid, p);
  const auto s0 = with_hole(s_eq, 10e6, 30e6, 0.5, 0.3);
  const auto s = evolve_final(s0, dark(200.0), p, {});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(s.n_g[i], s_eq.n_g[i], 1e-6);
    EXPECT_NEAR(s.n_z[i], s_eq.n_z[i], 1e-6);
    EXPECT_NEAR(s.n_h[i], 0.0, 1e-6);
  }
}

TEST(Evolve, DarkGratingsSuperpose) {
  const auto p = field(0.06);
  const auto grid = make_grid(0, 50e6, 0.5e6);
  const auto eq = init_equilibrium_state(grid, p);
  const auto a = with_hole(eq, 5e6, 15e6, 0.7, 0.3);
  const auto b = with_hole(eq, 30e6, 45e6, 0.2, 0.5);
  auto ab = eq;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ab.n_g[i] = a.n_g[i] + b.n_g[i] - eq.n_g[i];
    ab.n_z[i] = a.n_z[i] + b.n_z[i] - eq.n_z[i];
    ab.n_h[i] = a.n_h[i] + b.n_h[i];
    ab.n_e[i] = a.n_e[i] + b.n_e[i];
  }
  const auto seq = dark(0.7);
  const auto ra = evolve_final(a, seq, p, {}), rb = evolve_final(b, seq, p, {}), rab = evolve_final(ab, seq, p, {});
  const auto req = evolve_final(eq, seq, p, {});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(rab.n_g[i], ra.n_g[i] + rb.n_g[i] - req.n_g[i], 1e-9);
    EXPECT_NEAR(rab.n_z[i], ra.n_z[i] + rb.n_z[i] - req.n_z[i], 1e-9);
  }
}

TEST(Evolve, HoleAreaMonotoneInPower) {
  const auto p = field(0.035);
  const auto grid = make_grid(150e6, 350e6, 0.5e6);
  const auto s0 = init_equilibrium_state(grid, p);
  double prev = 0.0;
  for (double P : {0.1e-6, 0.3e-6, 1e-6, 3e-6, 10e-6, 30e-6}) {
    const double a = grating_area(evolve_final(s0, build_hole_sequence(P, 250e6, 0.3, 25e6, 0.03), p, {}));
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(Evolve, HalvingStepConverges) {
  const auto p = field(0.3);
  const auto grid = make_grid(100e6, 600e6, 0.5e6);
  const auto s0 = init_equilibrium_state(grid, p);
  const auto seq = build_two_hole_sequence(5e-4, 3e-6, 200e6, 25e6, 250e6, 0.3, 0.03);
  const TlsParams tls{7.586e4, 3.399e19};
  const std::vector<double> rec{0.1, 0.3, 0.33};
  EvolveOptions coarse, fine;
  coarse.step = 0.01;
  fine.step = 0.005;
  const auto a = evolve(s0, seq, p, tls, rec, coarse), b = evolve(s0, seq, p, tls, rec, fine);
  double worst = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k)
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (auto m : {&EnsembleState::n_g, &EnsembleState::n_z, &EnsembleState::n_h, &EnsembleState::n_e})
        worst = std::max(worst, std::abs((a.states[k].*m)[i] - (b.states[k].*m)[i]));
  EXPECT_LT(worst, 1e-6);
}

TEST(Evolve, DiffusionConservesGridTotal) {
  // With only spectral diffusion and no pumping the total shelved population is conserved.
  MaterialParams p = field(0.3);
  p.pump_rate_per_psd = 1e-30;
  const auto grid = make_grid(-50e6, 50e6, 0.5e6);
  const auto s0 = with_hole(init_equilibrium_state(grid, p), -10e6, 10e6, 1.0, 0.0);
  PumpSequence seq{{modulated_segment(1e-3, {{0.0, 5e6, 1e-3}}, {1.0, 0.0, PitShape::TopHat})}, 0.0};
  const auto s = evolve_final(s0, seq, p, {0.0, 1e22});
  double z0 = 0.0, z1 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    z0 += s0.n_z[i];
    z1 += s.n_z[i];
  }
  EXPECT_NEAR(z1, z0 - (1e-3 / flipflop_lifetime(0.3, 0.7, p)) * (z0 - grid.size() * s0.n_z_eq), 1e-6 * z0);
  // Broadening is visible: bins beyond the original hole edge took up shelved population.
  EXPECT_GT(s.n_z[grid.index_of(15e6)], s0.n_z[grid.index_of(15e6)] + 1e-3);
}

TEST(Evolve, RecordTimes) {
  const auto p = field(0.035);
  const auto s0 = init_equilibrium_state(make_grid(0, 10e6, 1e6), p);
  const auto seq = build_hole_sequence(1e-6, 5e6, 0.1, 2e6, 0.1);
  const auto tr = evolve(s0, seq, p, {}, {0.0, 0.05, 0.1, 0.2});
  ASSERT_EQ(tr.states.size(), 4u);
  EXPECT_EQ(tr.times[1], 0.05);
  EXPECT_NEAR(tr.absorbed_energy, 0.1 * seq.segments[0].incident_power, 1e-15);
  EXPECT_THROW(evolve(s0, seq, p, {}, {0.1, 0.05}), Error);
  EXPECT_THROW(evolve(s0, seq, p, {}, {0.5}), Error);
  EvolveOptions bad;
  bad.step = 1e-12;
  try {
    evolve(s0, seq, p, {}, {0.1}, bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepSizeUnderflow);
  }
}

TEST(Evolve, NonFiniteStateDetected) {
  const auto p = field(0.035);
  auto s0 = init_equilibrium_state(make_grid(0, 10e6, 1e6), p);
  s0.n_g[3] = std::nan("");
  try {
    evolve_final(s0, dark(0.1), p, {});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
  }
}
