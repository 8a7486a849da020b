#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "afcsim/absorption.hpp"
#include "afcsim/comb.hpp"
#include "afcsim/decay.hpp"
#include "afcsim/evolve.hpp"
#include "afcsim/readout.hpp"

using namespace afcsim;

namespace {

AbsorptionSpectrum synthetic(const FrequencyGrid& g, const std::function<double(double)>& f) {
  AbsorptionSpectrum s{g, std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) s.od[i] = f(g.center(i));
  return s;
}

double lorentz_dip(double nu, double nu0, double depth, double fwhm) {
  const double h = 0.5 * fwhm, d = nu - nu0;
  return depth * h * h / (d * d + h * h);
}

// Square comb: teeth of height d_peak on background d0, duty = tooth width / spacing.
double square_comb(double nu, double spacing, double duty, double d_peak, double d0, double phase = 0.0) {
  double u = std::fmod(nu - phase, spacing);
  if (u < 0) u += spacing;
  if (u > 0.5 * spacing) u -= spacing;
  return std::abs(u) <= 0.5 * duty * spacing ? d_peak : d0;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

}  // namespace

TEST(Readout, NoiselessMatchesSpectrum) {
  MaterialParams p;
  const auto grid = make_grid(0, 400e6, 0.5e6);
  auto s = init_equilibrium_state(grid, p);
  s = evolve_final(s, build_hole_sequence(3e-6, 200e6, 0.3, 25e6, 0.03), p, {});
  const auto full = absorption_spectrum(s, p);
  const auto r = simulate_readout(s, p, {200e6, 100e6, 1e-3, 20, 0.0, 7});
  ASSERT_EQ(r.size(), 200u);
  const std::size_t off = grid.index_of(r.detuning(0));
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(r.od[i], full.od[off + i]);
}

TEST(Readout, AveragingScalesNoise) {
  MaterialParams p;
  const auto s = init_equilibrium_state(make_grid(0, 10e6, 0.5e6), p);
  auto spread = [&](int repeats) {
    double acc = 0.0, acc2 = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto r = simulate_readout(s, p, {5e6, 10e6, 1e-3, repeats, 0.05, seed});
      for (double v : r.od) {
        acc += v;
        acc2 += v * v;
        ++n;
      }
    }
    const double m = acc / n;
    return std::sqrt(acc2 / n - m * m);
  };
  EXPECT_NEAR(spread(1) / spread(20), std::sqrt(20.0), 0.1 * std::sqrt(20.0));
}

TEST(Readout, Reproducible) {
  MaterialParams p;
  const auto s = init_equilibrium_state(make_grid(0, 10e6, 0.5e6), p);
  const auto a = simulate_readout(s, p, {5e6, 10e6, 1e-3, 20, 0.05, 42});
  const auto b = simulate_readout(s, p, {5e6, 10e6, 1e-3, 20, 0.05, 42});
  EXPECT_EQ(a.od, b.od);
}

TEST(Readout, SpanOutOfGrid) {
  MaterialParams p;
  const auto s = init_equilibrium_state(make_grid(0, 10e6, 0.5e6), p);
  EXPECT_EQ(code_of([&] { simulate_readout(s, p, {5e6, 40e6, 1e-3, 20, 0.0, 0}); }), ErrorCode::SpanOutOfGrid);
}

TEST(Readout, CombSectionShowsTeethAndCarrierHole) {
  MaterialParams p;
  const TlsParams tls{7.586e4, 3.399e19};
  const auto grid = make_grid(-3.45e9, 3.45e9, 0.5e6);
  const auto s = evolve_final(init_equilibrium_state(grid, p), build_afc_sequence(6.4e9, 300e-6), p, tls);
  const auto sec = simulate_readout(s, p, {0.0, 200e6, 1e-3, 20, 0.0, 0});
  const auto m = analyze_comb(sec, 50e6);
  EXPECT_NEAR(std::remainder(m.phase, 50e6), 0.0, 2e6);
  EXPECT_NEAR(sec.grid.span() / m.spacing, 4.0, 1e-9);
  // Pit cores at +-25 and +-75 MHz sit below the tooth tops.
  for (double c : {-75e6, -25e6, 25e6, 75e6}) EXPECT_LT(sec.od[sec.grid.index_of(c)], m.d_peak - 0.2);
  // Unmodulated carrier light eats into the zero-detuning tooth and leaves a dip at its centre.
  const double centre = sec.od[sec.grid.index_of(0.0)];
  EXPECT_LT(centre, m.d_peak - 0.2);
  EXPECT_LT(centre, sec.od[sec.grid.index_of(8e6)] - 0.05);
  EXPECT_LT(centre, sec.od[sec.grid.index_of(-8e6)] - 0.05);
  EXPECT_LE(m.d_peak, 2.0);
}

TEST(MeasureHole, SyntheticRoundTrip) {
  const auto g = make_grid(100e6, 400e6, 0.5e6);
  const auto s = synthetic(g, [](double nu) { return 2.0 - lorentz_dip(nu, 250e6, 1.0, 25e6); });
  const auto h = measure_hole(s, 250e6);
  EXPECT_NEAR(h.depth, 1.0, 0.01);
  EXPECT_NEAR(h.fwhm, 25e6, 0.25e6);
  EXPECT_NEAR(h.center, 250e6, 0.1e6);
  EXPECT_NEAR(h.area, h.depth * M_PI / 2 * h.fwhm, 1e-6 * h.area);
}

TEST(MeasureHole, IdentityAcrossDepthAndWidth) {
  for (double depth : {0.1, 0.5, 1.0, 2.0})
    for (double fwhm : {5e6, 12e6, 25e6, 50e6}) {
      const auto g = make_grid(250e6 - 8 * fwhm, 250e6 + 8 * fwhm, fwhm / 50);
      const auto s = synthetic(g, [&](double nu) { return 2.2 - lorentz_dip(nu, 250e6, depth, fwhm); });
      const auto h = measure_hole(s, 250e6, {fwhm, 0.0});
      EXPECT_NEAR(h.depth, depth, 0.01 * depth) << depth << " " << fwhm;
      EXPECT_NEAR(h.fwhm, fwhm, 0.01 * fwhm) << depth << " " << fwhm;
    }
}

TEST(MeasureHole, FlatSpectrumHasNoHole) {
  const auto s = synthetic(make_grid(0, 100e6, 0.5e6), [](double) { return 1.5; });
  EXPECT_EQ(code_of([&] { measure_hole(s, 50e6); }), ErrorCode::NoHoleFound);
}

TEST(MeasureHole, NeighbouringDipsIndependent) {
  const auto g = make_grid(50e6, 650e6, 0.5e6);
  const auto one = synthetic(g, [](double nu) { return 2.0 - lorentz_dip(nu, 250e6, 1.0, 25e6); });
  const auto other = synthetic(g, [](double nu) { return 2.0 - lorentz_dip(nu, 450e6, 0.8, 25e6); });
  const auto both = synthetic(g, [](double nu) {
    return 2.0 - lorentz_dip(nu, 250e6, 1.0, 25e6) - lorentz_dip(nu, 450e6, 0.8, 25e6);
  });
  const auto a = measure_hole(one, 250e6), a2 = measure_hole(both, 250e6);
  const auto b = measure_hole(other, 450e6), b2 = measure_hole(both, 450e6);
  EXPECT_NEAR(a2.depth, a.depth, 0.02 * a.depth);
  EXPECT_NEAR(b2.depth, b.depth, 0.02 * b.depth);
}

TEST(MeasureHole, FixedShapeRecoversDepth) {
  const auto g = make_grid(150e6, 350e6, 0.5e6);
  const auto s = synthetic(g, [](double nu) { return 1.8 + 1e-9 * (nu - 250e6) - lorentz_dip(nu, 250e6, 0.3, 20e6); });
  const auto h = measure_hole_fixed_shape(s, 250e6, 20e6);
  EXPECT_NEAR(h.depth, 0.3, 1e-9);
  EXPECT_NEAR(h.area, 0.3 * M_PI / 2 * 20e6, 1e-3);
}

TEST(AnalyzeComb, IdealSquareComb) {
  const auto g = make_grid(-100e6, 100e6, 0.1e6);
  const auto s = synthetic(g, [](double nu) { return square_comb(nu, 50e6, 0.5, 2.0, 0.0); });
  const auto m = analyze_comb(s, 50e6);
  EXPECT_NEAR(m.finesse, 2.0, 0.02);
  EXPECT_LT(m.d0, 0.02);
  EXPECT_NEAR(m.d_peak, 2.0, 1e-9);
  EXPECT_EQ(m.spacing, 50e6);
}

TEST(AnalyzeComb, WhiteNoiseIsNotAComb) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(1.0, 0.05);
  const auto s = synthetic(make_grid(-100e6, 100e6, 0.5e6), [&](double) { return n(rng); });
  EXPECT_EQ(code_of([&] { analyze_comb(s, 50e6); }), ErrorCode::NoCombDetected);
}

TEST(AnalyzeComb, Errors) {
  const auto s = synthetic(make_grid(-100e6, 100e6, 0.5e6), [](double nu) { return square_comb(nu, 50e6, 0.4, 1, 0.2); });
  EXPECT_EQ(code_of([&] { analyze_comb(s, 0.0); }), ErrorCode::NonPositiveSpacing);
  EXPECT_EQ(code_of([&] { analyze_comb(s, 100e6); }), ErrorCode::NoCombDetected);
}

TEST(AnalyzeComb, ShiftByWholeSpacings) {
  auto comb = [](double nu) {
    const double u = std::remainder(nu, 50e6);
    return 0.3 + 1.2 / (1.0 + std::pow(u / 8e6, 2));
  };
  const auto base = analyze_comb(synthetic(make_grid(-150e6, 150e6, 0.25e6), comb), 50e6);
  for (int k : {-3, 1, 7}) {
    const double sh = k * 50e6;
    const auto m = analyze_comb(synthetic(make_grid(-150e6 + sh, 150e6 + sh, 0.25e6), comb), 50e6);
    EXPECT_NEAR(m.d_peak, base.d_peak, 1e-9);
    EXPECT_NEAR(m.d0, base.d0, 1e-9);
    EXPECT_NEAR(m.tooth_fwhm, base.tooth_fwhm, 1e-3);
  }
}

TEST(StorageTime, Reciprocal) {
  EXPECT_DOUBLE_EQ(storage_time(50e6), 20e-9);
  EXPECT_DOUBLE_EQ(storage_time(100e6), 10e-9);
  EXPECT_EQ(code_of([] { storage_time(0.0); }), ErrorCode::NonPositiveSpacing);
  for (double s : {1e6, 37e6, 50e6, 3e9}) EXPECT_DOUBLE_EQ(storage_time(s) * s, 1.0);
}

TEST(Efficiency, Examples) {
  EXPECT_LT(afc_efficiency(21.0, 20.0, 2.0), 1e-8);
  EXPECT_NEAR(afc_efficiency(2.0, 0.0, 2.0), std::exp(-2.75), 1e-12);
  EXPECT_NEAR(afc_efficiency(2.0, 0.0, 2.0), 0.0639, 1e-4);
}

TEST(Efficiency, OptimumAtEffectiveDepthTwo) {
  for (double F : {1.5, 2.0, 4.0})
    for (double d0 : {0.0, 0.5}) {
      double best = -1, best_dt = 0;
      for (double dt = 0.01; dt <= 6.0; dt += 0.001) {
        const double e = afc_efficiency(d0 + dt * F, d0, F);
        if (e > best) {
          best = e;
          best_dt = dt;
        }
      }
      EXPECT_NEAR(best_dt, 2.0, 0.002);
    }
}

TEST(Efficiency, MonotoneInBackgroundAndFinesse) {
  // At fixed effective depth, more background hurts and higher finesse helps.
  double prev = INFINITY;
  for (double d0 = 0.0; d0 < 3.0; d0 += 0.1) {
    const double e = afc_efficiency(d0 + 2.0, d0, 2.0);
    EXPECT_LT(e, prev);
    prev = e;
  }
  prev = 0.0;
  for (double F = 1.0; F < 10.0; F += 0.25) {
    CombMetrics m;
    m.d_peak = 1.0 * F + 0.2;
    m.d0 = 0.2;
    m.finesse = F;
    const double e = afc_efficiency(m);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(HoleDecay, LongLifetimeRecovered) {
  MaterialParams p;
  const auto delays = log_spaced(0.02, 5.0, 30);
  const auto c = hole_decay_experiment(0.035, delays, p, {}, 1);
  ASSERT_EQ(c.points.size(), 30u);
  fit::DataSeries d;
  for (const auto& pt : c.points) {
    d.x.push_back(pt.delay);
    d.y.push_back(pt.area);
    d.sigma.push_back(1.0);
  }
  const auto r = fit::fit_curve(fit::model_double_exponential(), d);
  const double tl = flipflop_lifetime(0.035, p.temperature, p);
  EXPECT_NEAR(r.params[3], tl, 0.05 * tl);
}

TEST(HoleDecay, TwoReservoirClosedForm) {
  MaterialParams p;
  p.B_field = 0.035;
  HoleDecaySettings cfg;
  const std::vector<double> delays{0.05, 0.5};
  const auto c = hole_decay_experiment(0.035, delays, p, {}, 1, cfg);

  // Replay the burn to the first delay, then relax the shelves analytically.
  const double half = 0.5 * cfg.readout.span;
  const FrequencyGrid grid(cfg.readout.center - half - 2 * cfg.hole_width, cfg.readout.center + half + 2 * cfg.hole_width,
                           cfg.bin_width);
  const auto seq = build_hole_sequence(cfg.burn_power, cfg.hole_center, cfg.burn_duration, cfg.hole_width, delays.back());
  auto s = evolve(init_equilibrium_state(grid, p), seq, p, {}, {cfg.burn_duration + delays[0]}).states[0];
  const auto first = measure_hole(simulate_readout(s, p, cfg.readout), cfg.hole_center, {cfg.hole_width, 0.0});
  EXPECT_NEAR(c.points[0].area, first.area, 1e-6 * first.area);
  const double dt = delays[1] - delays[0];
  const double tl = flipflop_lifetime(0.035, p.temperature, p);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_LT(s.n_e[i], 1e-9);
    const double dz = (s.n_z[i] - s.n_z_eq) * std::exp(-dt / tl);
    const double h = s.n_h[i] * std::exp(-dt / p.t_short);
    s.n_z[i] = s.n_z_eq + dz;
    s.n_h[i] = h;
    s.n_g[i] = 1.0 - s.n_z[i] - h - s.n_e[i];
  }
  const auto expected = measure_hole_fixed_shape(simulate_readout(s, p, cfg.readout), first.center, first.fwhm);
  EXPECT_NEAR(c.points[1].area, expected.area, 1e-6 * expected.area);
}

TEST(HoleDecay, DelayInsideExcitedLifetime) {
  MaterialParams p;
  EXPECT_EQ(code_of([&] { hole_decay_experiment(0.035, {1e-3}, p, {}, 1); }), ErrorCode::PreconditionViolated);
}

TEST(DecayCurve, CsvSchema) {
  DecayCurve c{{{0.02, 1.5e7, 1e4}, {0.1, 1e7, 1e4}}};
  std::ostringstream o;
  write_csv(o, c);
  std::istringstream in(o.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "delay_s,area_od_hz,sigma");
  std::getline(in, line);
  double a = 0, b = 0, c2 = 0;
  char k1 = 0, k2 = 0;
  std::istringstream(line) >> a >> k1 >> b >> k2 >> c2;
  EXPECT_EQ(a, 0.02);
  EXPECT_EQ(b, 1.5e7);
  EXPECT_EQ(c2, 1e4);
}
