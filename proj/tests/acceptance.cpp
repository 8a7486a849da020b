#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "afcsim/afcsim.hpp"

using namespace afcsim;
using namespace afcsim::experiments;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int passed = 0, total = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  ++total;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.pass && dt <= limit_s;
  passed += ok;
  std::printf("%s %-28s %s [%.1f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), dt, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

bool within(double v, double ref, double rel) { return std::abs(v - ref) <= rel * std::abs(ref); }

const double fields[] = {0.035, 0.06, 0.08};
const double expected_tl[] = {1.00, 1.36, 2.44};

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

std::string hash_documents(const Documents& ds) {
  std::string all;
  for (const auto& d : ds) all += d.name + '\n' + d.content;
  return io::sha256_hex(all);
}

}  // namespace

int main() {
  const ExperimentConfig cfg;
  const MaterialParams mp;

  criterion("flipflop-lifetimes", 1, [&] {
    Outcome o{true, "t_long ="};
    for (int i = 0; i < 3; ++i) {
      const double t = flipflop_lifetime(fields[i], mp.temperature, mp);
      o.pass = o.pass && within(t, expected_tl[i], 0.25);
      o.detail += fmt(" %.3f", t);
    }
    o.detail += " s (expected 1.00 1.36 2.44, tol 25%)";
    return o;
  });

  criterion("flipflop-field-fit", 1, [&] {
    const auto r = fit::fit_curve(fit::model_flipflop_field(mp.alpha_ff, mp.g_factor, mp.temperature),
                                  fit::DataSeries::unit_sigma({0.035, 0.06, 0.08}, {1.0 / 1.00, 1.0 / 1.36, 1.0 / 2.44}));
    const double G = r.params[0] / 1e9, g = r.params[1] / 1e9;
    return Outcome{r.converged && G >= 0.2 && G <= 0.6 && g >= 8.5 && g <= 20.5,
                   fmt("Gamma_s = %.3f GHz in [0.2, 0.6], gamma_s = %.2f GHz/T in [8.5, 20.5]", G, g)};
  });

  criterion("hole-decay-noiseless", 60, [&] {
    Outcome o{true, "worst relative error t_short/t_long ="};
    const auto settings = hole_decay_settings(cfg);
    const auto delays = log_spaced(cfg.fig2.delay_min, cfg.fig2.delay_max, static_cast<std::size_t>(cfg.fig2.delay_count));
    double ws = 0.0, wl = 0.0;
    for (double B : fields) {
      const auto curve = hole_decay_experiment(B, delays, cfg.material, cfg.tls, cfg.seed, settings);
      const auto r = fit::fit_curve(fit::model_double_exponential(), decay_series(curve));
      const double tl = flipflop_lifetime(B, cfg.material.temperature, cfg.material);
      ws = std::max(ws, std::abs(r.params[1] / cfg.material.t_short - 1.0));
      wl = std::max(wl, std::abs(r.params[3] / tl - 1.0));
      o.pass = o.pass && r.converged;
    }
    o.pass = o.pass && ws <= 0.05 && wl <= 0.05;
    o.detail += fmt(" %.2e / %.2e (tol 5%%)", ws, wl);
    return o;
  });

  criterion("hole-decay-5pct-noise", 60, [&] {
    auto c = cfg;
    c.fig2.noise_rel = 0.05;
    const double B = 0.06;
    const auto settings = hole_decay_settings(c);
    const auto delays = log_spaced(c.fig2.delay_min, c.fig2.delay_max, static_cast<std::size_t>(c.fig2.delay_count));
    const double tl = flipflop_lifetime(B, c.material.temperature, c.material);
    int ok = 0, ok_long = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      try {
        const auto curve = hole_decay_experiment(B, delays, c.material, c.tls, seed, settings);
        const auto r = fit::fit_curve(fit::model_double_exponential(), decay_series(curve));
        const bool l = within(r.params[3], tl, 0.15);
        ok_long += l;
        ok += l && within(r.params[1], c.material.t_short, 0.15);
      } catch (const Error&) {
      }
    }
    return Outcome{ok >= 95, fmt("both lifetimes within 15%% in %d/100 seeds (t_long alone %d/100), need 95", ok, ok_long)};
  });

  criterion("double-exp-5pct-noise", 60, [&] {
    const auto m = fit::model_double_exponential();
    int ok = 0;
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> N(0, 1);
      fit::DataSeries d;
      for (int i = 0; i < 30; ++i) {
        const double t = 0.02 * std::pow(5 / 0.02, i / 29.0);
        const double y = 0.6 * std::exp(-t / 0.06) + 0.4 * std::exp(-t / 1.0);
        const double s = 0.05 * y;
        d.x.push_back(t);
        d.y.push_back(y + s * N(rng));
        d.sigma.push_back(s);
      }
      try {
        const auto f = fit::fit_curve(m, d);
        ok += within(f.params[1], 0.06, 0.05) && within(f.params[3], 1.0, 0.05) && within(f.params[0], 0.6, 0.1) &&
              within(f.params[2], 0.4, 0.1);
      } catch (const Error&) {
      }
    }
    return Outcome{ok >= 95, fmt("%d/100 seeds within 5%% (t) and 10%% (A), need 95", ok)};
  });

  criterion("material-consistency", 1, [&] {
    const double dz = zeeman_splitting(0.3, mp.g_factor);
    const double w = spin_inhom_width(0.3, mp.Gamma_s, mp.gamma_s);
    const double isd = isd_broadening(3.6e19 * 2e-4, mp.C_isd);
    return Outcome{dz > 50e9 && std::abs(w - 5e9) <= 0.5e9 && isd <= 1.5e3 && isd < 5e6 / 1000.0,
                   fmt("zeeman %.1f GHz > 50, spin width %.2f GHz ~ 5, ISD %.0f Hz ~ kHz << 5 MHz", dz / 1e9, w / 1e9, isd)};
  });

  criterion("backfill-table", 300, [&] {
    const auto r = run_table1(cfg);
    double lo = INFINITY, hi = -INFINITY;
    std::string vals;
    for (const auto& p : r.points) {
      lo = std::min(lo, p.d0);
      hi = std::max(hi, p.d0);
      vals += fmt(" %.4f", p.d0);
    }
    auto c = cfg;
    c.table1.forced_zeeman = 1.0e9;
    c.table1.forced_antihole_fwhm = 0.2e9;
    const auto f = run_table1(c);
    const double gain = f.points[2].d0 - f.points[0].d0;
    return Outcome{hi - lo < 0.1 && gain > 0.1,
                   fmt("d0 =%s, spread %.4f < 0.1; forced 1 GHz splitting raises d0 by %.3f > 0.1", vals.c_str(), hi - lo, gain)};
  });

  criterion("background-vs-bandwidth", 600, [&] {
    const auto on = run_fig4(cfg);
    auto c = cfg;
    c.tls = {};
    const auto off = run_fig4(c);
    bool mono = true;
    std::string vals;
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < on.points.size(); ++i) {
      if (i > 0) mono = mono && on.points[i].d0 >= on.points[i - 1].d0;
      vals += fmt(" %.3f", on.points[i].d0);
      lo = std::min(lo, off.points[i].d0);
      hi = std::max(hi, off.points[i].d0);
    }
    return Outcome{mono && hi - lo <= 0.02,
                   fmt("TLS on d0 =%s nondecreasing; TLS off spread %.2e <= 0.02", vals.c_str(), hi - lo)};
  });

  criterion("pump-probe-closure", 300, [&] {
    const auto r = run_fig5(cfg);
    const auto& lo = r.points.front();
    const auto& hi = r.points.back();
    const double ratio = hi.probe.depth / lo.probe.depth;
    const double dw = (hi.probe.fwhm - lo.probe.fwhm) / 1e6;
    const double pump = hi.pump.depth / lo.pump.depth;
    return Outcome{within(ratio, 1.0 / 3.0, 0.15) && std::abs(dw - 5.0) <= 2.0 && pump > ratio,
                   fmt("probe depth ratio %.4f (1/3 +-15%%), width +%.2f MHz (5 +-2), pump ratio %.3f > probe", ratio, dw,
                       pump)};
  });

  criterion("efficiency", 600, [&] {
    const auto r = run_efficiency(cfg);
    const double st = storage_time(50e6);
    return Outcome{r.efficiency >= 3e-4 && r.efficiency <= 3e-3 && st == 20e-9,
                   fmt("eta = %.3f%% in [0.03, 0.3]%% (d_peak %.3f, d0 %.3f, F %.2f); storage %.1f ns", 100 * r.efficiency,
                       r.metrics.d_peak, r.metrics.d0, r.metrics.finesse, st * 1e9)};
  });

  criterion("property-suites", 300, [&] {
    // Conservation through random pump sequences.
    std::mt19937_64 rng(20260501);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_cons = 0.0;
    bool bounded = true;
    for (int trial = 0; trial < 1000; ++trial) {
      MaterialParams p;
      p.B_field = 0.5 * u(rng);
      p.beta_zeeman = 0.8 * u(rng);
      p.beta_shf = (1.0 - p.beta_zeeman) * u(rng);
      const auto grid = make_grid(-20e6, 20e6, 1e6);
      const auto seq = random_sequence(rng, -25e6, 25e6);
      const TlsParams tls{u(rng) < 0.5 ? 0.0 : 1e6 * u(rng), u(rng) < 0.5 ? 0.0 : 1e20 * u(rng)};
      const auto s = evolve_final(init_equilibrium_state(grid, p), seq, p, tls);
      worst_cons = std::max(worst_cons, s.max_conservation_error());
      bounded = bounded && s.populations_in_unit_interval();
    }

    // Step halving on the pump-probe sequence.
    MaterialParams p;
    p.B_field = 0.3;
    const auto grid = make_grid(100e6, 600e6, 0.5e6);
    const auto s0 = init_equilibrium_state(grid, p);
    const auto seq = build_two_hole_sequence(5e-4, 3e-6, 200e6, 25e6, 250e6, 0.3, 0.03);
    const std::vector<double> rec{0.1, 0.3, 0.33};
    EvolveOptions coarse, fine;
    coarse.step = 0.01;
    fine.step = 0.005;
    const auto a = evolve(s0, seq, p, cfg.tls, rec, coarse), b = evolve(s0, seq, p, cfg.tls, rec, fine);
    double worst_step = 0.0;
    for (std::size_t k = 0; k < rec.size(); ++k)
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (auto m : {&EnsembleState::n_g, &EnsembleState::n_z, &EnsembleState::n_h, &EnsembleState::n_e})
          worst_step = std::max(worst_step, std::abs((a.states[k].*m)[i] - (b.states[k].*m)[i]));

    // Analytic against numeric Jacobians.
    std::mt19937_64 jr(99);
    double worst_jac = 0.0;
    auto check = [&](const fit::ParametricModel& m, const std::function<fit::Vec()>& th_gen,
                     const std::function<double()>& x_gen) {
      for (int k = 0; k < 100; ++k) {
        const fit::Vec th = th_gen();
        const double x = x_gen();
        fit::Vec g(th.size());
        m.gradient(th, x, g);
        const fit::Vec n = fit::numeric_gradient(m, th, x, 1e-6);
        // Error in each component scaled by its parameter, relative to the largest scaled sensitivity.
        const Eigen::ArrayXd scale = th.cwiseAbs().array().max(1e-6);
        const double ref = (g.array().abs() * scale).maxCoeff();
        worst_jac = std::max(worst_jac, ((g - n).array().abs() * scale).maxCoeff() / ref);
      }
    };
    std::uniform_real_distribution<double> v(0.0, 1.0);
    const auto de = fit::model_double_exponential();
    check(de,
          [&] {
            fit::Vec t(4);
            t << 0.1 + v(jr), 0.01 + 0.2 * v(jr), 0.1 + v(jr), 0.5 + 3 * v(jr);
            return de.internal(t);
          },
          [&] { return 0.02 + 5 * v(jr); });
    check(fit::model_flipflop_field(mp.alpha_ff, mp.g_factor, mp.temperature),
          [&] {
            fit::Vec t(2);
            t << 0.1e9 + 1e9 * v(jr), 1e9 + 30e9 * v(jr);
            return t;
          },
          [&] { return 0.01 + 0.3 * v(jr); });
    check(fit::model_lorentzian_dip(),
          [&] {
            fit::Vec t(4);
            t << 1 + v(jr), 0.1 + 2 * v(jr), 200e6 + 100e6 * v(jr), 5e6 + 45e6 * v(jr);
            return t;
          },
          [&] { return 150e6 + 200e6 * v(jr); });
    check(fit::model_lorentzian_dip_linear(250e6),
          [&] {
            fit::Vec t(5);
            t << 1 + v(jr), 0.1 + 2 * v(jr), 200e6 + 100e6 * v(jr), 5e6 + 45e6 * v(jr), (v(jr) - 0.5) * 1e-8;
            return t;
          },
          [&] { return 150e6 + 200e6 * v(jr); });

    // End-to-end determinism, including a noisy readout.
    auto c = cfg;
    c.fig2.noise_rel = 0.05;
    c.fig2.fields = {0.06};
    c.fig2.delay_count = 8;
    const auto h1 = hash_documents(render_all(run_fig2(c))), h2 = hash_documents(render_all(run_fig2(c)));
    const auto e1 = hash_documents(render_all(run_fig5(cfg))), e2 = hash_documents(render_all(run_fig5(cfg)));
    const bool same = h1 == h2 && e1 == e2;

    return Outcome{worst_cons <= 1e-9 && bounded && worst_step <= 1e-6 && worst_jac <= 1e-5 && same,
                   fmt("conservation %.1e <= 1e-9%s; halving %.1e <= 1e-6; jacobian %.1e <= 1e-5; hashes %s", worst_cons,
                       bounded ? "" : " (bounds violated)", worst_step, worst_jac, same ? "identical" : "DIFFER")};
  });

  std::printf("%d/%d criteria met\n", passed, total);
  return 0;
}
