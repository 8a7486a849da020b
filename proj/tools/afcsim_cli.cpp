// afcsim: command-line front end for the spectral hole burning / AFC simulator.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afcsim/afcsim.hpp"

namespace fs = std::filesystem;
using namespace afcsim;
using namespace afcsim::experiments;
using units::Dimension;

namespace {

struct Globals {
  std::string config_file;
  std::string output;
  std::vector<std::string> overrides;  // section.key=value
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig c;
  if (!g.config_file.empty()) c = parse_config(io::read_file(g.config_file));
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "--set expects section.key=value, got '" + o + "'");
    auto path = o.substr(0, eq);
    const auto dot = path.rfind('.');
    const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    c = parse_config("[" + section + "]\n" + key + " = " + o.substr(eq + 1) + "\n", c);
  }
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

fs::path output_dir(const Globals& g, const ExperimentConfig& c) {
  if (!g.output.empty()) return g.output;
  fs::path dir = c.output_dir;
  if (const char* root = std::getenv("AFCSIM_OUTPUT_ROOT"); root && *root && dir.is_relative()) return fs::path(root) / dir;
  return dir;
}

double quantity(const std::string& text, Dimension d) { return units::parse_quantity(text, d); }

void finish(const OutputSession& s, bool quiet) {
  const auto m = s.finish();
  if (quiet) return;
  for (const auto& f : s.files()) std::cout << "  wrote " << (s.dir() / f.path).string() << '\n';
  std::cout << "  wrote " << (s.dir() / m.path).string() << '\n';
}

void print_fit(const fit::FitResult& r) {
  std::cout << to_json(r).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afcsim: spectral hole burning and atomic frequency comb simulator"};
  app.set_version_flag("--version", std::string("afcsim ") + version);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("-c,--config", g.config_file, "TOML-style configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--output", g.output, "output directory (default: $AFCSIM_OUTPUT_ROOT/<output_dir>)");
  app.add_option("--set", g.overrides, "override one config value, e.g. --set fig4.spacing=50MHz");
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("-q,--quiet", g.quiet, "do not list written files");

  // print-config -----------------------------------------------------------------------
  auto* print_cmd = app.add_subcommand("print-config", "print the full configuration with all defaults");

  // simulate ---------------------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "run a single simulation scenario");
  sim->require_subcommand(1);

  std::string hd_field = "350G", hd_noise = "0", hd_dmin, hd_dmax;
  int hd_points = 0;
  auto* hd = sim->add_subcommand("hole-decay", "burn a hole and record its area versus delay");
  hd->add_option("--field", hd_field, "magnetic field, e.g. 350G");
  hd->add_option("--noise", hd_noise, "per-sweep readout noise relative to peak OD, e.g. 5%");
  hd->add_option("--delay-min", hd_dmin, "first delay, e.g. 20ms");
  hd->add_option("--delay-max", hd_dmax, "last delay, e.g. 5s");
  hd->add_option("--points", hd_points, "number of log-spaced delays");

  std::string afc_bw = "6.4GHz", afc_spacing, afc_power, afc_pit, afc_od;
  auto* afc = sim->add_subcommand("afc", "prepare a comb and analyse its centre section");
  afc->add_option("--bandwidth", afc_bw, "comb bandwidth, e.g. 6.4GHz");
  afc->add_option("--spacing", afc_spacing, "tooth spacing, e.g. 50MHz");
  afc->add_option("--power", afc_power, "total pump power, e.g. 300uW");
  afc->add_option("--pit-width", afc_pit, "width of each pumped pit, e.g. 25MHz");
  afc->add_option("--peak-od", afc_od, "initial peak optical depth");

  std::string bf_detuning = "1GHz", bf_bw;
  auto* bf = sim->add_subcommand("backfill", "burn two combs and report the background of the first");
  bf->add_option("--detuning", bf_detuning, "offset of the second comb, e.g. 1GHz");
  bf->add_option("--bandwidth", bf_bw, "bandwidth of each comb, e.g. 200MHz");

  std::string pp_pump = "500uW", pp_probe;
  auto* pp = sim->add_subcommand("pump-probe", "burn a probe hole and a strong pump hole");
  pp->add_option("--pump-power", pp_pump, "pump hole power, e.g. 500uW");
  pp->add_option("--probe-power", pp_probe, "probe hole power, e.g. 3uW");

  std::string sq_file, sq_min = "-300MHz", sq_max = "300MHz";
  auto* sq = sim->add_subcommand("sequence", "evolve an arbitrary pump sequence read from JSON");
  sq->add_option("--input", sq_file, "pump sequence JSON file")->required()->check(CLI::ExistingFile);
  sq->add_option("--grid-min", sq_min, "lowest simulated detuning");
  sq->add_option("--grid-max", sq_max, "highest simulated detuning");

  // fit --------------------------------------------------------------------------------
  auto* fitc = app.add_subcommand("fit", "fit a model to x,y[,sigma] CSV data");
  fitc->require_subcommand(1);
  std::string fit_input;
  auto add_input = [&](CLI::App* c) {
    c->add_option("-i,--input", fit_input, "CSV file with x,y[,sigma] columns")->required()->check(CLI::ExistingFile);
  };
  auto* fit_de = fitc->add_subcommand("double-exp", "y = A_s exp(-x/t_s) + A_l exp(-x/t_l)");
  auto* fit_ff = fitc->add_subcommand("flipflop", "1/t_long versus field (x in T, y in 1/s)");
  auto* fit_dip = fitc->add_subcommand("dip", "Lorentzian dip on a constant baseline (x in Hz)");
  for (auto* c : {fit_de, fit_ff, fit_dip}) add_input(c);

  // report / reproduce / calibrate ------------------------------------------------------
  auto* rep = app.add_subcommand("report", "derived reports");
  rep->require_subcommand(1);
  std::string eff_bw;
  auto* rep_eff = rep->add_subcommand("efficiency", "comb preparation, analysis and efficiency estimate");
  rep_eff->add_option("--bandwidth", eff_bw, "comb bandwidth, e.g. 6.4GHz");

  std::string which;
  auto* repro = app.add_subcommand("reproduce", "regenerate figure and table data");
  repro->add_option("target", which, "fig2, fig4, fig5, table1, efficiency or all")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig4", "fig5", "table1", "efficiency", "all"}));

  auto* calib = app.add_subcommand("calibrate", "solve for the TLS coefficients from the pump-probe targets");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig c = load_config(g);

    if (*print_cmd) {
      std::cout << dump_config(c);
      return 0;
    }

    if (*fitc) {
      std::ifstream in(fit_input);
      if (!in) fail(ErrorCode::IoError, "cannot open '" + fit_input + "'");
      const auto data = io::read_xy_csv(in);
      const auto model = *fit_de    ? fit::model_double_exponential()
                         : *fit_ff ? fit::model_flipflop_field(c.material.alpha_ff, c.material.g_factor,
                                                               c.material.temperature)
                                   : fit::model_lorentzian_dip();
      const auto r = fit::fit_curve(model, data);
      print_fit(r);
      return r.converged ? 0 : 3;
    }

    if (*calib) {
      const auto r = calibrate_tls(c);
      std::cout << "[tls]\nkappa_fill = " << io::format_double(r.tls.kappa_fill)
                << "\nkappa_diff = " << io::format_double(r.tls.kappa_diff) << "\n# probe depth ratio "
                << io::format_double(r.probe_depth_ratio) << ", probe width increase "
                << io::format_double(r.probe_width_increase) << " Hz, " << r.evaluations << " evaluations\n";
      return 0;
    }

    if (*sim && *hd) {
      const double B = quantity(hd_field, Dimension::Field);
      if (!hd_dmin.empty()) c.fig2.delay_min = quantity(hd_dmin, Dimension::Time);
      if (!hd_dmax.empty()) c.fig2.delay_max = quantity(hd_dmax, Dimension::Time);
      if (hd_points > 0) c.fig2.delay_count = hd_points;
      c.fig2.noise_rel = quantity(hd_noise, Dimension::Dimensionless);
      auto settings = hole_decay_settings(c);
      const auto delays = log_spaced(c.fig2.delay_min, c.fig2.delay_max, static_cast<std::size_t>(c.fig2.delay_count));
      const auto curve = hole_decay_experiment(B, delays, c.material, c.tls, c.seed, settings);
      const auto fr = fit::fit_curve(fit::model_double_exponential(), decay_series(curve));
      OutputSession s(output_dir(g, c), c);
      s.write(render_all(curve, "hole_decay_" + field_tag(B)));
      nlohmann::json j{{"field_t", B},
                       {"t_long_input_s", flipflop_lifetime(B, c.material.temperature, c.material)},
                       {"fit", to_json(fr)}};
      s.write({"hole_decay_" + field_tag(B) + "_fit.json", json_text(j)});
      s.summary("hole-decay", j);
      std::cout << j.dump(2) << '\n';
      finish(s, g.quiet);
      return fr.converged ? 0 : 3;
    }

    if (*sim && *afc) {
      const double bw = quantity(afc_bw, Dimension::Frequency);
      if (!afc_spacing.empty()) c.fig4.spacing = quantity(afc_spacing, Dimension::Frequency);
      if (!afc_power.empty()) c.fig4.total_power = quantity(afc_power, Dimension::Power);
      if (!afc_pit.empty()) c.fig4.pit_width = quantity(afc_pit, Dimension::Frequency);
      if (!afc_od.empty()) c.material.peak_od = quantity(afc_od, Dimension::Dimensionless);
      const auto run = run_comb(c, c.material, bw);
      const double half = std::min(0.5 * c.efficiency.window, 0.5 * bw);
      const auto section = run.spectrum.window(-half, half);
      const auto m = analyze_comb(section, c.fig4.spacing);
      OutputSession s(output_dir(g, c), c);
      s.write(render_all(run.spectrum, "afc_spectrum"));
      nlohmann::json j{{"bandwidth_hz", bw},
                       {"metrics", to_json(m)},
                       {"efficiency", afc_efficiency(m)},
                       {"storage_time_s", storage_time(c.fig4.spacing)},
                       {"d0_pit_mean", pit_background(run.spectrum, run.pits, c.fig4.spacing, c.fig4.d0_halfwidth)}};
      s.write({"afc_report.json", json_text(j)});
      s.summary("afc", j);
      std::cout << j.dump(2) << '\n';
      finish(s, g.quiet);
      return 0;
    }

    if (*sim && *bf) {
      c.table1.detunings = {quantity(bf_detuning, Dimension::Frequency)};
      if (!bf_bw.empty()) c.table1.bandwidth = quantity(bf_bw, Dimension::Frequency);
      const auto r = run_table1(c);
      OutputSession s(output_dir(g, c), c);
      s.write(render_all(r));
      s.summary("backfill", to_json(r));
      std::cout << to_json(r).dump(2) << '\n';
      finish(s, g.quiet);
      return 0;
    }

    if (*sim && *pp) {
      c.fig5.pump_powers = {quantity(pp_pump, Dimension::Power)};
      if (!pp_probe.empty()) c.fig5.probe_power = quantity(pp_probe, Dimension::Power);
      const auto r = run_fig5(c);
      OutputSession s(output_dir(g, c), c);
      s.write(render(r, Format::Csv));
      s.write(render(r, Format::Json));
      s.summary("pump-probe", to_json(r));
      std::cout << to_json(r).dump(2) << '\n';
      finish(s, g.quiet);
      return 0;
    }

    if (*sim && *sq) {
      const auto seq = pump_sequence_from_json(nlohmann::json::parse(io::read_file(sq_file)));
      const FrequencyGrid grid(quantity(sq_min, Dimension::Frequency), quantity(sq_max, Dimension::Frequency),
                               c.bin_width);
      const auto s0 = init_equilibrium_state(grid, c.material);
      const auto spec = absorption_spectrum(evolve_final(s0, seq, c.material, c.tls, c.evolve), c.material);
      OutputSession s(output_dir(g, c), c);
      s.write(render_all(spec, "sequence_spectrum"));
      finish(s, g.quiet);
      return 0;
    }

    if (*rep_eff) {
      if (!eff_bw.empty()) c.efficiency.bandwidth = quantity(eff_bw, Dimension::Frequency);
      const auto r = run_efficiency(c);
      OutputSession s(output_dir(g, c), c);
      s.write(render_all(r));
      s.summary("efficiency", to_json(r));
      std::cout << to_json(r).dump(2) << '\n';
      finish(s, g.quiet);
      return 0;
    }

    if (*repro) {
      OutputSession s(output_dir(g, c), c);
      const bool all = which == "all";
      auto say = [&](const char* what) {
        if (!g.quiet) std::cout << what << '\n';
      };
      if (all || which == "fig2") {
        say("fig2: hole decay versus field");
        const auto r = run_fig2(c);
        s.write(render_all(r));
        s.summary("fig2", to_json(r));
      }
      if (all || which == "fig4") {
        say("fig4: background versus bandwidth");
        const auto r = run_fig4(c);
        s.write(render_all(r));
        s.summary("fig4", to_json(r));
      }
      if (all || which == "fig5") {
        say("fig5: pump-probe");
        const auto r = run_fig5(c);
        s.write(render_all(r));
        s.summary("fig5", to_json(r));
      }
      if (all || which == "table1") {
        say("table1: back-filling");
        const auto r = run_table1(c);
        s.write(render_all(r));
        s.summary("table1", to_json(r));
      }
      if (all || which == "efficiency") {
        say("efficiency");
        const auto r = run_efficiency(c);
        s.write(render_all(r));
        s.summary("efficiency", to_json(r));
      }
      finish(s, g.quiet);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "afcsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "afcsim: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
