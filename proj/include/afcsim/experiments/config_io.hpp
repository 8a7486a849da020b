#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "afcsim/error.hpp"
#include "afcsim/experiments/config.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/units.hpp"

// TOML-style config: [section] headers, `key = value` lines, `#` comments. Values are
// numbers, quoted strings, numbers with unit suffixes ("350G"), or [a, b, ...] lists.

namespace afcsim::experiments {

namespace config_detail {

using units::Dimension;

struct Num { double* v; Dimension dim; };
struct NumList { std::vector<double>* v; Dimension dim; };
struct OptNum { std::optional<double>* v; Dimension dim; };
struct Int { int* v; };
struct Seed { std::uint64_t* v; };
struct Text { std::string* v; };
struct Shape { PitShape* v; };

using Target = std::variant<Num, NumList, OptNum, Int, Seed, Text, Shape>;

struct Binding {
  std::string section;
  std::string key;
  Target target;
};

inline std::vector<Binding> bindings(ExperimentConfig& c) {
  constexpr auto F = Dimension::Frequency, B = Dimension::Field, T = Dimension::Time, P = Dimension::Power,
                 K = Dimension::Temperature, D = Dimension::Dimensionless;
  auto& m = c.material;
  return {
      {"", "seed", Seed{&c.seed}},
      {"", "output_dir", Text{&c.output_dir}},
      {"", "bin_width", Num{&c.bin_width, F}},

      {"material", "g_factor", Num{&m.g_factor, D}},
      {"material", "T1_opt", Num{&m.T1_opt, T}},
      {"material", "t_short", Num{&m.t_short, T}},
      {"material", "alpha_ff", Num{&m.alpha_ff, D}},
      {"material", "Gamma_s", Num{&m.Gamma_s, F}},
      {"material", "gamma_s", Num{&m.gamma_s, D}},
      {"material", "gamma_h_fwhm", Num{&m.gamma_h_fwhm, F}},
      {"material", "beta_zeeman", Num{&m.beta_zeeman, D}},
      {"material", "beta_shf", Num{&m.beta_shf, D}},
      {"material", "peak_od", Num{&m.peak_od, D}},
      {"material", "er_density", Num{&m.er_density, D}},
      {"material", "C_isd", Num{&m.C_isd, D}},
      {"material", "temperature", Num{&m.temperature, K}},
      {"material", "B_field", Num{&m.B_field, B}},
      {"material", "shf_fwhm", Num{&m.shf_fwhm, F}},
      {"material", "shf_weight", Num{&m.shf_weight, D}},
      {"material", "pump_rate_per_psd", Num{&m.pump_rate_per_psd, D}},
      {"material", "zeeman_splitting_override", OptNum{&m.zeeman_splitting_override, F}},
      {"material", "antihole_fwhm_override", OptNum{&m.antihole_fwhm_override, F}},

      {"tls", "kappa_fill", Num{&c.tls.kappa_fill, D}},
      {"tls", "kappa_diff", Num{&c.tls.kappa_diff, D}},

      {"modulator", "eff_at_1ghz", Num{&c.modulator.eff_at_1ghz, D}},
      {"modulator", "carrier_share", Num{&c.modulator.carrier_share, D}},
      {"modulator", "shape", Shape{&c.modulator.shape}},

      {"evolve", "step", Num{&c.evolve.step, T}},
      {"evolve", "min_step", Num{&c.evolve.min_step, T}},
      {"evolve", "quadrature_nodes", Int{&c.evolve.quadrature_nodes}},

      {"fig2", "fields", NumList{&c.fig2.fields, B}},
      {"fig2", "delay_min", Num{&c.fig2.delay_min, T}},
      {"fig2", "delay_max", Num{&c.fig2.delay_max, T}},
      {"fig2", "delay_count", Int{&c.fig2.delay_count}},
      {"fig2", "hole_center", Num{&c.fig2.hole_center, F}},
      {"fig2", "hole_width", Num{&c.fig2.hole_width, F}},
      {"fig2", "burn_duration", Num{&c.fig2.burn_duration, T}},
      {"fig2", "burn_power", Num{&c.fig2.burn_power, P}},
      {"fig2", "read_span", Num{&c.fig2.read_span, F}},
      {"fig2", "repeats", Int{&c.fig2.repeats}},
      {"fig2", "noise_rel", Num{&c.fig2.noise_rel, D}},

      {"fig4", "bandwidths", NumList{&c.fig4.bandwidths, F}},
      {"fig4", "spacing", Num{&c.fig4.spacing, F}},
      {"fig4", "pit_width", Num{&c.fig4.pit_width, F}},
      {"fig4", "total_power", Num{&c.fig4.total_power, P}},
      {"fig4", "duration", Num{&c.fig4.duration, T}},
      {"fig4", "idle", Num{&c.fig4.idle, T}},
      {"fig4", "margin", Num{&c.fig4.margin, F}},
      {"fig4", "d0_halfwidth", Num{&c.fig4.d0_halfwidth, F}},

      {"fig5", "pump_powers", NumList{&c.fig5.pump_powers, P}},
      {"fig5", "probe_power", Num{&c.fig5.probe_power, P}},
      {"fig5", "separation", Num{&c.fig5.separation, F}},
      {"fig5", "probe_center", Num{&c.fig5.probe_center, F}},
      {"fig5", "hole_width", Num{&c.fig5.hole_width, F}},
      {"fig5", "burn_duration", Num{&c.fig5.burn_duration, T}},
      {"fig5", "idle", Num{&c.fig5.idle, T}},
      {"fig5", "grid_min", Num{&c.fig5.grid_min, F}},
      {"fig5", "grid_max", Num{&c.fig5.grid_max, F}},
      {"fig5", "field", Num{&c.fig5.field, B}},

      {"table1", "detunings", NumList{&c.table1.detunings, F}},
      {"table1", "peak_od", Num{&c.table1.peak_od, D}},
      {"table1", "bandwidth", Num{&c.table1.bandwidth, F}},
      {"table1", "forced_zeeman", OptNum{&c.table1.forced_zeeman, F}},
      {"table1", "forced_antihole_fwhm", OptNum{&c.table1.forced_antihole_fwhm, F}},

      {"efficiency", "bandwidth", Num{&c.efficiency.bandwidth, F}},
      {"efficiency", "window", Num{&c.efficiency.window, F}},
  };
}

inline std::string_view trim(std::string_view s) { return units::detail::trim(s); }

inline std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

inline std::vector<std::string> split_list(std::string_view v) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(ErrorCode::ParseError, "expected a [list]");
  v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= v.size(); ++i) {
    if (i == v.size() || v[i] == ',') {
      auto item = trim(v.substr(start, i - start));
      if (!item.empty()) out.push_back(unquote(item));
      start = i + 1;
    }
  }
  return out;
}

inline std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

inline void assign(const Target& t, std::string_view raw) {
  std::visit(
      [&](auto&& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Num>) {
          *b.v = units::parse_quantity(unquote(raw), b.dim);
        } else if constexpr (std::is_same_v<B, NumList>) {
          b.v->clear();
          for (const auto& item : split_list(raw)) b.v->push_back(units::parse_quantity(item, b.dim));
        } else if constexpr (std::is_same_v<B, OptNum>) {
          const auto s = unquote(raw);
          if (s == "none" || s.empty()) b.v->reset();
          else *b.v = units::parse_quantity(s, b.dim);
        } else if constexpr (std::is_same_v<B, Int>) {
          const double d = units::parse_number(unquote(raw));
          if (d != static_cast<double>(static_cast<int>(d))) fail(ErrorCode::ParseError, "expected an integer");
          *b.v = static_cast<int>(d);
        } else if constexpr (std::is_same_v<B, Seed>) {
          const auto s = unquote(raw);
          std::uint64_t v = 0;
          auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
          if (ec != std::errc{} || p != s.data() + s.size()) fail(ErrorCode::ParseError, "bad seed '" + s + "'");
          *b.v = v;
        } else if constexpr (std::is_same_v<B, Text>) {
          *b.v = unquote(raw);
        } else if constexpr (std::is_same_v<B, Shape>) {
          *b.v = pit_shape_from_string(unquote(raw));
        }
      },
      t);
}

inline std::string render(const Target& t) {
  return std::visit(
      [](auto&& b) -> std::string {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Num>) {
          return io::format_double(*b.v);
        } else if constexpr (std::is_same_v<B, NumList>) {
          std::string s = "[";
          for (std::size_t i = 0; i < b.v->size(); ++i) s += (i ? ", " : "") + io::format_double((*b.v)[i]);
          return s + "]";
        } else if constexpr (std::is_same_v<B, OptNum>) {
          return b.v->has_value() ? io::format_double(**b.v) : "\"none\"";
        } else if constexpr (std::is_same_v<B, Int> || std::is_same_v<B, Seed>) {
          return std::to_string(*b.v);
        } else if constexpr (std::is_same_v<B, Text>) {
          return "\"" + *b.v + "\"";
        } else {
          return "\"" + std::string(to_string(*b.v)) + "\"";
        }
      },
      t);
}

}  // namespace config_detail

/// Applies `text` on top of `base`. Unknown keys are an error so typos do not pass silently.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {}) {
  auto table = config_detail::bindings(base);
  std::map<std::string, const config_detail::Target*> index;
  for (const auto& b : table) index[b.section + "." + b.key] = &b.target;

  std::string section;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = config_detail::strip_comment(line);
    const auto s = config_detail::trim(body);
    if (s.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') fail(ErrorCode::ParseError, where + "unterminated section header");
      section = std::string(config_detail::trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::ParseError, where + "expected key = value");
    const auto key = std::string(config_detail::trim(s.substr(0, eq)));
    const auto it = index.find(section + "." + key);
    if (it == index.end()) fail(ErrorCode::ParseError, where + "unknown key '" + section + "." + key + "'");
    try {
      config_detail::assign(*it->second, s.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, where + e.what());
    }
  }
  base.validate();
  return base;
}

/// Full document with every value, readable back by parse_config.
inline std::string dump_config(const ExperimentConfig& c) {
  auto copy = c;
  const auto table = config_detail::bindings(copy);
  std::ostringstream out;
  std::string section = "";
  for (const auto& b : table) {
    if (b.section != section) {
      section = b.section;
      out << "\n[" << section << "]\n";
    }
    out << b.key << " = " << config_detail::render(b.target) << '\n';
  }
  return out.str();
}

}  // namespace afcsim::experiments
