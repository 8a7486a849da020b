#pragma once

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afcsim/error.hpp"
#include "afcsim/experiments/config_io.hpp"
#include "afcsim/experiments/scenarios.hpp"
#include "afcsim/io/csv.hpp"
#include "afcsim/io/files.hpp"
#include "afcsim/io/format.hpp"
#include "afcsim/io/svg.hpp"

namespace afcsim::experiments {

inline constexpr const char* version = "0.1.0";

enum class Format { Csv, Json, Svg };

inline Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  if (s == "svg" || s == "svg-plot-data") return Format::Svg;
  fail(ErrorCode::UnsupportedFormat, "unknown export format '" + s + "' (csv, json, svg)");
}

/// One rendered output: file name and its exact bytes.
struct Document {
  std::string name;
  std::string content;
};

using Documents = std::vector<Document>;

// JSON summaries --------------------------------------------------------------------------

inline nlohmann::json to_json(const fit::FitResult& f) {
  nlohmann::json j;
  for (std::size_t i = 0; i < f.names.size(); ++i)
    j["params"][f.names[i]] = {{"value", f.params[static_cast<Eigen::Index>(i)]},
                               {"std_error", f.std_errors[static_cast<Eigen::Index>(i)]},
                               {"degenerate", static_cast<bool>(f.degenerate[i])}};
  j["chi2"] = f.chi2;
  j["residual_norm"] = f.residual_norm;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  return j;
}

inline nlohmann::json to_json(const HoleMetrics& h) {
  return {{"center_hz", h.center}, {"depth_od", h.depth}, {"fwhm_hz", h.fwhm},
          {"area_od_hz", h.area},  {"baseline_od", h.baseline}};
}

inline nlohmann::json to_json(const CombMetrics& m) {
  return {{"d_peak", m.d_peak},       {"d0", m.d0},           {"spacing_hz", m.spacing},
          {"tooth_fwhm_hz", m.tooth_fwhm}, {"finesse", m.finesse}, {"bandwidth_hz", m.bandwidth},
          {"teeth", m.teeth}};
}

inline nlohmann::json to_json(const Fig2Report& r) {
  nlohmann::json j;
  for (const auto& f : r.fields)
    j["fields"].push_back({{"field_t", f.field}, {"t_long_input_s", f.t_long_input}, {"fit", to_json(f.fit)}});
  j["flipflop_fit"] = to_json(r.field_fit);
  return j;
}

inline nlohmann::json to_json(const Fig4Report& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : r.points) j.push_back({{"bandwidth_hz", p.bandwidth}, {"pits", p.pits}, {"d0", p.d0}});
  return {{"points", j}};
}

inline nlohmann::json to_json(const Table1Report& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : r.points) j.push_back({{"detuning_hz", p.detuning}, {"d0", p.d0}});
  return {{"points", j}, {"antihole_offset_hz", r.antihole_offset}, {"antihole_fwhm_hz", r.antihole_fwhm}};
}

inline nlohmann::json to_json(const Fig5Report& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : r.points)
    j.push_back({{"pump_power_w", p.pump_power}, {"probe", to_json(p.probe)}, {"pump", to_json(p.pump)}});
  return {{"points", j}};
}

inline nlohmann::json to_json(const EfficiencyReport& r) {
  return {{"metrics", to_json(r.metrics)}, {"efficiency", r.efficiency}, {"storage_time_s", r.storage_time}};
}

// Rendering -------------------------------------------------------------------------------

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string field_tag(double B) { return io::format_double(B * 1e4) + "G"; }

inline Documents render(const Fig2Report& r, Format f) {
  Documents out;
  if (f == Format::Csv) {
    for (const auto& fd : r.fields) {
      std::ostringstream s;
      write_csv(s, fd.curve);
      out.push_back({"fig2_decay_" + field_tag(fd.field) + ".csv", s.str()});
    }
    io::Table t{{"field_t", "t_short_s", "t_long_s", "t_long_input_s"}, {}};
    for (const auto& fd : r.fields) t.rows.push_back({fd.field, fd.fit.params[1], fd.fit.params[3], fd.t_long_input});
    out.push_back({"fig2_lifetimes.csv", io::to_csv(t)});
  } else if (f == Format::Json) {
    out.push_back({"fig2_report.json", json_text(to_json(r))});
  } else {
    std::vector<io::PlotSeries> s;
    for (const auto& fd : r.fields) {
      io::PlotSeries p{field_tag(fd.field), {}, {}};
      for (const auto& pt : fd.curve.points) {
        p.x.push_back(pt.delay);
        p.y.push_back(pt.area);
      }
      s.push_back(std::move(p));
    }
    out.push_back({"fig2_decay.svg", io::svg_plot({"Hole area decay", "delay (s)", "area (OD Hz)", true, true}, s)});
  }
  return out;
}

inline Documents render(const Fig4Report& r, Format f) {
  if (f == Format::Json) return {{"fig4_background.json", json_text(to_json(r))}};
  io::Table t{{"bandwidth_hz", "pits", "d0"}, {}};
  io::PlotSeries p{"d0", {}, {}};
  for (const auto& pt : r.points) {
    t.rows.push_back({pt.bandwidth, static_cast<double>(pt.pits), pt.d0});
    p.x.push_back(pt.bandwidth);
    p.y.push_back(pt.d0);
  }
  if (f == Format::Csv) return {{"fig4_background.csv", io::to_csv(t)}};
  return {{"fig4_background.svg",
           io::svg_plot({"Background vs comb bandwidth", "bandwidth (Hz)", "d0 (OD)", true, true}, {p})}};
}

inline Documents render(const Table1Report& r, Format f) {
  if (f == Format::Json) return {{"table1_backfill.json", json_text(to_json(r))}};
  io::Table t{{"detuning_hz", "d0"}, {}};
  io::PlotSeries p{"d0", {}, {}};
  for (const auto& pt : r.points) {
    t.rows.push_back({pt.detuning, pt.d0});
    p.x.push_back(pt.detuning);
    p.y.push_back(pt.d0);
  }
  if (f == Format::Csv) return {{"table1_backfill.csv", io::to_csv(t)}};
  return {{"table1_backfill.svg",
           io::svg_plot({"Background vs second-comb detuning", "detuning (Hz)", "d0 (OD)", false, true}, {p})}};
}

inline Documents render(const Fig5Report& r, Format f) {
  if (f == Format::Json) return {{"fig5_pump_probe.json", json_text(to_json(r))}};
  io::Table t{{"pump_power_w", "probe_depth", "probe_fwhm_hz", "pump_depth", "pump_fwhm_hz"}, {}};
  io::PlotSeries a{"probe", {}, {}}, b{"pump", {}, {}};
  for (const auto& pt : r.points) {
    t.rows.push_back({pt.pump_power, pt.probe.depth, pt.probe.fwhm, pt.pump.depth, pt.pump.fwhm});
    a.x.push_back(pt.pump_power);
    a.y.push_back(pt.probe.depth);
    b.x.push_back(pt.pump_power);
    b.y.push_back(pt.pump.depth);
  }
  if (f == Format::Csv) return {{"fig5_pump_probe.csv", io::to_csv(t)}};
  return {{"fig5_pump_probe.svg",
           io::svg_plot({"Hole depth vs pump power", "pump power (W)", "depth (OD)", true, true}, {a, b})}};
}

inline Documents render(const AbsorptionSpectrum& s, const std::string& stem, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    write_csv(o, s);
    return {{stem + ".csv", o.str()}};
  }
  if (f == Format::Json) {
    nlohmann::json j{{"detuning_hz", nlohmann::json::array()}, {"od", s.od}};
    for (std::size_t i = 0; i < s.size(); ++i) j["detuning_hz"].push_back(s.detuning(i));
    return {{stem + ".json", json_text(j)}};
  }
  io::PlotSeries p{"", {}, s.od};
  for (std::size_t i = 0; i < s.size(); ++i) p.x.push_back(s.detuning(i));
  return {{stem + ".svg", io::svg_plot({"Absorption spectrum", "detuning (Hz)", "optical depth (OD)"}, {p})}};
}

inline Documents render(const EfficiencyReport& r, Format f) {
  if (f == Format::Json) return {{"efficiency.json", json_text(to_json(r))}};
  return render(r.section, "efficiency_section", f);
}

inline Documents render(const DecayCurve& c, const std::string& stem, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    write_csv(o, c);
    return {{stem + ".csv", o.str()}};
  }
  if (f == Format::Json) return {{stem + ".json", json_text(to_json(c))}};
  io::PlotSeries p{"", {}, {}};
  for (const auto& pt : c.points) {
    p.x.push_back(pt.delay);
    p.y.push_back(pt.area);
  }
  return {{stem + ".svg", io::svg_plot({"Hole area decay", "delay (s)", "area (OD Hz)", true, true}, {p})}};
}

template <class Artifact>
Documents render_all(const Artifact& a) {
  Documents out;
  for (Format f : {Format::Csv, Format::Json, Format::Svg}) {
    auto d = render(a, f);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

template <class Artifact>
Documents render_all(const Artifact& a, const std::string& stem) {
  Documents out;
  for (Format f : {Format::Csv, Format::Json, Format::Svg}) {
    auto d = render(a, stem, f);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

// Manifest --------------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects written files and scenario summaries, then writes manifest.json next to them.
class OutputSession {
 public:
  OutputSession(std::filesystem::path dir, const ExperimentConfig& cfg)
      : dir_(std::move(dir)), config_text_(dump_config(cfg)), started_(utc_timestamp()) {
    write({"config.toml", config_text_});
  }

  void write(const Document& d) { files_.push_back(io::write_output(dir_, d.name, d.content)); }
  void write(const Documents& ds) {
    for (const auto& d : ds) write(d);
  }
  void summary(const std::string& scenario, nlohmann::json j) { summaries_[scenario] = std::move(j); }

  const std::vector<io::WrittenFile>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

  nlohmann::json manifest() const {
    nlohmann::json j;
    j["version"] = version;
    j["config"] = config_text_;
    j["started_utc"] = started_;
    j["finished_utc"] = utc_timestamp();
    j["summaries"] = summaries_;
    for (const auto& f : files_) j["outputs"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return j;
  }

  io::WrittenFile finish() const { return io::write_output(dir_, "manifest.json", json_text(manifest())); }

 private:
  std::filesystem::path dir_;
  std::string config_text_;
  std::string started_;
  std::vector<io::WrittenFile> files_;
  nlohmann::json summaries_ = nlohmann::json::object();
};

}  // namespace afcsim::experiments
