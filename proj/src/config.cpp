#include "mzisim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <variant>

#include "mzisim/constants.hpp"
#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {

ModeSelection parse_mode_selection(const std::string& text) {
  if (text == "sp") return ModeSelection::SinglePhoton;
  if (text == "cw") return ModeSelection::ContinuousWave;
  if (text == "both") return ModeSelection::Both;
  throw ConfigError("mode must be sp, cw or both (got '" + text + "')");
}

std::string to_string(ModeSelection m) {
  switch (m) {
    case ModeSelection::SinglePhoton:
      return "sp";
    case ModeSelection::ContinuousWave:
      return "cw";
    case ModeSelection::Both:
      break;
  }
  return "both";
}

std::vector<SourceMode> modes_of(ModeSelection m) {
  switch (m) {
    case ModeSelection::SinglePhoton:
      return {SourceMode::SinglePhoton};
    case ModeSelection::ContinuousWave:
      return {SourceMode::ContinuousWave};
    case ModeSelection::Both:
      break;
  }
  return {SourceMode::SinglePhoton, SourceMode::ContinuousWave};
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const IniDocument::Entry& e, const std::string& section, const std::string& key) {
  return "[" + section + "] " + key + " (line " + std::to_string(e.line) + ")";
}

double parse_number(const IniDocument::Entry& e, const std::string& section, const std::string& key) {
  double v = 0.0;
  const auto& s = e.value;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(where(e, section, key) + ": not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_list(const IniDocument::Entry& e, const std::string& section, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    IniDocument::Entry sub{trim(item), e.line};
    out.push_back(parse_number(sub, section, key));
  }
  return out;
}

// Inline table "0:1, 100:0.8, ...".
TabulatedVisibility parse_inline_table(const IniDocument::Entry& e, const std::string& section,
                                       const std::string& key) {
  TabulatedVisibility t;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(where(e, section, key) + ": expected dl:visibility pairs");
    IniDocument::Entry a{trim(item.substr(0, colon)), e.line}, b{trim(item.substr(colon + 1)), e.line};
    t.points.push_back({parse_number(a, section, key), parse_number(b, section, key)});
  }
  return t;
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

IniDocument IniDocument::parse(std::istream& in) {
  IniDocument doc;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find_first_of("#;");
    auto s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      doc.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a [section]");
    doc.sections_[section][trim(s.substr(0, eq))] = {trim(s.substr(eq + 1)), lineno};
  }
  return doc;
}

RunConfig apply_config(const IniDocument& doc, RunConfig cfg, const std::filesystem::path& base_dir) {
  auto& ex = cfg.experiment;
  using Setter = std::function<void(const IniDocument::Entry&, const std::string&, const std::string&)>;
  auto num = [](double& target) -> Setter {
    return [&target](const auto& e, const auto& s, const auto& k) { target = parse_number(e, s, k); };
  };

  // Spectral settings are collected first and resolved together.
  std::string model = "gaussian";
  double coherence_length_um = kMeasuredCoherenceLengthUm, wavelength_nm = kDefaultWavelengthNm, hwhm_hz = 0.0;
  double center_frequency_hz = 0.0, sigma_nu_hz = 0.0;
  std::optional<TabulatedVisibility> table;
  bool spectral_given = false;

  const std::map<std::string, std::map<std::string, Setter>> schema{
      {"experiment",
       {{"mode", [&](const auto& e, const auto&, const auto&) { cfg.modes = parse_mode_selection(e.value); }},
        {"delta_l_um_list",
         [&](const auto& e, const auto& s, const auto& k) { ex.delta_l_list_um = parse_list(e, s, k); }},
        {"seed",
         [&](const auto& e, const auto& s, const auto& k) {
           std::uint64_t v = 0;
           auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
           if (ec != std::errc{} || p != e.value.data() + e.value.size())
             throw ConfigError(where(e, s, k) + ": seed must be a non-negative integer");
           ex.seed = v;
         }},
        {"threads", [&](const auto& e, const auto& s, const auto& k) { ex.threads = static_cast<int>(parse_number(e, s, k)); }},
        {"phase_offset_rad",
         [&](const auto& e, const auto& s, const auto& k) {
           if (e.value == "random")
             ex.fixed_phase_offset_rad.reset();
           else
             ex.fixed_phase_offset_rad = parse_number(e, s, k);
         }}}},
      {"source", {{"rate_cps", num(ex.source_rate_cps)}}},
      {"spectral",
       {{"model",
         [&](const auto& e, const auto& s, const auto& k) {
           if (e.value != "gaussian" && e.value != "lorentzian" && e.value != "tabulated")
             throw ConfigError(where(e, s, k) + ": model must be gaussian, lorentzian or tabulated");
           model = e.value;
         }},
        {"coherence_length_um", num(coherence_length_um)},
        {"center_wavelength_nm", num(wavelength_nm)},
        {"hwhm_hz", num(hwhm_hz)},
        {"center_frequency_hz", num(center_frequency_hz)},
        {"sigma_nu_hz", num(sigma_nu_hz)},
        {"table",
         [&](const auto& e, const auto& s, const auto& k) { table = parse_inline_table(e, s, k); }},
        {"table_preset",
         [&](const auto& e, const auto& s, const auto& k) {
           if (e.value == "sp")
             table = reference_sp_table();
           else if (e.value == "cw")
             table = reference_cw_table();
           else
             throw ConfigError(where(e, s, k) + ": table_preset must be sp or cw");
         }},
        {"table_csv",
         [&](const auto& e, const auto& s, const auto& k) {
           std::filesystem::path p = e.value;
           if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
           try {
             table = load_tabulated_csv(p);
           } catch (const Error& err) {
             throw ConfigError(where(e, s, k) + ": " + err.what());
           }
         }}}},
      {"mzi",
       {{"fringe_period_mm", num(ex.mzi.fringe_period_mm)},
        {"beam_center_mm", num(ex.mzi.beam_center_mm)},
        {"beam_radius_mm", num(ex.mzi.beam_radius_mm)},
        {"split_ratio", num(ex.mzi.split_ratio)}}},
      {"plate", {{"thickness_mm", num(ex.plate.thickness_mm)}, {"refractive_index", num(ex.plate.refractive_index)}}},
      {"spcm",
       {{"dead_time_ns", num(ex.spcm.dead_time_ns)},
        {"dark_rate_cps", num(ex.spcm.dark_rate_cps)},
        {"jitter_sigma_ps", num(ex.spcm.jitter_sigma_ps)},
        {"efficiency", num(ex.spcm.efficiency)}}},
      {"ccu", {{"coincidence_window_ns", num(ex.ccu.coincidence_window_ns)}, {"bin_duration_s", num(ex.ccu.bin_duration_s)}}},
      {"scan",
       {{"range_mm", num(ex.scan.range_mm)},
        {"n_bins",
         [&](const auto& e, const auto& s, const auto& k) {
           const double v = parse_number(e, s, k);
           if (v != std::floor(v)) throw ConfigError(where(e, s, k) + ": n_bins must be an integer");
           ex.scan.n_bins = static_cast<int>(v);
         }},
        {"slit_width_mm", num(ex.scan.slit_width_mm)},
        {"scan_duration_sp_s", num(ex.scan.scan_duration_sp_s)},
        {"scan_duration_cw_s", num(ex.scan.scan_duration_cw_s)},
        {"time_scale", num(ex.scan.time_scale)},
        {"cw_noise_rms", num(ex.cw_noise_rms)}}},
      {"stats", {{"duration_s", num(cfg.stats_duration_s)}}},
  };

  for (const auto& [section, keys] : doc.sections()) {
    auto sec = schema.find(section);
    if (sec == schema.end()) throw ConfigError("unknown section [" + section + "]");
    if (section == "spectral") spectral_given = true;
    for (const auto& [key, entry] : keys) {
      auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError(where(entry, section, key) + ": unknown key");
      it->second(entry, section, key);
    }
  }

  if (spectral_given) {
    if (!(wavelength_nm > 0.0) || !(coherence_length_um > 0.0))
      throw ConfigError("[spectral] wavelength and coherence length must be > 0");
    // Explicit frequencies take precedence over wavelength / coherence length.
    const double nu0 = center_frequency_hz > 0.0 ? center_frequency_hz : kSpeedOfLight / (wavelength_nm * 1e-9);
    if (model == "gaussian") {
      const double sigma = sigma_nu_hz > 0.0 ? sigma_nu_hz : gaussian_sigma_for_coherence_length(coherence_length_um);
      ex.spectral = GaussianSpectrum{nu0, sigma};
    } else if (model == "lorentzian") {
      // Without an explicit width, the 1/e length sets it: L_c = c / (2 pi hwhm).
      const double w = hwhm_hz > 0.0 ? hwhm_hz : kSpeedOfLightUmPerS / (2.0 * kPi * coherence_length_um);
      ex.spectral = LorentzianSpectrum{nu0, w};
    } else {
      if (!table) throw ConfigError("[spectral] model = tabulated needs table, table_preset or table_csv");
      ex.spectral = *table;
    }
  }
  try {
    ex.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (!(cfg.stats_duration_s > 0.0)) throw ConfigError("[stats] duration_s must be > 0");
  return cfg;
}

RunConfig load_config(std::istream& in, const std::filesystem::path& base_dir) {
  return apply_config(IniDocument::parse(in), RunConfig{}, base_dir);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return load_config(in, path.parent_path());
}

std::string config_snapshot(const RunConfig& cfg) {
  const auto& ex = cfg.experiment;
  std::ostringstream o;
  o << "[experiment]\n";
  o << "mode = " << to_string(cfg.modes) << '\n';
  o << "delta_l_um_list = ";
  for (std::size_t i = 0; i < ex.delta_l_list_um.size(); ++i) o << (i ? ", " : "") << fmt(ex.delta_l_list_um[i]);
  o << "\nseed = " << ex.seed << '\n';
  o << "threads = " << ex.threads << '\n';
  o << "phase_offset_rad = " << (ex.fixed_phase_offset_rad ? fmt(*ex.fixed_phase_offset_rad) : "random") << "\n\n";
  o << "[source]\nrate_cps = " << fmt(ex.source_rate_cps) << "\n\n";

  o << "[spectral]\n";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianSpectrum>) {
          o << "model = gaussian\n";
          o << "# coherence_length_um = " << fmt(coherence_curve(ex.spectral).coherence_length_um) << '\n';
          o << "center_frequency_hz = " << fmt(m.center_frequency_hz) << '\n';
          o << "sigma_nu_hz = " << fmt(m.sigma_nu_hz) << '\n';
        } else if constexpr (std::is_same_v<T, LorentzianSpectrum>) {
          o << "model = lorentzian\n";
          o << "center_frequency_hz = " << fmt(m.center_frequency_hz) << '\n';
          o << "hwhm_hz = " << fmt(m.hwhm_hz) << '\n';
        } else {
          o << "model = tabulated\ntable = ";
          for (std::size_t i = 0; i < m.points.size(); ++i)
            o << (i ? ", " : "") << fmt(m.points[i].delta_l_um) << ':' << fmt(m.points[i].visibility);
          o << '\n';
        }
      },
      ex.spectral.variant());

  o << "\n[mzi]\n";
  o << "fringe_period_mm = " << fmt(ex.mzi.fringe_period_mm) << '\n';
  o << "beam_center_mm = " << fmt(ex.mzi.beam_center_mm) << '\n';
  o << "beam_radius_mm = " << fmt(ex.mzi.beam_radius_mm) << '\n';
  o << "split_ratio = " << fmt(ex.mzi.split_ratio) << "\n\n";
  o << "[plate]\nthickness_mm = " << fmt(ex.plate.thickness_mm) << "\nrefractive_index = " << fmt(ex.plate.refractive_index)
    << "\n\n";
  o << "[spcm]\n";
  o << "dead_time_ns = " << fmt(ex.spcm.dead_time_ns) << '\n';
  o << "dark_rate_cps = " << fmt(ex.spcm.dark_rate_cps) << '\n';
  o << "jitter_sigma_ps = " << fmt(ex.spcm.jitter_sigma_ps) << '\n';
  o << "efficiency = " << fmt(ex.spcm.efficiency) << "\n\n";
  o << "[ccu]\ncoincidence_window_ns = " << fmt(ex.ccu.coincidence_window_ns)
    << "\nbin_duration_s = " << fmt(ex.ccu.bin_duration_s) << "\n\n";
  o << "[scan]\n";
  o << "range_mm = " << fmt(ex.scan.range_mm) << '\n';
  o << "n_bins = " << ex.scan.n_bins << '\n';
  o << "slit_width_mm = " << fmt(ex.scan.slit_width_mm) << '\n';
  o << "scan_duration_sp_s = " << fmt(ex.scan.scan_duration_sp_s) << '\n';
  o << "scan_duration_cw_s = " << fmt(ex.scan.scan_duration_cw_s) << '\n';
  o << "time_scale = " << fmt(ex.scan.time_scale) << '\n';
  o << "cw_noise_rms = " << fmt(ex.cw_noise_rms) << "\n\n";
  o << "[stats]\nduration_s = " << fmt(cfg.stats_duration_s) << '\n';
  return o.str();
}

}  // namespace mzisim
