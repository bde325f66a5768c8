#include "mzisim/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"
#include "mzisim/svg.hpp"

namespace mzisim {
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

void print_series(std::ostream& out, const SummaryReport& r) {
  for (const auto& s : r.series) {
    out << "[" << s.label << "]\n";
    for (const auto& p : s.points)
      out << "  dL " << std::setw(7) << fixed(p.delta_l_um, 1) << " um  V = " << fixed(p.visibility, 3) << " +/- "
          << fixed(p.sigma, 3) << '\n';
    if (s.line)
      out << "  line: V = " << fixed(s.line->intercept, 4) << " + (" << std::scientific << std::setprecision(4)
          << s.line->slope_per_um << std::defaultfloat << ") dL;  coherence length " << fixed(s.line->coherence_length_um, 1)
          << " um;  dispersion " << fixed(s.line->dispersion, 4) << '\n';
    else
      out << "  no coherence length: " << s.line_error << '\n';
  }
  if (r.comparison)
    out << "line gap (" << r.comparison->a << " vs " << r.comparison->b << ") RMS "
        << fixed(r.comparison->result.line_gap_rms, 4) << " over [" << fixed(r.comparison->result.range_lo_um, 0) << ", "
        << fixed(r.comparison->result.range_hi_um, 0) << "] um\n";
}

}  // namespace

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg = flags.config ? load_config(*flags.config) : RunConfig{};
  if (flags.seed) cfg.experiment.seed = *flags.seed;
  if (flags.time_scale) cfg.experiment.scan.time_scale = *flags.time_scale;
  if (flags.mode) cfg.modes = parse_mode_selection(*flags.mode);
  if (flags.format != "json" && flags.format != "csv") throw ConfigError("--format must be csv or json");
  try {
    cfg.experiment.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

StatisticsReport cmd_stats(const RunConfig& config, const CommonFlags& flags, std::ostream& out) {
  prepare_out_dir(flags.out_dir);
  const auto report = simulate_statistics(config.experiment, config.stats_duration_s);
  write_file_atomic(flags.out_dir / "stats.json", statistics_json(report, config.experiment.seed));
  if (flags.format == "csv") {
    auto dump = [&](const char* name, const std::vector<CountRecord>& bins) {
      std::ostringstream o;
      write_counts_csv(o, bins);
      write_file_atomic(flags.out_dir / name, o.str());
    };
    dump("counts_d1.csv", report.bins_d1);
    dump("counts_d2.csv", report.bins_d2);
    dump("counts_coincidence.csv", report.bins_coincidence);
  }
  out << "photon statistics over " << report.duration_s << " s at source rate " << report.source_rate_cps << " cps\n";
  out << "  singles D1      " << fixed(report.singles_rate_d1_cps, 0) << " cps\n";
  out << "  singles D2      " << fixed(report.singles_rate_d2_cps, 0) << " cps\n";
  out << "  coincidences    " << fixed(report.coincidence_rate_cps, 1) << " cps (accidental estimate "
      << fixed(report.accidental_rate_cps, 1) << ")\n";
  out << "  <n>             " << report.mean_photon_number << '\n';
  out << "  doubles per ms  " << fixed(report.doubles_per_ms, 2) << "  (doubles fraction "
      << fixed(report.detected_bunching.doubles_fraction, 5) << ", higher " << report.detected_bunching.n_higher << ")\n";
  out << "  Fano | n>=2     " << fixed(report.conditional_fano, 5) << '\n';
  return report;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "mzisim";
  j["version"] = m.tool_version;
  j["master_seed"] = m.master_seed;
  j["config_snapshot"] = m.config_snapshot;
  j["scans"] = nlohmann::ordered_json::array();
  for (const auto& s : m.scans) {
    j["scans"].push_back({{"mode", to_string(s.mode)},
                          {"delta_l_um", s.delta_l_um},
                          {"seed", s.seed},
                          {"phase_offset_rad", s.phase_offset_rad},
                          {"plate_tilt_deg", std::isfinite(s.plate_tilt_deg) ? nlohmann::ordered_json(s.plate_tilt_deg)
                                                                              : nlohmann::ordered_json(nullptr)},
                          {"file", s.file.filename().string()},
                          {"seconds", s.seconds}});
  }
  j["total_seconds"] = m.total_seconds;
  return j.dump(2) + "\n";
}

RunManifest cmd_experiment(const RunConfig& config, const CommonFlags& flags, std::ostream& out) {
  prepare_out_dir(flags.out_dir);
  const auto t_start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config_snapshot = config_snapshot(config);
  manifest.master_seed = config.experiment.seed;
  for (auto mode : modes_of(config.modes)) {
    auto ex = config.experiment;
    ex.mode = mode;
    const auto t0 = std::chrono::steady_clock::now();
    const auto traces = run_experiment(ex);
    const double per_scan = seconds_since(t0) / static_cast<double>(traces.size());
    for (const auto& t : traces) {
      const auto path = flags.out_dir / trace_file_name(mode, t.delta_l_um);
      std::ostringstream o;
      write_trace_csv(o, t);
      write_file_atomic(path, o.str());
      double tilt = NAN;
      try {
        tilt = theta_for_opd_deg(ex.plate, t.delta_l_um);
      } catch (const OutOfRangeError&) {
      }
      manifest.scans.push_back({mode, t.delta_l_um, t.seed, t.phase_offset_rad, tilt, path, per_scan});
      out << to_string(mode) << " scan dL " << fixed(t.delta_l_um, 1) << " um (G1 tilt "
          << (std::isfinite(tilt) ? fixed(tilt, 2) + " deg" : std::string("n/a")) << ") -> " << path.string() << '\n';
    }
  }
  manifest.total_seconds = seconds_since(t_start);
  write_file_atomic(flags.out_dir / "config_snapshot.ini", manifest.config_snapshot);
  write_file_atomic(flags.out_dir / "manifest.json", manifest_json(manifest));
  out << manifest.scans.size() << " traces written in " << fixed(manifest.total_seconds, 2) << " s\n";
  return manifest;
}

SummaryReport cmd_analyze(const std::vector<fs::path>& inputs, const std::vector<fs::path>& tables,
                          const CommonFlags& flags, bool envelope_correction, std::ostream& out) {
  std::vector<fs::path> files;
  std::optional<fs::path> stats_file;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("trace_", 0) == 0 && e.path().extension() == ".csv")
          found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
      if (fs::exists(in / "stats.json")) stats_file = in / "stats.json";
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw IoError("no such file or directory: " + in.string());
    }
  }
  if (files.empty() && tables.empty()) throw DataFormatError("no trace files or visibility tables to analyze");

  std::vector<std::pair<FringeTrace, TraceAnalysis>> analysed;
  for (const auto& f : files) {
    auto trace = read_trace_csv(f);
    try {
      auto a = analyze_trace(trace, envelope_correction);
      a.file = f.filename().string();
      analysed.emplace_back(std::move(trace), std::move(a));
    } catch (const DataFormatError&) {
      throw;
    } catch (const Error& e) {
      throw DataFormatError(f.string() + ": " + e.what());
    }
  }
  auto series = series_from_traces(analysed);
  for (const auto& t : tables) {
    auto more = read_visibility_table(t);
    series.insert(series.end(), more.begin(), more.end());
  }
  auto report = summarize(std::move(series));
  if (stats_file) {
    std::ifstream in(*stats_file);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      report.photon_statistics_json = nlohmann::ordered_json::parse(ss.str()).dump();
    } catch (const nlohmann::json::exception&) {
      throw DataFormatError(stats_file->string() + ": not valid JSON");
    }
  }

  prepare_out_dir(flags.out_dir);
  write_file_atomic(flags.out_dir / "summary.json", summary_json(report));
  std::ostringstream table;
  write_visibility_table(table, report.series);
  write_file_atomic(flags.out_dir / "visibilities.csv", table.str());
  std::ostringstream wide;
  write_table_wide(wide, report.series);
  write_file_atomic(flags.out_dir / "visibility_table.csv", wide.str());
  if (flags.plot) {
    write_file_atomic(flags.out_dir / "visibility.svg", visibility_plot_svg(report));
    for (const auto& [trace, a] : analysed) {
      auto name = fs::path(a.file).replace_extension(".svg").string();
      name.replace(0, 5, "fringe");
      write_file_atomic(flags.out_dir / name, fringe_plot_svg(trace, a.fit));
    }
  }
  print_series(out, report);
  return report;
}

SummaryReport cmd_fit_visibility(const std::vector<fs::path>& tables, const CommonFlags& flags, std::ostream& out) {
  if (tables.empty()) throw DataFormatError("fit-visibility needs a visibility table");
  std::vector<SeriesSummary> series;
  for (const auto& t : tables) {
    auto more = read_visibility_table(t);
    series.insert(series.end(), more.begin(), more.end());
  }
  auto report = summarize(std::move(series));
  prepare_out_dir(flags.out_dir);
  if (flags.format == "csv") {
    std::ostringstream o;
    o << "source,slope_per_um,intercept,coherence_length_um,dispersion,n_points\n";
    for (const auto& s : report.series) {
      if (!s.line) continue;
      o << s.label << ',' << csv::format_double(s.line->slope_per_um) << ',' << csv::format_double(s.line->intercept)
        << ',' << csv::format_double(s.line->coherence_length_um) << ',' << csv::format_double(s.line->dispersion)
        << ',' << s.line->n_points << '\n';
    }
    write_file_atomic(flags.out_dir / "fit_visibility.csv", o.str());
  } else {
    write_file_atomic(flags.out_dir / "fit_visibility.json", summary_json(report));
  }
  if (flags.plot) write_file_atomic(flags.out_dir / "visibility.svg", visibility_plot_svg(report));
  print_series(out, report);
  return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo simulator and analysis for Mach-Zehnder self-interference scans", "mzisim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonFlags flags;
  std::string out_dir = flags.out_dir.string();
  std::uint64_t seed = 0;
  std::string config_path, mode;
  double time_scale = 0.0;
  auto* o_seed = app.add_option("--seed", seed, "Master random seed");
  auto* o_config = app.add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "Directory for machine-readable outputs")->capture_default_str();
  auto* o_scale = app.add_option("--time-scale", time_scale, "Shrink factor for simulated acquisition time (0, 1]");
  auto* o_mode = app.add_option("--mode", mode, "Source modes to run")->check(CLI::IsMember({"sp", "cw", "both"}));
  app.add_option("--format", flags.format, "Machine output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--plot", flags.plot, "Emit SVG plots");

  double duration = 0.0;
  auto* stats = app.add_subcommand("stats", "Photon statistics: singles, coincidences, bunching");
  auto* o_duration = stats->add_option("--duration", duration, "Simulated seconds");
  auto* experiment = app.add_subcommand("experiment", "Run slit scans for every path-length preset");
  std::vector<std::string> inputs, tables;
  bool raw_extrema = false;
  auto* analyze = app.add_subcommand("analyze", "Fit traces or tables and regress visibility vs path difference");
  analyze->add_option("inputs", inputs, "Trace CSV files or directories");
  analyze->add_option("--table", tables, "Visibility table CSV (delta_l_um,visibility[,sigma][,source])");
  analyze->add_flag("--raw-extrema", raw_extrema, "Skip envelope correction of the extrema averages");
  std::vector<std::string> fit_tables;
  auto* fit = app.add_subcommand("fit-visibility", "Linear visibility regression and 1/e coherence length");
  fit->add_option("tables", fit_tables, "Visibility table CSV files")->required();
  for (auto* sub : {stats, experiment, analyze, fit}) sub->fallthrough();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mzisim: " << e.what() << '\n';
    return kExitConfig;
  }

  if (*o_seed) flags.seed = seed;
  if (*o_config) flags.config = config_path;
  if (*o_scale) flags.time_scale = time_scale;
  if (*o_mode) flags.mode = mode;
  flags.out_dir = out_dir;

  // Config problems are reported before any data is touched.
  RunConfig config;
  try {
    config = resolve_config(flags);
    if (*o_duration) {
      if (!(duration > 0.0)) throw ConfigError("--duration must be > 0");
      config.stats_duration_s = duration;
    }
  } catch (const ConfigError& e) {
    err << "mzisim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataFormatError& e) {
    err << "mzisim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "mzisim: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (stats->parsed()) {
      cmd_stats(config, flags, out);
    } else if (experiment->parsed()) {
      cmd_experiment(config, flags, out);
    } else if (analyze->parsed()) {
      cmd_analyze({inputs.begin(), inputs.end()}, {tables.begin(), tables.end()}, flags, !raw_extrema, out);
    } else if (fit->parsed()) {
      cmd_fit_visibility({fit_tables.begin(), fit_tables.end()}, flags, out);
    }
  } catch (const IoError& e) {
    err << "mzisim: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "mzisim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "mzisim: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "mzisim: I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace mzisim
