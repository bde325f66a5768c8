#include "mzisim/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {

using nlohmann::ordered_json;

FringeTrace read_trace_csv(const std::filesystem::path& path) {
  static const std::regex name_re(R"(trace_(sp|cw)_dl([0-9.eE+-]+)um\.csv)");
  std::smatch m;
  const auto name = path.filename().string();
  if (!std::regex_match(name, m, name_re))
    throw DataFormatError(path.string() + ": file name must look like trace_<sp|cw>_dl<dL>um.csv");
  FringeTrace t;
  t.mode = parse_source_mode(m[1].str());
  try {
    t.delta_l_um = std::stod(m[2].str());
  } catch (const std::exception&) {
    throw DataFormatError(path.string() + ": bad delta_L in file name");
  }

  const auto table = csv::read_file(path);
  try {
    const auto c_t = table.require_column("time_s");
    const auto c_x = table.require_column("slit_position_mm");
    const auto c_v = table.require_column("value");
    table.require_column("bin_index");
    std::vector<double> times;
    for (const auto& row : table.rows) {
      times.push_back(csv::to_double(row, c_t));
      t.positions_mm.push_back(csv::to_double(row, c_x));
      const double v = csv::to_double(row, c_v);
      if (!(v >= 0.0)) throw DataFormatError("negative value", row.line);
      t.values.push_back(v);
      if (t.positions_mm.size() > 1 && !(t.positions_mm.back() > t.positions_mm[t.positions_mm.size() - 2]))
        throw DataFormatError("slit positions must be increasing", row.line);
    }
    if (t.values.empty()) throw DataFormatError("trace has no rows");
    t.bin_duration_s = times.size() > 1 ? times[1] - times[0] : 1.0;
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what(), e.line());
  }
  return t;
}

namespace {

// One row per source, one column per delta_L; blank cells are skipped.
std::vector<SeriesSummary> read_wide_table(const csv::Table& table) {
  if (table.header.size() < 2) throw DataFormatError("visibility table needs a delta_l_um column or delta_L headers");
  std::vector<double> dl;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    double v = 0.0;
    const auto& h = table.header[c];
    const auto [ptr, ec] = std::from_chars(h.data(), h.data() + h.size(), v);
    if (ec != std::errc() || ptr != h.data() + h.size() || !(v >= 0.0))
      throw DataFormatError("header '" + h + "' is not a path difference in um", 1);
    dl.push_back(v);
  }
  std::vector<SeriesSummary> out;
  for (const auto& row : table.rows) {
    SeriesSummary s;
    s.label = row.fields[0];
    if (s.label.empty()) throw DataFormatError("empty series label", row.line);
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      if (row.fields[c].empty()) continue;
      const double v = csv::to_double(row, c);
      if (!(v >= 0.0 && v <= 1.0)) throw DataFormatError("visibility outside [0, 1]", row.line);
      s.points.push_back({dl[c - 1], v, 0.0});
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataFormatError("visibility table has no rows");
  return out;
}

}  // namespace

std::vector<SeriesSummary> read_visibility_table(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  std::vector<SeriesSummary> out;
  try {
    if (!table.column("delta_l_um")) return read_wide_table(table);
    const auto c_dl = table.require_column("delta_l_um");
    const auto c_v = table.require_column("visibility");
    const auto c_sigma = table.column("sigma");
    auto c_label = table.column("source");
    if (!c_label) c_label = table.column("mode");
    for (const auto& row : table.rows) {
      const std::string label = c_label ? row.fields[*c_label] : "table";
      if (label.empty()) throw DataFormatError("empty series label", row.line);
      VisibilityPoint p{csv::to_double(row, c_dl), csv::to_double(row, c_v),
                        c_sigma ? csv::to_double(row, *c_sigma) : 0.0};
      if (!(p.delta_l_um >= 0.0)) throw DataFormatError("delta_l_um must be >= 0", row.line);
      if (!(p.visibility >= 0.0 && p.visibility <= 1.0)) throw DataFormatError("visibility outside [0, 1]", row.line);
      if (!(p.sigma >= 0.0)) throw DataFormatError("sigma must be >= 0", row.line);
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.label == label; });
      if (it == out.end()) {
        out.push_back({label, {}, {}, {}, {}});
        it = std::prev(out.end());
      }
      it->points.push_back(p);
    }
    if (out.empty()) throw DataFormatError("visibility table has no rows");
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what(), e.line());
  }
  return out;
}

TraceAnalysis analyze_trace(const FringeTrace& trace, bool envelope_correction) {
  TraceAnalysis a;
  a.delta_l_um = trace.delta_l_um;
  a.fit = fit_fringe(trace);
  a.extrema = visibility_from_extrema(trace, a.fit, envelope_correction);
  return a;
}

std::vector<SeriesSummary> series_from_traces(const std::vector<std::pair<FringeTrace, TraceAnalysis>>& analysed) {
  std::vector<SeriesSummary> out;
  for (auto mode : {SourceMode::SinglePhoton, SourceMode::ContinuousWave}) {
    SeriesSummary s;
    s.label = to_string(mode);
    for (const auto& [trace, a] : analysed)
      if (trace.mode == mode) s.traces.push_back(a);
    if (s.traces.empty()) continue;
    std::stable_sort(s.traces.begin(), s.traces.end(),
                     [](const auto& x, const auto& y) { return x.delta_l_um < y.delta_l_um; });
    for (const auto& t : s.traces) s.points.push_back(t.extrema);
    out.push_back(std::move(s));
  }
  return out;
}

SummaryReport summarize(std::vector<SeriesSummary> series) {
  SummaryReport r;
  for (auto& s : series) {
    try {
      s.line = fit_visibility_line(s.points);
    } catch (const Error& e) {
      s.line.reset();
      s.line_error = e.what();
    }
  }
  r.series = std::move(series);

  auto find = [&](const std::string& label) -> const SeriesSummary* {
    for (const auto& s : r.series)
      if (s.label == label && s.line) return &s;
    return nullptr;
  };
  const SeriesSummary* a = find("sp");
  const SeriesSummary* b = find("cw");
  if (!a || !b) {
    a = b = nullptr;
    for (const auto& s : r.series) {
      if (!s.line) continue;
      (a ? b : a) = &s;
      if (b) break;
    }
  }
  if (a && b) r.comparison = SeriesComparison{a->label, b->label, compare_curves(*a->line, *b->line, a->points, b->points)};
  return r;
}

namespace {

ordered_json to_json(const VisibilityPoint& p) {
  return {{"delta_l_um", p.delta_l_um}, {"visibility", p.visibility}, {"sigma", p.sigma}};
}

ordered_json to_json(const CoherenceResult& c) {
  return {{"slope_per_um", c.slope_per_um},
          {"intercept", c.intercept},
          {"coherence_length_um", c.coherence_length_um},
          {"dispersion", c.dispersion},
          {"n_points", c.n_points}};
}

ordered_json to_json(const EnvelopeFit& f) {
  return {{"amplitude", f.amplitude}, {"center_mm", f.center_mm},   {"width_mm", f.width_mm},
          {"visibility", f.visibility}, {"period_mm", f.period_mm}, {"phase_rad", f.phase_rad},
          {"offset", f.offset},         {"residual_rms", f.residual_rms}, {"iterations", f.iterations}};
}

ordered_json to_json(const BunchStats& b) {
  return {{"window_s", b.window_s},
          {"singles", b.n_singles},
          {"doubles", b.n_doubles},
          {"higher", b.n_higher},
          {"doubles_fraction", b.doubles_fraction}};
}

}  // namespace

std::string summary_json(const SummaryReport& report) {
  ordered_json j;
  j["tool"] = "mzisim";
  j["version"] = kToolVersion;
  j["series"] = ordered_json::array();
  for (const auto& s : report.series) {
    ordered_json js;
    js["label"] = s.label;
    js["points"] = ordered_json::array();
    for (const auto& p : s.points) js["points"].push_back(to_json(p));
    js["line"] = s.line ? to_json(*s.line) : ordered_json(nullptr);
    js["line_error"] = s.line ? ordered_json(nullptr) : ordered_json(s.line_error);
    js["traces"] = ordered_json::array();
    for (const auto& t : s.traces)
      js["traces"].push_back({{"file", t.file},
                              {"delta_l_um", t.delta_l_um},
                              {"fit", to_json(t.fit)},
                              {"visibility_extrema", t.extrema.visibility},
                              {"sigma", t.extrema.sigma}});
    j["series"].push_back(std::move(js));
  }
  if (report.comparison) {
    const auto& c = report.comparison->result;
    j["comparison"] = {{"a", report.comparison->a},
                       {"b", report.comparison->b},
                       {"dispersion_a", c.dispersion_a},
                       {"dispersion_b", c.dispersion_b},
                       {"line_gap_rms", c.line_gap_rms},
                       {"range_um", {c.range_lo_um, c.range_hi_um}}};
  } else {
    j["comparison"] = nullptr;
  }
  j["photon_statistics"] =
      report.photon_statistics_json ? ordered_json::parse(*report.photon_statistics_json) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string statistics_json(const StatisticsReport& r, std::uint64_t seed) {
  ordered_json j;
  j["tool"] = "mzisim";
  j["version"] = kToolVersion;
  j["seed"] = seed;
  j["duration_s"] = r.duration_s;
  j["source_rate_cps"] = r.source_rate_cps;
  j["emitted"] = r.emitted;
  j["singles"] = {{"d1", {{"counts", r.singles_d1}, {"rate_cps", r.singles_rate_d1_cps}}},
                  {"d2", {{"counts", r.singles_d2}, {"rate_cps", r.singles_rate_d2_cps}}}};
  j["coincidences"] = {{"counts", r.coincidences},
                       {"rate_cps", r.coincidence_rate_cps},
                       {"accidental_rate_cps", r.accidental_rate_cps}};
  j["mean_photon_number"] = r.mean_photon_number;
  j["doubles_per_ms"] = r.doubles_per_ms;
  j["doubles_fraction"] = r.detected_bunching.doubles_fraction;
  j["bunching"] = {{"detected", to_json(r.detected_bunching)}, {"source", to_json(r.source_bunching)}};
  j["conditional_fano"] = r.conditional_fano;
  return j.dump(2) + "\n";
}

void write_visibility_table(std::ostream& out, const std::vector<SeriesSummary>& series) {
  out << "source,delta_l_um,visibility,sigma\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      out << s.label << ',' << csv::format_double(p.delta_l_um) << ',' << csv::format_double(p.visibility) << ','
          << csv::format_double(p.sigma) << '\n';
}

void write_table_wide(std::ostream& out, const std::vector<SeriesSummary>& series) {
  std::vector<double> dl;
  for (const auto& s : series)
    for (const auto& p : s.points) dl.push_back(p.delta_l_um);
  std::sort(dl.begin(), dl.end());
  dl.erase(std::unique(dl.begin(), dl.end()), dl.end());
  out << "source";
  for (double d : dl) out << ',' << csv::format_double(d);
  out << '\n';
  for (const auto& s : series) {
    out << s.label;
    for (double d : dl) {
      out << ',';
      auto it = std::find_if(s.points.begin(), s.points.end(), [&](const auto& p) { return p.delta_l_um == d; });
      if (it != s.points.end()) out << csv::format_double(it->visibility);
    }
    out << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace mzisim
