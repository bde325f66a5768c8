#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mzisim/analysis.hpp"
#include "mzisim/scan.hpp"
#include "mzisim/statistics.hpp"

namespace mzisim {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fit and extrema visibility for one trace.
struct TraceAnalysis {
  std::string file;
  double delta_l_um = 0.0;
  EnvelopeFit fit;
  VisibilityPoint extrema;
};

/// One visibility-vs-delta_L series ("sp", "cw", or a table label).
struct SeriesSummary {
  std::string label;
  std::vector<VisibilityPoint> points;
  std::optional<CoherenceResult> line;
  std::string line_error;  ///< why `line` is empty
  std::vector<TraceAnalysis> traces;
};

struct SeriesComparison {
  std::string a, b;
  CurveComparison result;
};

struct SummaryReport {
  std::vector<SeriesSummary> series;
  std::optional<SeriesComparison> comparison;
  std::optional<std::string> photon_statistics_json;  ///< embedded stats.json, when present
};

/// Reads a trace CSV; mode and delta_L come from the `trace_<mode>_dl<dL>um.csv` name.
FringeTrace read_trace_csv(const std::filesystem::path& path);

/// Long form: `label,delta_l_um,visibility,sigma` rows; `sigma` and the label
/// column (`source` or `mode`) are optional, unlabelled rows form the series
/// "table". Without a delta_l_um column the wide form is read instead: first
/// column the label, remaining headers the path differences in um.
std::vector<SeriesSummary> read_visibility_table(const std::filesystem::path& path);

TraceAnalysis analyze_trace(const FringeTrace& trace, bool envelope_correction = true);

/// Fits a line to every series in place and compares sp against cw (or the
/// first two fitted series).
SummaryReport summarize(std::vector<SeriesSummary> series);

/// Series built from analysed traces, grouped by mode and ordered by delta_L.
std::vector<SeriesSummary> series_from_traces(const std::vector<std::pair<FringeTrace, TraceAnalysis>>& analysed);

std::string summary_json(const SummaryReport& report);
std::string statistics_json(const StatisticsReport& report, std::uint64_t seed);

/// Long-form visibility table (`source,delta_l_um,visibility,sigma`),
/// readable again by read_visibility_table.
void write_visibility_table(std::ostream& out, const std::vector<SeriesSummary>& series);

/// Wide table: one row per series, one column per delta_L (blank where absent).
void write_table_wide(std::ostream& out, const std::vector<SeriesSummary>& series);

/// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace mzisim
