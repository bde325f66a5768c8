#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mzisim/config.hpp"
#include "mzisim/report.hpp"
#include "mzisim/statistics.hpp"

namespace mzisim {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitData = 4 };

/// Flags shared by every subcommand; set values override the config file.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir = "mzisim_out";
  std::optional<double> time_scale;
  std::optional<std::string> mode;
  std::string format = "json";
  bool plot = false;
};

struct ManifestEntry {
  SourceMode mode;
  double delta_l_um;
  std::uint64_t seed;
  double phase_offset_rad;
  double plate_tilt_deg;  ///< NaN when the path difference is out of the plate's reach
  std::filesystem::path file;
  double seconds;
};

struct RunManifest {
  std::string config_snapshot;
  std::uint64_t master_seed = 0;
  std::vector<ManifestEntry> scans;
  std::string tool_version = kToolVersion;
  double total_seconds = 0.0;
};

/// Config file (if any) with flag overrides applied.
RunConfig resolve_config(const CommonFlags& flags);

StatisticsReport cmd_stats(const RunConfig& config, const CommonFlags& flags, std::ostream& out);
RunManifest cmd_experiment(const RunConfig& config, const CommonFlags& flags, std::ostream& out);
SummaryReport cmd_analyze(const std::vector<std::filesystem::path>& inputs,
                          const std::vector<std::filesystem::path>& tables, const CommonFlags& flags,
                          bool envelope_correction, std::ostream& out);
SummaryReport cmd_fit_visibility(const std::vector<std::filesystem::path>& tables, const CommonFlags& flags,
                                 std::ostream& out);

std::string manifest_json(const RunManifest& manifest);

/// Full command line (args[0] is the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mzisim
