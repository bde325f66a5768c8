#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "mzisim/scan.hpp"

namespace mzisim {

/// Which source modes an experiment run covers.
enum class ModeSelection { SinglePhoton, ContinuousWave, Both };

ModeSelection parse_mode_selection(const std::string& text);
std::string to_string(ModeSelection m);
std::vector<SourceMode> modes_of(ModeSelection m);

/// Everything the command-line front end reads from a configuration file.
struct RunConfig {
  ExperimentConfig experiment{};
  ModeSelection modes = ModeSelection::Both;
  double stats_duration_s = 10.0;
};

/// Flat `key = value` text with `[section]` headers; `#` and `;` start
/// comments. Unknown sections or keys are rejected with ConfigError.
class IniDocument {
 public:
  static IniDocument parse(std::istream& in);

  /// section -> key -> (value, line)
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Applies `doc` on top of `base`. Relative table paths resolve against `base_dir`.
RunConfig apply_config(const IniDocument& doc, RunConfig base, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);
RunConfig load_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Serializes `config` in the same format; load_config(snapshot) reproduces it.
std::string config_snapshot(const RunConfig& config);

}  // namespace mzisim
