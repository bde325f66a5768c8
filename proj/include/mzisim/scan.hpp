#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mzisim/detection.hpp"
#include "mzisim/interferometer.hpp"
#include "mzisim/spectral.hpp"

namespace mzisim {

enum class SourceMode { SinglePhoton, ContinuousWave };

/// "sp" / "cw".
std::string to_string(SourceMode mode);
SourceMode parse_source_mode(const std::string& text);

/// Slit-scan protocol. Bin duration is scan_duration / n_bins for each mode.
struct ScanPlan {
  double range_mm = 20.0;
  int n_bins = 2500;
  double slit_width_mm = 0.5;
  double scan_duration_sp_s = 2500.0;
  double scan_duration_cw_s = 500.0;
  double time_scale = 1.0;  ///< shrinks simulated SP acquisition time per bin

  double bin_duration_s(SourceMode mode) const;
  double bin_center_mm(int i) const { return (i + 0.5) * range_mm / n_bins; }
  void validate() const;
};

/// One slit scan. SP values are D2 counts per bin, CW values relative intensity.
struct FringeTrace {
  double delta_l_um = 0.0;
  SourceMode mode = SourceMode::SinglePhoton;
  std::vector<double> positions_mm;
  std::vector<double> values;
  std::vector<double> monitor_values;  ///< D1 counts per bin (SP only)
  double bin_duration_s = 1.0;         ///< nominal, before time_scale
  std::uint64_t seed = 0;
  double phase_offset_rad = 0.0;

  void validate() const;
};

struct ExperimentConfig {
  SourceMode mode = SourceMode::SinglePhoton;
  std::vector<double> delta_l_list_um{0.0, 100.0, 200.0, 300.0, 350.0};
  double source_rate_cps = 2e6;
  SpectralModel spectral = calibrate_gaussian(268.0, 405.0);
  MziConfig mzi{};
  GlassPlate plate{};
  SpcmParams spcm{};
  CcuParams ccu{};
  ScanPlan scan{};
  double cw_noise_rms = 0.01;
  std::optional<double> fixed_phase_offset_rad;  ///< random per scan when unset
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0: MZISIM_THREADS or hardware concurrency

  void validate() const;
};

/// Sub-seed of scan `index` in `mode` under `master`.
std::uint64_t scan_seed(std::uint64_t master, SourceMode mode, std::size_t index);

/// Runs one slit scan at `delta_l_um`. Without `seed` the scan seed is derived
/// from the master seed, the mode and delta_L.
FringeTrace run_scan(const ExperimentConfig& config, double delta_l_um, std::optional<std::uint64_t> seed = {});

/// One trace per delta_L, in list order. Scans run in parallel.
std::vector<FringeTrace> run_experiment(const ExperimentConfig& config);

/// Worker count from an explicit request, then MZISIM_THREADS, then hardware.
unsigned resolve_thread_count(int requested);

/// `bin_index,time_s,slit_position_mm,value`.
void write_trace_csv(std::ostream& out, const FringeTrace& trace);

/// `trace_<mode>_dl<dL>um.csv`.
std::string trace_file_name(SourceMode mode, double delta_l_um);

}  // namespace mzisim
