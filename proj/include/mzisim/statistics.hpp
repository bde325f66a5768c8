#pragma once

#include <vector>

#include "mzisim/detection.hpp"
#include "mzisim/photon_stream.hpp"
#include "mzisim/scan.hpp"

namespace mzisim {

/// Photon-statistics run: source, BS1 split onto two SPCMs, CCU.
struct StatisticsReport {
  double duration_s = 0.0;
  double source_rate_cps = 0.0;
  std::uint64_t emitted = 0;
  std::uint64_t singles_d1 = 0;
  std::uint64_t singles_d2 = 0;
  std::uint64_t coincidences = 0;
  double singles_rate_d1_cps = 0.0;
  double singles_rate_d2_cps = 0.0;
  double coincidence_rate_cps = 0.0;
  double accidental_rate_cps = 0.0;  ///< 2 R1 R2 w from the measured singles
  double mean_photon_number = 0.0;   ///< source rate x dead time
  BunchStats detected_bunching;      ///< merged D1 + D2 clicks, CCU window
  BunchStats source_bunching;        ///< raw source stream, CCU window
  double doubles_per_ms = 0.0;       ///< detected doubles per millisecond
  double conditional_fano = 0.0;     ///< Fano factor of P(n | n >= 2)
  std::vector<CountRecord> bins_d1, bins_d2, bins_coincidence;
};

/// Simulates the photon-statistics arrangement for `duration_s`. Streams are
/// processed one CCU bin at a time so memory stays bounded.
StatisticsReport simulate_statistics(const ExperimentConfig& config, double duration_s);

}  // namespace mzisim
