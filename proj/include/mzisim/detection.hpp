#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "mzisim/photon_stream.hpp"
#include "mzisim/rng.hpp"

namespace mzisim {

/// Single-photon counting module.
struct SpcmParams {
  double dead_time_ns = 22.0;
  double dark_rate_cps = 50.0;
  double jitter_sigma_ps = 350.0 / 2.355;  ///< 350 ps FWHM
  double efficiency = 1.0;

  void validate() const;
};

/// Coincidence counting unit.
struct CcuParams {
  double coincidence_window_ns = 6.0;  ///< accept |t_a - t_b| <= window
  double bin_duration_s = 1.0;

  void validate() const;
};

struct CountRecord {
  std::int64_t bin_index = 0;
  double t_start_s = 0.0;
  std::uint64_t counts = 0;

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Stateful detector for streaming use: keeps the last accepted click so the
/// dead time carries across consecutive calls to `process`.
class Spcm {
 public:
  Spcm(const SpcmParams& params, std::uint64_t seed);

  /// Detects photons arriving in [t_begin, t_end) and returns accepted click
  /// times in order. Dark counts are drawn for the same interval. Calls must
  /// cover consecutive, non-overlapping intervals.
  std::vector<double> process(std::span<const double> photon_times, double t_begin, double t_end);

  const SpcmParams& params() const noexcept { return params_; }

 private:
  SpcmParams params_;
  Rng rng_;
  double last_click_ = -std::numeric_limits<double>::infinity();
  std::vector<double> scratch_;
};

/// Click times for `stream` observed over [t_begin, t_end): efficiency loss,
/// Gaussian jitter, dark counts, then non-paralyzable dead time.
std::vector<double> detect(std::span<const PhotonEvent> stream, const SpcmParams& params, double t_begin,
                           double t_end, std::uint64_t seed);
std::vector<double> detect(std::span<const double> photon_times, const SpcmParams& params, double t_begin,
                           double t_end, std::uint64_t seed);

/// Two-pointer coincidence sweep; every click joins at most one pair. Pairs are
/// binned by the earlier click into bins covering [0, total_duration_s).
std::vector<CountRecord> coincidences(std::span<const double> clicks_a, std::span<const double> clicks_b,
                                      const CcuParams& params, double total_duration_s);

/// Total number of coincident pairs (no binning).
std::uint64_t count_coincidences(std::span<const double> clicks_a, std::span<const double> clicks_b,
                                 double window_s);

/// Contiguous bins covering [0, total_duration_s); clicks outside are ignored.
std::vector<CountRecord> bin_counts(std::span<const double> clicks, double bin_duration_s,
                                    double total_duration_s);

/// Samples `intensity` at `times` with multiplicative Gaussian noise of
/// relative RMS `noise_rms`, as an analog photodiode on an oscilloscope.
std::vector<double> apd_measure(const std::function<double(double)>& intensity, std::span<const double> times,
                                double noise_rms, std::uint64_t seed);

/// Output rate of a non-paralyzable detector at true input rate `rate_cps`.
double nonparalyzable_rate(double rate_cps, double dead_time_s);

/// Writes `bin_index,t_start_s,counts`.
void write_counts_csv(std::ostream& out, std::span<const CountRecord> records);

}  // namespace mzisim
