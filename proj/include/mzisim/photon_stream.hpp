#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "mzisim/rng.hpp"
#include "mzisim/spectral.hpp"

namespace mzisim {

/// One photon arrival. `nu_hz` is 0 when the source model carries no spectrum.
struct PhotonEvent {
  double t = 0.0;
  double nu_hz = 0.0;

  bool has_frequency() const noexcept { return nu_hz > 0.0; }
  friend bool operator==(const PhotonEvent&, const PhotonEvent&) = default;
};

using PhotonStream = std::vector<PhotonEvent>;

struct StreamParams {
  double rate_cps = 2e6;  ///< post-attenuation mean rate
  double duration_s = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BunchStats {
  double window_s = 0.0;
  std::uint64_t n_singles = 0;
  std::uint64_t n_doubles = 0;
  std::uint64_t n_higher = 0;
  double doubles_fraction = 0.0;  ///< n_doubles / (all clusters)
};

/// P(n | n >= 2) for a Poisson photon number, i.e. what survives post-selection
/// on coincidences. `probabilities[k]` is P(n = k + 2 | n >= 2).
struct ConditionalNumberDistribution {
  double mu = 0.0;
  std::vector<double> probabilities;
  double mean = 0.0;
  double variance = 0.0;
  double fano = 0.0;

  static constexpr int kMinPhotons = 2;
};

/// Homogeneous Poisson arrivals on [0, duration). Events are frequency tagged
/// when `model` is parametric.
PhotonStream generate_stream(const StreamParams& params, const SpectralModel& model);

/// Arrival times only, for callers that never need frequency tags.
std::vector<double> generate_arrival_times(double rate_cps, double t_begin, double t_end, Rng& rng);

/// Independent Bernoulli thinning, as by a neutral density filter.
PhotonStream attenuate(std::span<const PhotonEvent> stream, double transmission, std::uint64_t seed);

/// Mean photon number within `window_s` at `rate_cps`.
double mean_photon_number(double rate_cps, double window_s);

/// Clusters events whose consecutive gaps are shorter than `window_s` and
/// classifies clusters by size 1, 2 and >= 3.
BunchStats bunching_stats(std::span<const double> times, double window_s);
BunchStats bunching_stats(std::span<const PhotonEvent> stream, double window_s);

ConditionalNumberDistribution conditional_number_distribution(double mu);

/// Debug dump with header `t_seconds,nu_hz`; nu is left empty when absent.
void write_stream_csv(std::ostream& out, std::span<const PhotonEvent> stream);

}  // namespace mzisim
