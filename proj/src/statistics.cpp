#include "mzisim/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>

#include "mzisim/errors.hpp"

namespace mzisim {
namespace {

enum Stream : std::uint64_t { kSource = 21, kSplit, kD1, kD2 };

void accumulate(BunchStats& total, const BunchStats& part) {
  total.n_singles += part.n_singles;
  total.n_doubles += part.n_doubles;
  total.n_higher += part.n_higher;
}

void finish(BunchStats& s, double window) {
  s.window_s = window;
  const auto clusters = s.n_singles + s.n_doubles + s.n_higher;
  s.doubles_fraction = clusters ? static_cast<double>(s.n_doubles) / static_cast<double>(clusters) : 0.0;
}

}  // namespace

StatisticsReport simulate_statistics(const ExperimentConfig& config, double duration_s) {
  config.validate();
  if (!(duration_s > 0.0)) throw ValidationError("statistics duration must be > 0");
  const double bin = config.ccu.bin_duration_s;
  const double window = config.ccu.coincidence_window_ns * 1e-9;
  const auto seed = derive_seed(config.seed, {3u});

  StatisticsReport r;
  r.duration_s = duration_s;
  r.source_rate_cps = config.source_rate_cps;
  Rng source_rng = make_rng(derive_seed(seed, {kSource}));
  Rng split_rng = make_rng(derive_seed(seed, {kSplit}));
  Spcm d1(config.spcm, derive_seed(seed, {kD1}));
  Spcm d2(config.spcm, derive_seed(seed, {kD2}));
  std::bernoulli_distribution to_d1(config.mzi.split_ratio);

  const auto n_bins = static_cast<std::size_t>(std::ceil(duration_s / bin - 1e-9));
  std::vector<double> arm1, arm2, merged;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double t0 = static_cast<double>(i) * bin;
    const double t1 = std::min(duration_s, t0 + bin);
    const auto photons = generate_arrival_times(config.source_rate_cps, t0, t1, source_rng);
    r.emitted += photons.size();
    accumulate(r.source_bunching, bunching_stats(photons, window));
    arm1.clear();
    arm2.clear();
    for (double t : photons) (to_d1(split_rng) ? arm1 : arm2).push_back(t);
    const auto c1 = d1.process(arm1, t0, t1);
    const auto c2 = d2.process(arm2, t0, t1);
    const auto nc = count_coincidences(c1, c2, window);

    merged.clear();
    std::merge(c1.begin(), c1.end(), c2.begin(), c2.end(), std::back_inserter(merged));
    accumulate(r.detected_bunching, bunching_stats(merged, window));

    r.singles_d1 += c1.size();
    r.singles_d2 += c2.size();
    r.coincidences += nc;
    const auto idx = static_cast<std::int64_t>(i);
    r.bins_d1.push_back({idx, t0, c1.size()});
    r.bins_d2.push_back({idx, t0, c2.size()});
    r.bins_coincidence.push_back({idx, t0, nc});
  }
  finish(r.source_bunching, window);
  finish(r.detected_bunching, window);

  r.singles_rate_d1_cps = static_cast<double>(r.singles_d1) / duration_s;
  r.singles_rate_d2_cps = static_cast<double>(r.singles_d2) / duration_s;
  r.coincidence_rate_cps = static_cast<double>(r.coincidences) / duration_s;
  r.accidental_rate_cps = 2.0 * r.singles_rate_d1_cps * r.singles_rate_d2_cps * window;
  if (config.spcm.dead_time_ns > 0.0)
    r.mean_photon_number = mean_photon_number(config.source_rate_cps, config.spcm.dead_time_ns * 1e-9);
  r.doubles_per_ms = static_cast<double>(r.detected_bunching.n_doubles) / (duration_s * 1e3);
  r.conditional_fano = r.mean_photon_number > 0.0 ? conditional_number_distribution(r.mean_photon_number).fano : 0.0;
  return r;
}

}  // namespace mzisim
