#include "mzisim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {

void SpcmParams::validate() const {
  if (!(dead_time_ns >= 0.0)) throw ValidationError("dead time must be >= 0");
  if (!(dark_rate_cps >= 0.0)) throw ValidationError("dark rate must be >= 0");
  if (!(jitter_sigma_ps >= 0.0)) throw ValidationError("jitter must be >= 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ValidationError("detector efficiency must be in (0, 1]");
}

void CcuParams::validate() const {
  if (!(coincidence_window_ns > 0.0)) throw ValidationError("coincidence window must be > 0");
  if (!(bin_duration_s > 0.0)) throw ValidationError("CCU bin duration must be > 0");
}

Spcm::Spcm(const SpcmParams& params, std::uint64_t seed) : params_(params), rng_(make_rng(seed)) {
  params_.validate();
}

std::vector<double> Spcm::process(std::span<const double> photon_times, double t_begin, double t_end) {
  auto& raw = scratch_;
  raw.clear();
  raw.reserve(photon_times.size() + 8);

  const double jitter_s = params_.jitter_sigma_ps * 1e-12;
  std::normal_distribution<double> jitter(0.0, jitter_s > 0.0 ? jitter_s : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool lossy = params_.efficiency < 1.0;
  for (double t : photon_times) {
    if (lossy && unit(rng_) >= params_.efficiency) continue;
    raw.push_back(jitter_s > 0.0 ? t + jitter(rng_) : t);
  }
  const auto n_photons = raw.size();
  if (params_.dark_rate_cps > 0.0) {
    auto dark = generate_arrival_times(params_.dark_rate_cps, t_begin, t_end, rng_);
    raw.insert(raw.end(), dark.begin(), dark.end());
  }
  if (jitter_s > 0.0 || raw.size() != n_photons) std::sort(raw.begin(), raw.end());

  const double dead_s = params_.dead_time_ns * 1e-9;
  std::vector<double> clicks;
  clicks.reserve(raw.size());
  for (double t : raw) {
    // Non-paralyzable: only accepted clicks start a dead period.
    if (t - last_click_ < dead_s) continue;
    clicks.push_back(t);
    last_click_ = t;
  }
  return clicks;
}

std::vector<double> detect(std::span<const double> photon_times, const SpcmParams& params, double t_begin,
                           double t_end, std::uint64_t seed) {
  if (!std::is_sorted(photon_times.begin(), photon_times.end()))
    throw ValidationError("photon stream must be time ordered");
  Spcm spcm(params, seed);
  return spcm.process(photon_times, t_begin, t_end);
}

std::vector<double> detect(std::span<const PhotonEvent> stream, const SpcmParams& params, double t_begin,
                           double t_end, std::uint64_t seed) {
  std::vector<double> times(stream.size());
  std::transform(stream.begin(), stream.end(), times.begin(), [](const PhotonEvent& e) { return e.t; });
  return detect(times, params, t_begin, t_end, seed);
}

namespace {

std::size_t bin_count_for(double bin_duration_s, double total_duration_s) {
  if (!(bin_duration_s > 0.0)) throw ValidationError("bin duration must be > 0");
  if (!(total_duration_s >= 0.0)) throw ValidationError("total duration must be >= 0");
  // Tolerate round-off so that 60 s / 1 s gives 60 bins, not 61.
  return static_cast<std::size_t>(std::ceil(total_duration_s / bin_duration_s - 1e-9));
}

std::vector<CountRecord> empty_bins(double bin_duration_s, std::size_t n) {
  std::vector<CountRecord> bins(n);
  for (std::size_t i = 0; i < n; ++i) {
    bins[i].bin_index = static_cast<std::int64_t>(i);
    bins[i].t_start_s = static_cast<double>(i) * bin_duration_s;
  }
  return bins;
}

void add_to_bin(std::vector<CountRecord>& bins, double t, double bin_duration_s) {
  if (t < 0.0) return;
  const auto idx = static_cast<std::size_t>(t / bin_duration_s);
  if (idx < bins.size()) ++bins[idx].counts;
}

template <class OnPair>
void sweep_pairs(std::span<const double> a, std::span<const double> b, double window_s, OnPair on_pair) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double d = a[i] - b[j];
    if (std::abs(d) <= window_s) {
      on_pair(std::min(a[i], b[j]));
      ++i;
      ++j;
    } else if (d < 0.0) {
      ++i;
    } else {
      ++j;
    }
  }
}

}  // namespace

std::vector<CountRecord> coincidences(std::span<const double> clicks_a, std::span<const double> clicks_b,
                                      const CcuParams& params, double total_duration_s) {
  params.validate();
  auto bins = empty_bins(params.bin_duration_s, bin_count_for(params.bin_duration_s, total_duration_s));
  sweep_pairs(clicks_a, clicks_b, params.coincidence_window_ns * 1e-9,
              [&](double t) { add_to_bin(bins, t, params.bin_duration_s); });
  return bins;
}

std::uint64_t count_coincidences(std::span<const double> clicks_a, std::span<const double> clicks_b,
                                 double window_s) {
  if (!(window_s > 0.0)) throw ValidationError("coincidence window must be > 0");
  std::uint64_t n = 0;
  sweep_pairs(clicks_a, clicks_b, window_s, [&](double) { ++n; });
  return n;
}

std::vector<CountRecord> bin_counts(std::span<const double> clicks, double bin_duration_s,
                                    double total_duration_s) {
  auto bins = empty_bins(bin_duration_s, bin_count_for(bin_duration_s, total_duration_s));
  for (double t : clicks)
    if (t < total_duration_s) add_to_bin(bins, t, bin_duration_s);
  return bins;
}

std::vector<double> apd_measure(const std::function<double(double)>& intensity, std::span<const double> times,
                                double noise_rms, std::uint64_t seed) {
  if (!(noise_rms >= 0.0)) throw ValidationError("APD noise must be >= 0");
  auto rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, noise_rms > 0.0 ? noise_rms : 1.0);
  std::vector<double> trace;
  trace.reserve(times.size());
  for (double t : times) {
    const double i = intensity(t);
    const double factor = noise_rms > 0.0 ? 1.0 + noise(rng) : 1.0;
    trace.push_back(std::max(0.0, i * factor));
  }
  return trace;
}

double nonparalyzable_rate(double rate_cps, double dead_time_s) { return rate_cps / (1.0 + rate_cps * dead_time_s); }

void write_counts_csv(std::ostream& out, std::span<const CountRecord> records) {
  out << "bin_index,t_start_s,counts\n";
  for (const auto& r : records) out << r.bin_index << ',' << csv::format_double(r.t_start_s) << ',' << r.counts << '\n';
}

}  // namespace mzisim
