#include "mzisim/photon_stream.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {

void StreamParams::validate() const {
  if (!(rate_cps >= 0.0) || !std::isfinite(rate_cps)) throw ValidationError("stream rate must be >= 0");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ValidationError("stream duration must be > 0");
}

std::vector<double> generate_arrival_times(double rate_cps, double t_begin, double t_end, Rng& rng) {
  std::vector<double> times;
  if (rate_cps <= 0.0 || t_end <= t_begin) return times;
  times.reserve(static_cast<std::size_t>(rate_cps * (t_end - t_begin) * 1.01 + 16));
  std::exponential_distribution<double> gap(rate_cps);
  double t = t_begin;
  while (true) {
    const double dt = gap(rng);
    if (dt <= 0.0) continue;  // keep the stream strictly ordered
    t += dt;
    if (t >= t_end) break;
    times.push_back(t);
  }
  return times;
}

PhotonStream generate_stream(const StreamParams& params, const SpectralModel& model) {
  params.validate();
  model.validate();
  auto rng = make_rng(params.seed);
  const auto times = generate_arrival_times(params.rate_cps, 0.0, params.duration_s, rng);
  PhotonStream stream;
  stream.reserve(times.size());
  const bool tag = model.is_parametric();
  for (double t : times) stream.push_back({t, tag ? sample_frequency(model, rng) : 0.0});
  return stream;
}

PhotonStream attenuate(std::span<const PhotonEvent> stream, double transmission, std::uint64_t seed) {
  if (!(transmission >= 0.0 && transmission <= 1.0)) throw ValidationError("transmission must be in [0, 1]");
  PhotonStream out;
  if (transmission == 0.0) return out;
  if (transmission == 1.0) return {stream.begin(), stream.end()};
  auto rng = make_rng(seed);
  std::bernoulli_distribution keep(transmission);
  out.reserve(static_cast<std::size_t>(stream.size() * transmission * 1.05) + 16);
  for (const auto& e : stream)
    if (keep(rng)) out.push_back(e);
  return out;
}

double mean_photon_number(double rate_cps, double window_s) {
  if (!(rate_cps >= 0.0)) throw ValidationError("rate must be >= 0");
  if (!(window_s > 0.0)) throw ValidationError("window must be > 0");
  return rate_cps * window_s;
}

BunchStats bunching_stats(std::span<const double> times, double window_s) {
  if (!(window_s > 0.0)) throw ValidationError("bunching window must be > 0");
  BunchStats s;
  s.window_s = window_s;
  auto close_cluster = [&s](std::size_t size) {
    if (size == 1)
      ++s.n_singles;
    else if (size == 2)
      ++s.n_doubles;
    else if (size > 2)
      ++s.n_higher;
  };
  std::size_t size = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] - times[i - 1] < window_s) {
      ++size;
    } else {
      close_cluster(size);
      size = 1;
    }
  }
  close_cluster(size);
  const auto clusters = s.n_singles + s.n_doubles + s.n_higher;
  s.doubles_fraction = clusters ? static_cast<double>(s.n_doubles) / static_cast<double>(clusters) : 0.0;
  return s;
}

BunchStats bunching_stats(std::span<const PhotonEvent> stream, double window_s) {
  std::vector<double> times(stream.size());
  std::transform(stream.begin(), stream.end(), times.begin(), [](const PhotonEvent& e) { return e.t; });
  return bunching_stats(times, window_s);
}

ConditionalNumberDistribution conditional_number_distribution(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mean photon number must be > 0");
  // Log-space terms mu^n / n! for n >= 2, normalized by their own sum so that
  // tiny mu does not cancel catastrophically against 1 - e^-mu (1 + mu).
  std::vector<double> log_terms;
  const double log_mu = std::log(mu);
  double peak = -INFINITY;
  for (int n = ConditionalNumberDistribution::kMinPhotons;; ++n) {
    const double lt = n * log_mu - std::lgamma(n + 1.0);
    peak = std::max(peak, lt);
    log_terms.push_back(lt);
    if (n > mu && lt - peak < std::log(1e-15) - 5.0) break;
  }
  ConditionalNumberDistribution d;
  d.mu = mu;
  double norm = 0.0;
  for (double lt : log_terms) norm += std::exp(lt - peak);
  for (double lt : log_terms) {
    const double p = std::exp(lt - peak) / norm;
    if (p < 1e-15 && !d.probabilities.empty() && lt < log_terms[d.probabilities.size() - 1]) break;
    d.probabilities.push_back(p);
  }
  auto photons = [](std::size_t k) { return static_cast<double>(k + ConditionalNumberDistribution::kMinPhotons); };
  for (std::size_t k = 0; k < d.probabilities.size(); ++k) d.mean += photons(k) * d.probabilities[k];
  for (std::size_t k = 0; k < d.probabilities.size(); ++k) {
    const double dev = photons(k) - d.mean;
    d.variance += dev * dev * d.probabilities[k];
  }
  d.fano = d.variance / d.mean;
  return d;
}

void write_stream_csv(std::ostream& out, std::span<const PhotonEvent> stream) {
  out << "t_seconds,nu_hz\n";
  for (const auto& e : stream) {
    out << csv::format_double(e.t) << ',';
    if (e.has_frequency()) out << csv::format_double(e.nu_hz);
    out << '\n';
  }
}

}  // namespace mzisim
