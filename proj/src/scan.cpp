#include "mzisim/scan.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {

std::string to_string(SourceMode mode) { return mode == SourceMode::SinglePhoton ? "sp" : "cw"; }

SourceMode parse_source_mode(const std::string& text) {
  if (text == "sp" || text == "SP") return SourceMode::SinglePhoton;
  if (text == "cw" || text == "CW") return SourceMode::ContinuousWave;
  throw ValidationError("unknown source mode '" + text + "' (expected sp or cw)");
}

double ScanPlan::bin_duration_s(SourceMode mode) const {
  return (mode == SourceMode::SinglePhoton ? scan_duration_sp_s : scan_duration_cw_s) / n_bins;
}

void ScanPlan::validate() const {
  if (!(range_mm > 0.0)) throw ValidationError("scan range must be > 0");
  if (n_bins < 2) throw ValidationError("scan needs at least 2 bins");
  if (!(slit_width_mm >= 0.0)) throw ValidationError("slit width must be >= 0");
  if (!(scan_duration_sp_s > 0.0) || !(scan_duration_cw_s > 0.0)) throw ValidationError("scan duration must be > 0");
  if (!(time_scale > 0.0 && time_scale <= 1.0)) throw ValidationError("time_scale must be in (0, 1]");
}

void FringeTrace::validate() const {
  if (positions_mm.size() != values.size()) throw ValidationError("trace positions and values differ in length");
  for (std::size_t i = 1; i < positions_mm.size(); ++i)
    if (!(positions_mm[i] > positions_mm[i - 1])) throw ValidationError("trace positions must be increasing");
  for (double v : values)
    if (!(v >= 0.0)) throw ValidationError("trace values must be >= 0");
}

void ExperimentConfig::validate() const {
  if (delta_l_list_um.empty()) throw ValidationError("delta_L list is empty");
  for (double dl : delta_l_list_um)
    if (!(dl >= 0.0)) throw ValidationError("delta_L values must be >= 0");
  if (!(source_rate_cps >= 0.0)) throw ValidationError("source rate must be >= 0");
  if (!(cw_noise_rms >= 0.0)) throw ValidationError("CW noise must be >= 0");
  spectral.validate();
  mzi.validate();
  plate.validate();
  spcm.validate();
  ccu.validate();
  scan.validate();
  if (!(scan.slit_width_mm < mzi.fringe_period_mm / 3.0))
    throw ValidationError("slit width must be below a third of the fringe period");
}

std::uint64_t scan_seed(std::uint64_t master, SourceMode mode, std::size_t index) {
  return derive_seed(master, {mode == SourceMode::SinglePhoton ? 1u : 2u, index});
}

namespace {

enum Stream : std::uint64_t { kPhase = 11, kPhotons, kDetectorD1, kDetectorD2, kApd };

// Midpoint rule with three sub-slits across the slit aperture.
constexpr std::array<double, 3> kSlitOffsets{-1.0 / 3.0, 0.0, 1.0 / 3.0};

struct SlitWeights {
  double envelope = 0.0;  // mean transmission of the slit (beam envelope)
  double cos_sum = 0.0;   // mean envelope * cos(spatial phase)
  double sin_sum = 0.0;
};

SlitWeights slit_weights(const MziConfig& mzi, double x_mm, double slit_width_mm) {
  SlitWeights w;
  for (double f : kSlitOffsets) {
    const double x = x_mm + f * slit_width_mm;
    const double g = beam_envelope(mzi, x);
    const double sp = detail::spatial_phase(mzi, x);
    w.envelope += g;
    w.cos_sum += g * std::cos(sp);
    w.sin_sum += g * std::sin(sp);
  }
  const double n = static_cast<double>(kSlitOffsets.size());
  w.envelope /= n;
  w.cos_sum /= n;
  w.sin_sum /= n;
  return w;
}

FringeTrace trace_skeleton(const ExperimentConfig& config, double delta_l_um, SourceMode mode, std::uint64_t seed,
                           double phase) {
  FringeTrace t;
  t.delta_l_um = delta_l_um;
  t.mode = mode;
  t.seed = seed;
  t.phase_offset_rad = phase;
  t.bin_duration_s = config.scan.bin_duration_s(mode);
  t.positions_mm.resize(config.scan.n_bins);
  for (int i = 0; i < config.scan.n_bins; ++i) t.positions_mm[i] = config.scan.bin_center_mm(i);
  t.values.assign(config.scan.n_bins, 0.0);
  return t;
}

void run_single_photon(const ExperimentConfig& config, const MziConfig& mzi, std::uint64_t seed, FringeTrace& trace) {
  const auto& plan = config.scan;
  const double contrast = split_contrast(mzi.split_ratio);
  const bool parametric = config.spectral.is_parametric();
  const double tab_v = parametric ? 0.0 : visibility(config.spectral, mzi.delta_l_um);
  const double freq_to_phase = 2.0 * kPi * mzi.delta_l_um / kSpeedOfLightUmPerS;
  std::optional<FrequencySampler> sampler;
  if (parametric) sampler.emplace(config.spectral);

  Rng rng = make_rng(derive_seed(seed, {kPhotons}));
  Spcm d1(config.spcm, derive_seed(seed, {kDetectorD1}));
  Spcm d2(config.spcm, derive_seed(seed, {kDetectorD2}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> gap(config.source_rate_cps > 0.0 ? config.source_rate_cps : 1.0);

  const double bin_s = trace.bin_duration_s * plan.time_scale;
  trace.monitor_values.assign(plan.n_bins, 0.0);
  std::vector<double> to_d1, to_d2;
  double next_arrival = config.source_rate_cps > 0.0 ? gap(rng) : INFINITY;

  for (int i = 0; i < plan.n_bins; ++i) {
    const double t0 = i * bin_s;
    const double t1 = (i + 1) * bin_s;
    const auto w = slit_weights(mzi, trace.positions_mm[i], plan.slit_width_mm);
    to_d1.clear();
    to_d2.clear();
    // Envelope-weighted fringe term given slit passage; p_d2 = 1/2 (1 + c * fringe).
    const double cos_g = w.envelope > 0.0 ? w.cos_sum / w.envelope : 0.0;
    const double sin_g = w.envelope > 0.0 ? w.sin_sum / w.envelope : 0.0;
    for (; next_arrival < t1; next_arrival += gap(rng)) {
      if (unit(rng) >= w.envelope) continue;  // blocked by the slit
      double fringe;
      if (parametric) {
        const double a = freq_to_phase * (*sampler)(rng);
        fringe = std::cos(a) * cos_g - std::sin(a) * sin_g;
      } else {
        fringe = tab_v * cos_g;
      }
      const double p_d2 = 0.5 * (1.0 + contrast * fringe);
      (unit(rng) < p_d2 ? to_d2 : to_d1).push_back(next_arrival);
    }
    trace.values[i] = static_cast<double>(d2.process(to_d2, t0, t1).size());
    trace.monitor_values[i] = static_cast<double>(d1.process(to_d1, t0, t1).size());
  }
}

void run_continuous_wave(const ExperimentConfig& config, const MziConfig& mzi, std::uint64_t seed,
                         FringeTrace& trace) {
  const auto& plan = config.scan;
  const double v = visibility(config.spectral, mzi.delta_l_um);
  // Parametric sources carry the carrier phase 2 pi nu0 dL / c, as the
  // frequency-averaged single-photon fringe does.
  MziConfig shifted = mzi;
  shifted.phase_offset_rad +=
      std::fmod(2.0 * kPi * center_frequency(config.spectral) * mzi.delta_l_um / kSpeedOfLightUmPerS, 2.0 * kPi);
  const double bin_s = trace.bin_duration_s;
  const double mm_per_s = plan.range_mm / (plan.n_bins * bin_s);
  auto intensity = [&](double t) {
    const double x = t * mm_per_s;
    double sum = 0.0;
    for (double f : kSlitOffsets) sum += classical_intensity(shifted, v, x + f * plan.slit_width_mm);
    return sum / static_cast<double>(kSlitOffsets.size());
  };
  std::vector<double> times(plan.n_bins);
  for (int i = 0; i < plan.n_bins; ++i) times[i] = (i + 0.5) * bin_s;
  trace.values = apd_measure(intensity, times, config.cw_noise_rms, derive_seed(seed, {kApd}));
}

}  // namespace

FringeTrace run_scan(const ExperimentConfig& config, double delta_l_um, std::optional<std::uint64_t> seed) {
  if (!(delta_l_um >= 0.0)) throw ValidationError("delta_L must be >= 0");
  config.validate();
  const std::uint64_t s =
      seed.value_or(derive_seed(config.seed, {config.mode == SourceMode::SinglePhoton ? 1u : 2u,
                                              std::bit_cast<std::uint64_t>(delta_l_um)}));
  double phase = 0.0;
  if (config.fixed_phase_offset_rad) {
    phase = *config.fixed_phase_offset_rad;
  } else {
    Rng prng = make_rng(derive_seed(s, {kPhase}));
    phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(prng);
  }
  MziConfig mzi = config.mzi;
  mzi.delta_l_um = delta_l_um;
  mzi.phase_offset_rad = phase;

  auto trace = trace_skeleton(config, delta_l_um, config.mode, s, phase);
  if (config.mode == SourceMode::SinglePhoton)
    run_single_photon(config, mzi, s, trace);
  else
    run_continuous_wave(config, mzi, s, trace);
  return trace;
}

unsigned resolve_thread_count(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("MZISIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<FringeTrace> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto& list = config.delta_l_list_um;
  std::vector<FringeTrace> traces(list.size());
  std::vector<std::exception_ptr> errors(list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < list.size(); i = next++) {
      try {
        traces[i] = run_scan(config, list[i], scan_seed(config.seed, config.mode, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(resolve_thread_count(config.threads), list.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < n_workers; ++k) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

void write_trace_csv(std::ostream& out, const FringeTrace& trace) {
  out << "bin_index,time_s,slit_position_mm,value\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    out << i << ',' << csv::format_double(static_cast<double>(i) * trace.bin_duration_s) << ','
        << csv::format_double(trace.positions_mm[i]) << ',' << csv::format_double(trace.values[i]) << '\n';
  }
}

std::string trace_file_name(SourceMode mode, double delta_l_um) {
  return "trace_" + to_string(mode) + "_dl" + csv::format_double(delta_l_um) + "um.csv";
}

}  // namespace mzisim
