#pragma once

#include <filesystem>
#include <istream>
#include <random>
#include <utility>
#include <variant>
#include <vector>

#include "mzisim/rng.hpp"

namespace mzisim {

struct GaussianSpectrum {
  double center_frequency_hz = 0.0;
  double sigma_nu_hz = 0.0;
};

struct LorentzianSpectrum {
  double center_frequency_hz = 0.0;
  double hwhm_hz = 0.0;
};

/// Measured visibility curve V(delta_L), piecewise-linear between points.
struct TabulatedVisibility {
  struct Point {
    double delta_l_um = 0.0;
    double visibility = 0.0;
  };
  std::vector<Point> points;
};

/// Spectral content of the source. Parametric variants carry a lineshape; the
/// tabulated variant carries the visibility law directly.
class SpectralModel {
 public:
  using Variant = std::variant<GaussianSpectrum, LorentzianSpectrum, TabulatedVisibility>;

  SpectralModel(GaussianSpectrum g);
  SpectralModel(LorentzianSpectrum l);
  SpectralModel(TabulatedVisibility t);

  const Variant& variant() const noexcept { return variant_; }
  bool is_parametric() const noexcept { return !std::holds_alternative<TabulatedVisibility>(variant_); }

  /// Throws ValidationError if the invariants of the held variant are violated.
  void validate() const;

 private:
  Variant variant_;
};

struct CoherenceCurve {
  SpectralModel model;
  double coherence_length_um;  ///< delta_L where V = 1/e
};

/// Fringe visibility after an optical path difference of `delta_l_um`.
double visibility(const SpectralModel& model, double delta_l_um);

/// Gaussian lineshape whose visibility falls to 1/e at `coherence_length_um`.
SpectralModel calibrate_gaussian(double coherence_length_um, double center_wavelength_nm);

/// Gaussian frequency width that gives the requested 1/e coherence length.
double gaussian_sigma_for_coherence_length(double coherence_length_um);

/// 1/e coherence length of any model. Tabulated curves that never reach 1/e
/// report +infinity.
CoherenceCurve coherence_curve(const SpectralModel& model);

/// Draws one optical frequency from the normalized spectral density.
/// Tabulated models have no spectrum and throw UnsupportedModeError.
double sample_frequency(const SpectralModel& model, Rng& rng);

/// Reusable sampler for hot loops; same distribution as sample_frequency.
class FrequencySampler {
 public:
  explicit FrequencySampler(const SpectralModel& model);
  double operator()(Rng& rng);

 private:
  bool gaussian_;
  std::normal_distribution<double> normal_;
  std::cauchy_distribution<double> cauchy_;
};

/// Center frequency of a parametric model; 0 for tabulated models.
double center_frequency(const SpectralModel& model);

/// Loads `delta_l_um,visibility` CSV (header row required).
TabulatedVisibility load_tabulated_csv(std::istream& in);
TabulatedVisibility load_tabulated_csv(const std::filesystem::path& path);

/// Source visibility rows as measured for the two sources (ΔL 0..350 um).
TabulatedVisibility reference_cw_table();
TabulatedVisibility reference_sp_table();

/// The five path-length presets scanned in the reference measurement.
std::vector<double> reference_delta_l_presets_um();

}  // namespace mzisim
