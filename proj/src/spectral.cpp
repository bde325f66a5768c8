#include "mzisim/spectral.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mzisim/constants.hpp"
#include "mzisim/csv.hpp"
#include "mzisim/errors.hpp"

namespace mzisim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// L_c such that V = exp(-(dL/L_c)^2) for a Gaussian of standard deviation sigma_nu.
double gaussian_length_um(double sigma_nu_hz) {
  return kSpeedOfLightUmPerS / (std::numbers::sqrt2 * kPi * sigma_nu_hz);
}

// L_c such that V = exp(-dL/L_c) for a Lorentzian of half width hwhm.
double lorentzian_length_um(double hwhm_hz) { return kSpeedOfLightUmPerS / (2.0 * kPi * hwhm_hz); }

double interpolate(const TabulatedVisibility& t, double dl) {
  const auto& p = t.points;
  if (dl >= p.back().delta_l_um) return p.back().visibility;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (dl <= p[i].delta_l_um) {
      const double f = (dl - p[i - 1].delta_l_um) / (p[i].delta_l_um - p[i - 1].delta_l_um);
      return p[i - 1].visibility + f * (p[i].visibility - p[i - 1].visibility);
    }
  }
  return p.back().visibility;
}

}  // namespace

SpectralModel::SpectralModel(GaussianSpectrum g) : variant_(g) {}
SpectralModel::SpectralModel(LorentzianSpectrum l) : variant_(l) {}
SpectralModel::SpectralModel(TabulatedVisibility t) : variant_(std::move(t)) {}

void SpectralModel::validate() const {
  std::visit(Overloaded{
                 [](const GaussianSpectrum& g) {
                   if (!(g.center_frequency_hz > 0.0) || !(g.sigma_nu_hz > 0.0))
                     throw ValidationError("Gaussian spectrum needs center_frequency > 0 and sigma_nu > 0");
                 },
                 [](const LorentzianSpectrum& l) {
                   if (!(l.center_frequency_hz > 0.0) || !(l.hwhm_hz > 0.0))
                     throw ValidationError("Lorentzian spectrum needs center_frequency > 0 and hwhm > 0");
                 },
                 [](const TabulatedVisibility& t) {
                   const auto& p = t.points;
                   if (p.empty()) throw ValidationError("tabulated visibility has no points");
                   if (p.front().delta_l_um != 0.0 || p.front().visibility != 1.0)
                     throw ValidationError("tabulated visibility must start at (0, 1)");
                   for (std::size_t i = 0; i < p.size(); ++i) {
                     if (!(p[i].visibility >= 0.0 && p[i].visibility <= 1.0))
                       throw ValidationError("tabulated visibility outside [0, 1]");
                     if (i > 0 && !(p[i].delta_l_um > p[i - 1].delta_l_um))
                       throw ValidationError("tabulated delta_L must be strictly increasing");
                     if (i > 0 && p[i].visibility > p[i - 1].visibility)
                       throw ValidationError("tabulated visibility must be non-increasing");
                   }
                 },
             },
             variant_);
}

double visibility(const SpectralModel& model, double delta_l_um) {
  if (!(delta_l_um >= 0.0)) throw ValidationError("delta_L must be >= 0");
  model.validate();
  return std::visit(Overloaded{
                        [&](const GaussianSpectrum& g) {
                          const double r = delta_l_um / gaussian_length_um(g.sigma_nu_hz);
                          return std::exp(-r * r);
                        },
                        [&](const LorentzianSpectrum& l) {
                          return std::exp(-delta_l_um / lorentzian_length_um(l.hwhm_hz));
                        },
                        [&](const TabulatedVisibility& t) { return interpolate(t, delta_l_um); },
                    },
                    model.variant());
}

double gaussian_sigma_for_coherence_length(double coherence_length_um) {
  if (!(coherence_length_um > 0.0)) throw ValidationError("coherence length must be > 0");
  return kSpeedOfLightUmPerS / (std::numbers::sqrt2 * kPi * coherence_length_um);
}

SpectralModel calibrate_gaussian(double coherence_length_um, double center_wavelength_nm) {
  if (!(center_wavelength_nm > 0.0)) throw ValidationError("center wavelength must be > 0");
  const double sigma = gaussian_sigma_for_coherence_length(coherence_length_um);
  return GaussianSpectrum{kSpeedOfLight / (center_wavelength_nm * 1e-9), sigma};
}

CoherenceCurve coherence_curve(const SpectralModel& model) {
  model.validate();
  const double lc = std::visit(
      Overloaded{
          [](const GaussianSpectrum& g) { return gaussian_length_um(g.sigma_nu_hz); },
          [](const LorentzianSpectrum& l) { return lorentzian_length_um(l.hwhm_hz); },
          [](const TabulatedVisibility& t) {
            const auto& p = t.points;
            for (std::size_t i = 1; i < p.size(); ++i) {
              if (p[i].visibility <= kInvE) {
                const double f = (p[i - 1].visibility - kInvE) / (p[i - 1].visibility - p[i].visibility);
                return p[i - 1].delta_l_um + f * (p[i].delta_l_um - p[i - 1].delta_l_um);
              }
            }
            return std::numeric_limits<double>::infinity();
          },
      },
      model.variant());
  return {model, lc};
}

double sample_frequency(const SpectralModel& model, Rng& rng) { return FrequencySampler(model)(rng); }

FrequencySampler::FrequencySampler(const SpectralModel& model) : gaussian_(false) {
  model.validate();
  if (const auto* g = std::get_if<GaussianSpectrum>(&model.variant())) {
    gaussian_ = true;
    normal_ = std::normal_distribution<double>(g->center_frequency_hz, g->sigma_nu_hz);
  } else if (const auto* l = std::get_if<LorentzianSpectrum>(&model.variant())) {
    cauchy_ = std::cauchy_distribution<double>(l->center_frequency_hz, l->hwhm_hz);
  } else {
    throw UnsupportedModeError("tabulated spectral model has no frequency density; detection uses V directly");
  }
}

double FrequencySampler::operator()(Rng& rng) {
  if (gaussian_) return normal_(rng);
  double nu;
  do nu = cauchy_(rng);
  while (!(nu > 0.0));
  return nu;
}

double center_frequency(const SpectralModel& model) {
  return std::visit(Overloaded{
                        [](const GaussianSpectrum& g) { return g.center_frequency_hz; },
                        [](const LorentzianSpectrum& l) { return l.center_frequency_hz; },
                        [](const TabulatedVisibility&) { return 0.0; },
                    },
                    model.variant());
}

namespace {

TabulatedVisibility tabulated_from(const csv::Table& table) {
  const auto c_dl = table.require_column("delta_l_um");
  const auto c_v = table.require_column("visibility");
  TabulatedVisibility t;
  for (const auto& row : table.rows) t.points.push_back({csv::to_double(row, c_dl), csv::to_double(row, c_v)});
  try {
    SpectralModel(t).validate();
  } catch (const ValidationError& e) {
    throw DataFormatError(e.what());
  }
  return t;
}

}  // namespace

TabulatedVisibility load_tabulated_csv(std::istream& in) { return tabulated_from(csv::read(in)); }

TabulatedVisibility load_tabulated_csv(const std::filesystem::path& path) {
  try {
    return tabulated_from(csv::read_file(path));
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what());
  }
}

TabulatedVisibility reference_cw_table() {
  return {{{0, 1.0}, {100, 0.801}, {200, 0.539}, {300, 0.3}, {350, 0.153}}};
}

TabulatedVisibility reference_sp_table() {
  return {{{0, 1.0}, {100, 0.8}, {200, 0.525}, {300, 0.326}, {350, 0.171}}};
}

std::vector<double> reference_delta_l_presets_um() { return {0.0, 100.0, 200.0, 300.0, 350.0}; }

}  // namespace mzisim
