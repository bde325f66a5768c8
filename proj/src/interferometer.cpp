#include "mzisim/interferometer.hpp"

#include <algorithm>

#include "mzisim/errors.hpp"

namespace mzisim {

void GlassPlate::validate() const {
  if (!(thickness_mm > 0.0)) throw ValidationError("plate thickness must be > 0");
  if (!(refractive_index > 1.0)) throw ValidationError("plate refractive index must be > 1");
}

void MziConfig::validate() const {
  if (!(fringe_period_mm > 0.0)) throw ValidationError("fringe period must be > 0");
  if (!(beam_radius_mm > 0.0)) throw ValidationError("beam radius must be > 0");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ValidationError("split ratio must be in (0, 1)");
  if (!(delta_l_um >= 0.0)) throw ValidationError("delta_L must be >= 0");
  if (!std::isfinite(phase_offset_rad) || !std::isfinite(beam_center_mm))
    throw ValidationError("phase offset and beam center must be finite");
}

double plate_opd_um(const GlassPlate& plate, double theta_deg) {
  plate.validate();
  if (!(theta_deg >= 0.0 && theta_deg < 90.0)) throw ValidationError("plate tilt must be in [0, 90) degrees");
  const double d = plate.thickness_mm * 1e3;
  const double n = plate.refractive_index;
  const double theta = theta_deg * kPi / 180.0;
  const double theta_r = std::asin(std::sin(theta) / n);
  return d / std::cos(theta_r) * (n - std::cos(theta - theta_r)) - d * (n - 1.0);
}

double theta_for_opd_deg(const GlassPlate& plate, double delta_l_um) {
  plate.validate();
  if (!(delta_l_um >= 0.0)) throw OutOfRangeError("path difference must be >= 0");
  if (delta_l_um == 0.0) return 0.0;
  double lo = 0.0, hi = kMaxPlateTiltDeg;
  if (plate_opd_um(plate, hi) < delta_l_um)
    throw OutOfRangeError("path difference " + std::to_string(delta_l_um) + " um needs more than " +
                          std::to_string(kMaxPlateTiltDeg) + " degrees of tilt");
  // plate_opd_um is strictly increasing on [0, 90).
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = plate_opd_um(plate, mid) - delta_l_um;
    if (std::abs(f) < 1e-7) return mid;
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PortProbabilities detection_probability(const MziConfig& config, std::optional<double> nu_hz,
                                        std::optional<double> visibility, double x_mm) {
  if (nu_hz.has_value() == visibility.has_value())
    throw UsageError("supply exactly one of optical frequency or visibility");
  if (!std::isfinite(x_mm)) throw ValidationError("slit position must be finite");
  config.validate();
  const double contrast = split_contrast(config.split_ratio);
  const double sp = detail::spatial_phase(config, x_mm);
  double p2;
  if (nu_hz) {
    if (!(*nu_hz > 0.0)) throw ValidationError("optical frequency must be > 0");
    p2 = detail::p_d2_frequency(*nu_hz, config.delta_l_um, sp, contrast);
  } else {
    if (!(*visibility >= 0.0 && *visibility <= 1.0)) throw ValidationError("visibility must be in [0, 1]");
    p2 = detail::p_d2_visibility(*visibility, sp, contrast);
  }
  p2 = std::clamp(p2, 0.0, 1.0);
  return {1.0 - p2, p2};
}

double beam_envelope(const MziConfig& config, double x_mm) {
  const double u = (x_mm - config.beam_center_mm) / config.beam_radius_mm;
  return std::exp(-2.0 * u * u);
}

double classical_intensity(const MziConfig& config, double visibility, double x_mm) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ValidationError("visibility must be in [0, 1]");
  config.validate();
  const double fringe = detail::p_d2_visibility(visibility, detail::spatial_phase(config, x_mm),
                                                split_contrast(config.split_ratio));
  return beam_envelope(config, x_mm) * fringe;
}

}  // namespace mzisim
