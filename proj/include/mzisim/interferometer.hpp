#pragma once

#include <cmath>
#include <optional>

#include "mzisim/constants.hpp"

namespace mzisim {

/// Plane-parallel compensator plate. G1 tilts, G2 stays at normal incidence.
struct GlassPlate {
  double thickness_mm = 1.0;
  double refractive_index = 1.53;

  void validate() const;
};

/// Interferometer state at the slit plane.
struct MziConfig {
  double delta_l_um = 0.0;                  ///< arm optical-path difference
  double fringe_period_mm = 20.0 / 6.0;     ///< spatial period at the slit plane
  double phase_offset_rad = 0.0;            ///< fringe phase at x = 0
  double beam_center_mm = 10.0;
  double beam_radius_mm = 10.0;             ///< 1/e^2 intensity radius
  double split_ratio = 0.5;                 ///< BS1 intensity fraction into the first arm

  void validate() const;
};

/// Output-port probabilities; always complementary.
struct PortProbabilities {
  double p_d1 = 0.5;
  double p_d2 = 0.5;
};

/// Tilt-induced optical path change of `plate` at incidence `theta_deg`,
/// relative to the same plate at normal incidence. Returns micrometres.
double plate_opd_um(const GlassPlate& plate, double theta_deg);

/// Inverse of plate_opd_um on [0, 89) degrees. Throws OutOfRangeError when
/// the path difference cannot be reached below 89 degrees.
double theta_for_opd_deg(const GlassPlate& plate, double delta_l_um);

/// Largest tilt accepted by theta_for_opd_deg.
inline constexpr double kMaxPlateTiltDeg = 89.0;

/// Single-photon port probabilities at slit position `x_mm`. Supply exactly one
/// of `nu_hz` (parametric source: phase picks up 2 pi nu dL / c, unit
/// modulation) or `visibility` (tabulated source: modulation depth V).
PortProbabilities detection_probability(const MziConfig& config, std::optional<double> nu_hz,
                                        std::optional<double> visibility, double x_mm);

/// Gaussian beam envelope exp(-2 (x - x0)^2 / w^2).
double beam_envelope(const MziConfig& config, double x_mm);

/// Classical output intensity (relative to the envelope peak) at `x_mm`.
double classical_intensity(const MziConfig& config, double visibility, double x_mm);

/// Fringe contrast factor from an unbalanced BS1; 1 for a 50:50 split.
inline double split_contrast(double split_ratio) { return 2.0 * std::sqrt(split_ratio * (1.0 - split_ratio)); }

namespace detail {

// Hot-loop forms without validation. `spatial_phase` = 2 pi x / period + phi0.
inline double p_d2_frequency(double nu_hz, double delta_l_um, double spatial_phase, double contrast) {
  const double phase = 2.0 * kPi * nu_hz * delta_l_um / kSpeedOfLightUmPerS + spatial_phase;
  return 0.5 * (1.0 + contrast * std::cos(phase));
}

inline double p_d2_visibility(double visibility, double spatial_phase, double contrast) {
  return 0.5 * (1.0 + contrast * visibility * std::cos(spatial_phase));
}

inline double spatial_phase(const MziConfig& c, double x_mm) {
  return 2.0 * kPi * x_mm / c.fringe_period_mm + c.phase_offset_rad;
}

}  // namespace detail

}  // namespace mzisim
