#pragma once

#include <span>
#include <vector>

#include "mzisim/errors.hpp"
#include "mzisim/scan.hpp"

namespace mzisim {

/// Gaussian-envelope fringe model
///   y(x) = A exp(-2 (x - x0)^2 / w^2) [1 + V cos(2 pi x / period + phase)] + B
struct EnvelopeFit {
  double amplitude = 0.0;
  double center_mm = 0.0;
  double width_mm = 0.0;
  double visibility = 0.0;
  double period_mm = 0.0;
  double phase_rad = 0.0;  ///< wrapped to [0, 2 pi)
  double offset = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;

  double envelope(double x_mm) const;
  double operator()(double x_mm) const;
};

struct VisibilityPoint {
  double delta_l_um = 0.0;
  double visibility = 0.0;
  double sigma = 0.0;
};

/// Linear visibility-vs-delta_L regression and its 1/e crossing.
struct CoherenceResult {
  double slope_per_um = 0.0;
  double intercept = 0.0;
  double coherence_length_um = 0.0;
  double dispersion = 0.0;  ///< residual standard deviation, N - 2 degrees of freedom
  std::size_t n_points = 0;

  double at(double delta_l_um) const { return intercept + slope_per_um * delta_l_um; }
};

struct CurveComparison {
  double dispersion_a = 0.0;
  double dispersion_b = 0.0;
  double line_gap_rms = 0.0;  ///< RMS separation of the two lines over the shared delta_L range
  double range_lo_um = 0.0;
  double range_hi_um = 0.0;
};

/// Trust-region (Levenberg-Marquardt) fit did not converge. Carries the best
/// iterate found.
class FitFailureError : public Error {
 public:
  FitFailureError(const std::string& what, EnvelopeFit best) : Error(what), best_(best) {}
  const EnvelopeFit& best() const noexcept { return best_; }

 private:
  EnvelopeFit best_;
};

inline constexpr int kEnvelopeFitParameters = 7;
inline constexpr int kFitMaxIterations = 200;
inline constexpr double kFitRelativeTolerance = 1e-10;
inline constexpr int kExtremumPoints = 4;

EnvelopeFit fit_fringe(std::span<const double> positions_mm, std::span<const double> values);
EnvelopeFit fit_fringe(const FringeTrace& trace);

/// Averages 4 points at the highest fitted peak and 4 + 4 at the two flanking
/// minima, then V = (max - min) / (max + min). With `envelope_correction` each
/// point is first divided by the fitted Gaussian envelope.
VisibilityPoint visibility_from_extrema(std::span<const double> positions_mm, std::span<const double> values,
                                        const EnvelopeFit& fit, double delta_l_um, bool envelope_correction = true);
VisibilityPoint visibility_from_extrema(const FringeTrace& trace, const EnvelopeFit& fit,
                                        bool envelope_correction = true);

/// Ordinary least squares V = slope * dL + intercept and its 1/e crossing.
CoherenceResult fit_visibility_line(std::span<const VisibilityPoint> points);

CurveComparison compare_curves(const CoherenceResult& a, const CoherenceResult& b,
                               std::span<const VisibilityPoint> points_a, std::span<const VisibilityPoint> points_b);

/// Residual standard deviation of `points` about `line`.
double line_dispersion(const CoherenceResult& line, std::span<const VisibilityPoint> points);

}  // namespace mzisim
