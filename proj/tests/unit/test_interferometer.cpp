#include <gtest/gtest.h>

#include <cmath>

#include "mzisim/constants.hpp"
#include "mzisim/errors.hpp"
#include "mzisim/interferometer.hpp"
#include "mzisim/spectral.hpp"

using namespace mzisim;

namespace {

// Independent plate oracle: optical path through a tilted plate minus the air
// path it displaces, relative to normal incidence.
double opd_oracle(double d_um, double n, double theta_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double thr = std::asin(std::sin(th) / n);
  const double glass = d_um / std::cos(thr);
  const double air = glass * std::cos(th - thr);
  return (n * glass - air) - d_um * (n - 1.0);
}

}  // namespace

TEST(PlateOpd, Examples) {
  const GlassPlate g{1.0, 1.53};
  EXPECT_EQ(plate_opd_um(g, 0.0), 0.0);
  EXPECT_NEAR(plate_opd_um(g, 30.0), 50.0, 0.1);
  EXPECT_NEAR(plate_opd_um(g, 40.0), 92.4, 0.1);
  for (double th : {5.0, 17.0, 44.0, 63.0, 85.0}) EXPECT_NEAR(plate_opd_um(g, th), opd_oracle(1000.0, 1.53, th), 1e-9);
}

TEST(PlateOpd, RangeChecked) {
  const GlassPlate g;
  EXPECT_THROW(plate_opd_um(g, -1.0), ValidationError);
  EXPECT_THROW(plate_opd_um(g, 90.0), ValidationError);
  EXPECT_THROW(plate_opd_um(GlassPlate{1.0, 1.0}, 10.0), ValidationError);
  EXPECT_THROW(plate_opd_um(GlassPlate{0.0, 1.5}, 10.0), ValidationError);
}

TEST(PlateOpd, StrictlyIncreasingAndConvexOnSixtyDegrees) {
  const GlassPlate g;
  double prev = plate_opd_um(g, 0.0), prev_slope = 0.0;
  for (int i = 1; i <= 600; ++i) {
    const double v = plate_opd_um(g, i * 0.1);
    ASSERT_GT(v, prev);
    const double slope = v - prev;
    ASSERT_GE(slope, prev_slope - 1e-12);
    prev = v;
    prev_slope = slope;
  }
}

TEST(PlateOpd, SmallAngleLimit) {
  const GlassPlate g{1.0, 1.53};
  const double th = 0.5 * std::numbers::pi / 180.0;
  const double coeff = 1000.0 * (1.53 - 1.0) / (2.0 * 1.53);
  EXPECT_NEAR(plate_opd_um(g, 0.5) / (th * th) / coeff, 1.0, 0.01);
}

TEST(ThetaForOpd, ExamplesAndRoundTrip) {
  const GlassPlate g;
  EXPECT_EQ(theta_for_opd_deg(g, 0.0), 0.0);
  EXPECT_NEAR(theta_for_opd_deg(g, 100.0), 41.5, 0.05);
  for (double x : {100.0, 200.0, 300.0, 350.0}) EXPECT_NEAR(plate_opd_um(g, theta_for_opd_deg(g, x)), x, 1e-4);
  EXPECT_THROW(theta_for_opd_deg(g, 5000.0), OutOfRangeError);
  EXPECT_THROW(theta_for_opd_deg(g, -1.0), OutOfRangeError);
}

TEST(DetectionProbability, ConstructiveAtMaximum) {
  MziConfig c;
  c.phase_offset_rad = 0.0;
  const auto p = detection_probability(c, std::nullopt, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(p.p_d2, 1.0);
  EXPECT_DOUBLE_EQ(p.p_d1, 0.0);
  // Parametric at zero path difference: the frequency drops out.
  const auto q = detection_probability(c, 7.4e14, std::nullopt, c.fringe_period_mm);
  EXPECT_NEAR(q.p_d2, 1.0, 1e-12);
}

TEST(DetectionProbability, IncoherentLimit) {
  MziConfig c;
  c.phase_offset_rad = 1.234;
  for (double x : {0.0, 0.7, 3.1, 19.9}) EXPECT_DOUBLE_EQ(detection_probability(c, {}, 0.0, x).p_d2, 0.5);
}

TEST(DetectionProbability, ExactlyOneSourceArgument) {
  MziConfig c;
  EXPECT_THROW(detection_probability(c, {}, {}, 0.0), UsageError);
  EXPECT_THROW(detection_probability(c, 7e14, 0.5, 0.0), UsageError);
}

TEST(DetectionProbability, ComplementaryAndPeriodic) {
  MziConfig c;
  c.delta_l_um = 200.0;
  c.phase_offset_rad = 0.3;
  for (int i = 0; i < 2000; ++i) {
    const double x = -5.0 + i * 0.0137;
    for (double v : {0.0, 0.25, 0.8, 1.0}) {
      const auto p = detection_probability(c, {}, v, x);
      ASSERT_EQ(p.p_d1 + p.p_d2, 1.0);
      ASSERT_GE(p.p_d2, 0.0);
      ASSERT_LE(p.p_d2, 1.0);
      ASSERT_LT(std::abs(p.p_d2 - detection_probability(c, {}, v, x + c.fringe_period_mm).p_d2), 1e-12);
    }
    const auto q = detection_probability(c, 7.4e14 + i * 1e8, {}, x);
    ASSERT_EQ(q.p_d1 + q.p_d2, 1.0);
    ASSERT_LT(std::abs(q.p_d2 - detection_probability(c, 7.4e14 + i * 1e8, {}, x + c.fringe_period_mm).p_d2),
              1e-12);
  }
}

TEST(DetectionProbability, FrequencyAverageMatchesAnalyticVisibility) {
  const auto m = calibrate_gaussian(268, 405);
  const double nu0 = center_frequency(m);
  MziConfig c;
  c.delta_l_um = 200.0;
  // Pin the total phase at x = 0 to a generic value by folding in the carrier.
  const double carrier = std::fmod(2.0 * kPi * nu0 * c.delta_l_um / kSpeedOfLightUmPerS, 2.0 * kPi);
  c.phase_offset_rad = 0.4 - carrier;
  Rng rng(99);
  const int n = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = detection_probability(c, sample_frequency(m, rng), {}, 0.0).p_d2;
    s += p;
    s2 += p * p;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  const double expect = 0.5 * (1.0 + visibility(m, 200.0) * std::cos(0.4));
  EXPECT_LE(std::abs(mean - expect), 3.0 * se);
}

TEST(DetectionProbability, UnbalancedSplitReducesContrast) {
  MziConfig c;
  c.split_ratio = 0.9;
  const auto p = detection_probability(c, {}, 1.0, 0.0);
  EXPECT_NEAR(p.p_d2, 0.5 * (1.0 + 2.0 * std::sqrt(0.09)), 1e-12);
}

TEST(ClassicalIntensity, Examples) {
  MziConfig c;
  c.phase_offset_rad = 0.0;
  const double x = 2.0 * c.fringe_period_mm;
  EXPECT_NEAR(classical_intensity(c, 1.0, x), beam_envelope(c, x), 1e-12);
  for (double y : {0.0, 1.3, 7.7}) EXPECT_NEAR(classical_intensity(c, 0.0, y), 0.5 * beam_envelope(c, y), 1e-15);
}

TEST(ClassicalIntensity, ExtremaRatioRecoversVisibility) {
  MziConfig c;
  c.phase_offset_rad = 0.0;
  for (double v : {0.2, 0.55, 0.9}) {
    // Central period around the beam center, envelope divided out.
    const double lam = c.fringe_period_mm;
    const double k0 = std::round(c.beam_center_mm / lam);
    double mx = 0.0, mn = 1e9;
    for (int i = 0; i <= 2000; ++i) {
      const double x = (k0 - 0.5) * lam + i * lam / 2000.0;
      const double y = classical_intensity(c, v, x) / beam_envelope(c, x);
      mx = std::max(mx, y);
      mn = std::min(mn, y);
    }
    EXPECT_NEAR((mx - mn) / (mx + mn), v, 1e-3);
  }
}
