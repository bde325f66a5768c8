#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mzisim/analysis.hpp"
#include "mzisim/constants.hpp"
#include "mzisim/errors.hpp"
#include "mzisim/scan.hpp"

using namespace mzisim;

namespace {

struct Truth {
  double a = 1000.0, x0 = 10.0, w = 10.0, v = 0.5, period = 20.0 / 6.0, phase = 0.8, b = 20.0;
  double operator()(double x) const {
    const double u = (x - x0) / w;
    return a * std::exp(-2.0 * u * u) * (1.0 + v * std::cos(2.0 * kPi * x / period + phase)) + b;
  }
};

std::pair<std::vector<double>, std::vector<double>> synth(const Truth& t, int n = 2500, double range = 20.0) {
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = (i + 0.5) * range / n;
    y[i] = t(x[i]);
  }
  return {x, y};
}

// Closed-form ordinary least squares, written independently of the library.
struct Ols {
  double slope, intercept, lc, sd;
};
Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ssr += std::pow(y[i] - icpt - slope * x[i], 2);
  return {slope, icpt, (icpt - std::exp(-1.0)) / -slope, std::sqrt(ssr / (n - 2))};
}

std::vector<VisibilityPoint> points(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<VisibilityPoint> p;
  for (std::size_t i = 0; i < x.size(); ++i) p.push_back({x[i], y[i], 0.0});
  return p;
}

const std::vector<double> kDl{0, 100, 200, 300, 350};
const std::vector<double> kCw{1, 0.801, 0.539, 0.3, 0.153};
const std::vector<double> kSp{1, 0.8, 0.525, 0.326, 0.171};

}  // namespace

TEST(FitFringe, NoiselessRecovery) {
  Truth t;
  const auto [x, y] = synth(t);
  const auto f = fit_fringe(x, y);
  EXPECT_NEAR(f.visibility, 0.5, 1e-6);
  EXPECT_NEAR(f.period_mm, t.period, 1e-6);
  EXPECT_NEAR(f.center_mm, t.x0, 1e-5);
  EXPECT_NEAR(f.width_mm, t.w, 1e-5);
  EXPECT_NEAR(f.amplitude, t.a, 1e-3);
  EXPECT_NEAR(f.offset, t.b, 1e-3);
  EXPECT_NEAR(std::remainder(f.phase_rad - t.phase, 2.0 * kPi), 0.0, 1e-6);
  EXPECT_LE(f.iterations, kFitMaxIterations);
  for (double xi : {1.0, 9.3, 17.7}) EXPECT_NEAR(f(xi), t(xi), 1e-6);
}

TEST(FitFringe, ZeroModulation) {
  Truth t;
  t.v = 0.0;
  auto [x, y] = synth(t);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 5.0);
  for (auto& v : y) v += n(rng);
  EXPECT_LT(fit_fringe(x, y).visibility, 0.01);
}

TEST(FitFringe, PeriodWithinOnePercentUnderNoise) {
  Truth t;
  t.v = 0.3;
  auto [x, y] = synth(t);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 30.0);
  for (auto& v : y) v += n(rng);
  EXPECT_NEAR(fit_fringe(x, y).period_mm / t.period, 1.0, 0.01);
}

TEST(FitFringe, Errors) {
  std::vector<double> x(100), y(100, 3.0);
  for (int i = 0; i < 100; ++i) x[i] = i;
  EXPECT_THROW(fit_fringe(x, y), DegenerateInputError);
  std::vector<double> xs(48), ys(48);
  for (int i = 0; i < 48; ++i) xs[i] = i, ys[i] = i % 3;
  EXPECT_THROW(fit_fringe(xs, ys), InsufficientDataError);
  FitFailureError e("x", EnvelopeFit{});
  EXPECT_EQ(e.best().iterations, 0);
}

TEST(FitFringe, ParameterRecovery) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uv(0.1, 1.0), uph(0.0, 2.0 * kPi), uc(8.0, 12.0), uw(8.0, 14.0);
  int good = 0;
  for (int k = 0; k < 100; ++k) {
    Truth t;
    t.v = uv(rng);
    t.phase = uph(rng);
    t.x0 = uc(rng);
    t.w = uw(rng);
    t.b = 0.0;
    auto [x, y] = synth(t);
    // SNR 20: noise RMS is 1/20 of the peak signal.
    std::normal_distribution<double> n(0.0, t.a / 20.0);
    for (auto& v : y) v += n(rng);
    try {
      if (std::abs(fit_fringe(x, y).visibility - t.v) <= 0.03) ++good;
    } catch (const FitFailureError&) {
    }
  }
  EXPECT_GE(good, 95);
}

TEST(Extrema, IdealFullModulation) {
  Truth t;
  t.v = 1.0;
  t.b = 0.0;
  const auto [x, y] = synth(t);
  const auto f = fit_fringe(x, y);
  const auto p = visibility_from_extrema(x, y, f, 0.0);
  EXPECT_NEAR(p.visibility, 1.0, 0.01);
  EXPECT_GE(p.sigma, 0.0);
}

TEST(Extrema, EnvelopeCorrectionAndScaleInvariance) {
  Truth t;
  t.v = 0.6;
  t.b = 0.0;
  t.x0 = 6.0;  // off-center so the raw average is biased
  auto [x, y] = synth(t);
  const auto f = fit_fringe(x, y);
  const auto corrected = visibility_from_extrema(x, y, f, 0.0, true);
  EXPECT_NEAR(corrected.visibility, 0.6, 0.005);
  const auto raw = visibility_from_extrema(x, y, f, 0.0, false);
  EXPECT_GT(raw.visibility, 0.0);
  auto scaled = y;
  for (auto& v : scaled) v *= 7.5;
  auto fs = fit_fringe(x, scaled);
  EXPECT_NEAR(visibility_from_extrema(x, scaled, fs, 0.0).visibility, corrected.visibility, 1e-9);
  EXPECT_NEAR(visibility_from_extrema(x, scaled, f, 0.0, false).visibility, raw.visibility, 1e-12);
}

TEST(Extrema, ConstantTraceAndSparseData) {
  std::vector<double> x(200), y(200, 4.0);
  for (int i = 0; i < 200; ++i) x[i] = i * 0.1;
  EnvelopeFit f;
  f.period_mm = 3.3;
  f.width_mm = 10.0;
  f.center_mm = 10.0;
  f.amplitude = 1.0;
  EXPECT_THROW(visibility_from_extrema(x, y, f, 0.0), DegenerateInputError);
  // Samples spaced a whole period apart: nothing lies near the minima.
  std::vector<double> xs, ys;
  for (int i = 0; i < 20; ++i) xs.push_back(i * 3.3), ys.push_back(1.0 + (i % 2));
  f.phase_rad = 0.0;
  EXPECT_THROW(visibility_from_extrema(xs, ys, f, 0.0), InsufficientDataError);
}

TEST(Extrema, MonteCarloTabulatedSinglePhoton) {
  ExperimentConfig c;
  c.mode = SourceMode::SinglePhoton;
  c.spectral = reference_sp_table();
  c.scan.time_scale = 0.01;
  c.seed = 31;
  const auto t = run_scan(c, 200.0);
  const auto p = visibility_from_extrema(t, fit_fringe(t));
  EXPECT_NEAR(p.visibility, 0.525, 0.05);
}

TEST(VisibilityLine, TableRows) {
  const auto cw = fit_visibility_line(points(kDl, kCw));
  const auto sp = fit_visibility_line(points(kDl, kSp));
  const auto ocw = ols(kDl, kCw), osp = ols(kDl, kSp);
  EXPECT_NEAR(cw.slope_per_um, ocw.slope, 1e-15);
  EXPECT_NEAR(cw.intercept, ocw.intercept, 1e-13);
  EXPECT_NEAR(cw.coherence_length_um, ocw.lc, 1e-9);
  EXPECT_NEAR(sp.coherence_length_um, osp.lc, 1e-9);
  EXPECT_NEAR(cw.coherence_length_um, 268.5, 0.05);
  EXPECT_NEAR(sp.coherence_length_um, 273.3, 0.05);
  EXPECT_NEAR(cw.dispersion, ocw.sd, 1e-14);
  EXPECT_NEAR(cw.dispersion, 0.021, 0.003);
  EXPECT_NEAR(sp.dispersion, 0.021, 0.003);
  EXPECT_EQ(cw.n_points, 5u);
}

TEST(VisibilityLine, ExactLine) {
  std::vector<double> v;
  for (double d : kDl) v.push_back(1.0 - d / 400.0);
  const auto r = fit_visibility_line(points(kDl, v));
  EXPECT_NEAR(r.coherence_length_um, (1.0 - std::exp(-1.0)) * 400.0, 1e-9);
  EXPECT_NEAR(r.coherence_length_um, 252.85, 0.01);
  EXPECT_NEAR(r.dispersion, 0.0, 1e-12);
  EXPECT_NEAR(r.coherence_length_um, (r.intercept - kInvE) / -r.slope_per_um, 1e-12);
}

TEST(VisibilityLine, ScalingEquivariance) {
  const auto base = fit_visibility_line(points(kDl, kSp));
  for (double k : {0.5, 2.0, 8.0}) {
    std::vector<double> d;
    for (double x : kDl) d.push_back(k * x);
    EXPECT_NEAR(fit_visibility_line(points(d, kSp)).coherence_length_um / base.coherence_length_um, k, 1e-12);
  }
}

TEST(VisibilityLine, Errors) {
  EXPECT_THROW(fit_visibility_line(points({0, 100}, {1, 0.5})), InsufficientDataError);
  EXPECT_THROW(fit_visibility_line(points({0, 0, 100}, {1, 0.9, 0.5})), InsufficientDataError);
  EXPECT_THROW(fit_visibility_line(points({0, 100, 200}, {0.5, 0.6, 0.7})), NoCrossingError);
  EXPECT_THROW(fit_visibility_line(points({0, 100, 200}, {0.3, 0.2, 0.1})), NoCrossingError);
}

TEST(CompareCurves, Examples) {
  const auto pcw = points(kDl, kCw), psp = points(kDl, kSp);
  const auto cw = fit_visibility_line(pcw), sp = fit_visibility_line(psp);
  const auto same = compare_curves(cw, cw, pcw, pcw);
  EXPECT_EQ(same.line_gap_rms, 0.0);
  const auto c = compare_curves(cw, sp, pcw, psp);
  EXPECT_NEAR(c.dispersion_a, 0.021, 0.003);
  EXPECT_LT(c.line_gap_rms, 0.02);
  // Numerical RMS gap over [0, 350] as an independent check.
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = 350.0 * (i + 0.5) / n;
    s += std::pow(cw.at(x) - sp.at(x), 2);
  }
  EXPECT_NEAR(c.line_gap_rms, std::sqrt(s / n), 1e-8);
  EXPECT_DOUBLE_EQ(c.range_lo_um, 0.0);
  EXPECT_DOUBLE_EQ(c.range_hi_um, 350.0);
}
