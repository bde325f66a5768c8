#include "mzisim/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <set>

#include "fft.hpp"
#include "mzisim/constants.hpp"

namespace mzisim {
namespace {

constexpr int kNp = kEnvelopeFitParameters;
using Params = Eigen::Matrix<double, kNp, 1>;
using Normal = Eigen::Matrix<double, kNp, kNp>;
enum Index { kA = 0, kX0, kW, kV, kPeriod, kPhase, kB };

double wrap_phase(double p) {
  p = std::fmod(p, 2.0 * kPi);
  return p < 0.0 ? p + 2.0 * kPi : p;
}

// Phase is referenced to `x_ref` (mid-scan) inside the solver so that period
// and phase are not strongly correlated.
struct FringeModel {
  std::span<const double> x;
  std::span<const double> y;
  double x_ref = 0.0;

  double value(const Params& p, double xi) const {
    const double u = xi - p[kX0];
    const double g = std::exp(-2.0 * u * u / (p[kW] * p[kW]));
    const double th = 2.0 * kPi * (xi - x_ref) / p[kPeriod] + p[kPhase];
    return p[kA] * g * (1.0 + p[kV] * std::cos(th)) + p[kB];
  }

  double cost(const Params& p) const {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - value(p, x[i]);
      c += r * r;
    }
    return 0.5 * c;
  }

  // Accumulates J^T J and J^T r without storing J.
  void normal_equations(const Params& p, Normal& jtj, Params& jtr) const {
    jtj.setZero();
    jtr.setZero();
    Params row;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = x[i] - p[kX0];
      const double w2 = p[kW] * p[kW];
      const double g = std::exp(-2.0 * u * u / w2);
      const double th = 2.0 * kPi * (x[i] - x_ref) / p[kPeriod] + p[kPhase];
      const double c = std::cos(th), s = std::sin(th);
      const double mod = 1.0 + p[kV] * c;
      const double agm = p[kA] * g * mod;
      row[kA] = g * mod;
      row[kX0] = agm * 4.0 * u / w2;
      row[kW] = agm * 4.0 * u * u / (w2 * p[kW]);
      row[kV] = p[kA] * g * c;
      row[kPeriod] = p[kA] * g * p[kV] * s * 2.0 * kPi * (x[i] - x_ref) / (p[kPeriod] * p[kPeriod]);
      row[kPhase] = -p[kA] * g * p[kV] * s;
      row[kB] = 1.0;
      const double r = y[i] - (agm + p[kB]);
      jtj.selfadjointView<Eigen::Lower>().rankUpdate(row);
      jtr += row * r;
    }
    jtj = jtj.selfadjointView<Eigen::Lower>();
  }
};

bool admissible(const Params& p) {
  return p.allFinite() && p[kA] > 0.0 && p[kW] > 0.0 && p[kPeriod] > 0.0;
}

double dft_magnitude(std::span<const double> x, std::span<const double> r, std::span<const double> taper, double f) {
  std::complex<double> acc{};
  for (std::size_t i = 0; i < x.size(); ++i) acc += r[i] * taper[i] * std::polar(1.0, -2.0 * kPi * f * x[i]);
  return std::abs(acc);
}

// Dominant spatial frequency (cycles/mm) of the mean-removed, Hann-tapered
// trace, refined between FFT bins by golden-section search.
double dominant_frequency(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
  const double span = x.back() - x.front() + dx;
  // Quartic detrend strips the envelope, which otherwise outweighs a
  // low-visibility fringe at low frequencies.
  constexpr int kTrend = 5;
  Eigen::MatrixXd basis(n, kTrend);
  Eigen::VectorXd yy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 2.0 * (x[i] - x.front()) / (x.back() - x.front()) - 1.0;
    double pw = 1.0;
    for (int k = 0; k < kTrend; ++k, pw *= u) basis(static_cast<Eigen::Index>(i), k) = pw;
    yy[static_cast<Eigen::Index>(i)] = y[i];
  }
  const Eigen::VectorXd trend = basis * basis.colPivHouseholderQr().solve(yy);
  std::vector<double> r(n), taper(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = y[i] - trend[static_cast<Eigen::Index>(i)];
    taper[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  std::size_t m = 1;
  while (m < 8 * n) m <<= 1;
  std::vector<std::complex<double>> buf(m);
  for (std::size_t i = 0; i < n; ++i) buf[i] = r[i] * taper[i];
  detail::fft_inplace(buf);

  const double df = 1.0 / (static_cast<double>(m) * dx);
  // At least two periods across the scan; below that the envelope dominates.
  const auto k_min = static_cast<std::size_t>(std::ceil(2.0 / span / df));
  std::size_t best = k_min;
  for (std::size_t k = k_min; k <= m / 2; ++k)
    if (std::abs(buf[k]) > std::abs(buf[best])) best = k;

  double lo = (static_cast<double>(best) - 1.0) * df, hi = (static_cast<double>(best) + 1.0) * df;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = dft_magnitude(x, r, taper, a), fb = dft_magnitude(x, r, taper, b);
  for (int it = 0; it < 60; ++it) {
    if (fa > fb) {
      hi = b, b = a, fb = fa;
      a = hi - phi * (hi - lo);
      fa = dft_magnitude(x, r, taper, a);
    } else {
      lo = a, a = b, fa = fb;
      b = lo + phi * (hi - lo);
      fb = dft_magnitude(x, r, taper, b);
    }
  }
  return 0.5 * (lo + hi);
}

Params initial_guess(std::span<const double> x, std::span<const double> y, double x_ref) {
  const std::size_t n = x.size();
  const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
  const double period = 1.0 / dominant_frequency(x, y);

  // One-period moving average removes the fringe and leaves the envelope.
  const auto half = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(period / dx)) / 2);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half));
    const auto hi = std::min(n, i + static_cast<std::size_t>(half) + 1);
    smooth[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }

  double sw = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(0.0, smooth[i]);
    sw += w;
    sx += w * x[i];
  }
  const double x0 = sx / sw;
  double sv = 0.0;
  for (std::size_t i = 0; i < n; ++i) sv += std::max(0.0, smooth[i]) * (x[i] - x0) * (x[i] - x0);
  const double width = 2.0 * std::sqrt(sv / sw);
  const double amp = *std::max_element(smooth.begin(), smooth.end());

  std::complex<double> c{};
  for (std::size_t i = 0; i < n; ++i)
    c += (y[i] - smooth[i]) * std::polar(1.0, -2.0 * kPi * (x[i] - x_ref) / period);
  const double vis = std::clamp(2.0 * std::abs(c) / sw, 0.02, 1.0);

  Params p;
  p << amp, x0, width, vis, period, std::arg(c), 0.0;
  return p;
}

EnvelopeFit to_fit(const Params& p, double x_ref, double cost, std::size_t n, int iterations) {
  EnvelopeFit f;
  f.amplitude = p[kA];
  f.center_mm = p[kX0];
  f.width_mm = std::abs(p[kW]);
  f.period_mm = p[kPeriod];
  double phase = p[kPhase] - 2.0 * kPi * x_ref / p[kPeriod];
  double v = p[kV];
  if (v < 0.0) {
    v = -v;
    phase += kPi;
  }
  f.visibility = std::min(v, 1.0);
  f.phase_rad = wrap_phase(phase);
  f.offset = p[kB];
  f.residual_rms = std::sqrt(2.0 * cost / static_cast<double>(n));
  f.iterations = iterations;
  return f;
}

}  // namespace

double EnvelopeFit::envelope(double x_mm) const {
  const double u = (x_mm - center_mm) / width_mm;
  return std::exp(-2.0 * u * u);
}

double EnvelopeFit::operator()(double x_mm) const {
  return amplitude * envelope(x_mm) * (1.0 + visibility * std::cos(2.0 * kPi * x_mm / period_mm + phase_rad)) + offset;
}

EnvelopeFit fit_fringe(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("positions and values differ in length");
  if (x.size() < static_cast<std::size_t>(7 * kNp))
    throw InsufficientDataError("fringe fit needs at least " + std::to_string(7 * kNp) + " points");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) throw DegenerateInputError("trace is flat");

  FringeModel model{x, y, 0.5 * (x.front() + x.back())};
  Params p = initial_guess(x, y, model.x_ref);
  double cost = model.cost(p);
  const double scale = 0.5 * std::inner_product(y.begin(), y.end(), y.begin(), 0.0);

  Normal jtj;
  Params jtr;
  model.normal_equations(p, jtj, jtr);
  double lambda = 1e-3;
  for (int it = 1; it <= kFitMaxIterations; ++it) {
    if (cost <= 1e-28 * scale) return to_fit(p, model.x_ref, cost, x.size(), it);
    Normal damped = jtj;
    const double floor = 1e-12 * jtj.diagonal().maxCoeff();
    for (int k = 0; k < kNp; ++k) damped(k, k) += lambda * std::max(jtj(k, k), floor);
    const Params step = damped.ldlt().solve(jtr);
    const Params trial = p + step;
    const double trial_cost = admissible(trial) ? model.cost(trial) : INFINITY;
    if (trial_cost < cost) {
      const double rel = (cost - trial_cost) / cost;
      p = trial;
      cost = trial_cost;
      if (rel < kFitRelativeTolerance) return to_fit(p, model.x_ref, cost, x.size(), it);
      model.normal_equations(p, jtj, jtr);
      lambda = std::max(lambda / 3.0, 1e-12);
    } else {
      lambda *= 4.0;
      // No descent direction left at any damping: p is stationary.
      if (lambda > 1e16) return to_fit(p, model.x_ref, cost, x.size(), it);
    }
  }
  throw FitFailureError("fringe fit did not converge in " + std::to_string(kFitMaxIterations) + " iterations",
                        to_fit(p, model.x_ref, cost, x.size(), kFitMaxIterations));
}

EnvelopeFit fit_fringe(const FringeTrace& trace) {
  trace.validate();
  return fit_fringe(trace.positions_mm, trace.values);
}

namespace {

// Indices of the `count` samples nearest `target` (positions sorted).
std::vector<std::size_t> nearest(std::span<const double> x, double target, int count) {
  auto hi = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), target) - x.begin());
  std::size_t lo = hi;  // candidates are [lo, hi)
  std::vector<std::size_t> out;
  while (static_cast<int>(out.size()) < count && (lo > 0 || hi < x.size())) {
    const bool take_left =
        hi >= x.size() || (lo > 0 && std::abs(x[lo - 1] - target) <= std::abs(x[hi] - target));
    out.push_back(take_left ? --lo : hi++);
  }
  return out;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : v) ss += (a - m) * (a - m);
  return {m, n > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0};
}

}  // namespace

VisibilityPoint visibility_from_extrema(std::span<const double> x, std::span<const double> y, const EnvelopeFit& fit,
                                        double delta_l_um, bool envelope_correction) {
  if (x.size() != y.size()) throw ValidationError("positions and values differ in length");
  if (x.size() < 3 * kExtremumPoints) throw InsufficientDataError("too few points for extrema averaging");
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*hi_it)))
    throw DegenerateInputError("trace is flat: no extrema");
  if (!(fit.period_mm > 0.0) || !(fit.width_mm > 0.0)) throw ValidationError("invalid envelope fit");

  const double period = fit.period_mm;
  const double first = x.front() + 0.5 * period, last = x.back() - 0.5 * period;
  // Fitted peaks sit where 2 pi x / period + phase = 2 pi k.
  const auto k_lo = static_cast<long>(std::ceil((first / period) + fit.phase_rad / (2.0 * kPi)));
  const auto k_hi = static_cast<long>(std::floor((last / period) + fit.phase_rad / (2.0 * kPi)));
  if (k_hi < k_lo) throw InsufficientDataError("no fringe peak with both flanking minima inside the scan");
  double peak_x = 0.0, peak_val = -INFINITY;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double xk = (static_cast<double>(k) - fit.phase_rad / (2.0 * kPi)) * period;
    if (fit(xk) > peak_val) peak_val = fit(xk), peak_x = xk;
  }

  const double reach = 0.25 * period;
  auto gather = [&](double target, std::vector<double>& out) {
    for (auto i : nearest(x, target, kExtremumPoints)) {
      if (std::abs(x[i] - target) > reach)
        throw InsufficientDataError("too few samples near the fringe extremum at " + std::to_string(target) + " mm");
      out.push_back(envelope_correction ? y[i] / fit.envelope(x[i]) : y[i]);
    }
  };
  std::vector<double> maxima, minima;
  gather(peak_x, maxima);
  gather(peak_x - 0.5 * period, minima);
  gather(peak_x + 0.5 * period, minima);

  const auto hi = mean_se(maxima);
  const auto lo = mean_se(minima);
  const double sum = hi.mean + lo.mean;
  if (!(sum > 0.0)) throw DegenerateInputError("extrema average to zero");
  const double v = (hi.mean - lo.mean) / sum;
  const double dv_dmax = 2.0 * lo.mean / (sum * sum);
  const double dv_dmin = -2.0 * hi.mean / (sum * sum);
  const double sigma = std::hypot(dv_dmax * hi.se, dv_dmin * lo.se);
  return {delta_l_um, std::clamp(v, 0.0, 1.0), sigma};
}

VisibilityPoint visibility_from_extrema(const FringeTrace& trace, const EnvelopeFit& fit, bool envelope_correction) {
  return visibility_from_extrema(trace.positions_mm, trace.values, fit, trace.delta_l_um, envelope_correction);
}

double line_dispersion(const CoherenceResult& line, std::span<const VisibilityPoint> points) {
  if (points.size() < 3) throw InsufficientDataError("dispersion needs at least 3 points");
  double ss = 0.0;
  for (const auto& pt : points) {
    const double r = pt.visibility - line.at(pt.delta_l_um);
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(points.size() - 2));
}

CoherenceResult fit_visibility_line(std::span<const VisibilityPoint> points) {
  std::set<double> distinct;
  for (const auto& pt : points) distinct.insert(pt.delta_l_um);
  if (distinct.size() < 3) throw InsufficientDataError("visibility regression needs at least 3 distinct delta_L");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& pt : points) mx += pt.delta_l_um, my += pt.visibility;
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& pt : points) {
    sxx += (pt.delta_l_um - mx) * (pt.delta_l_um - mx);
    sxy += (pt.delta_l_um - mx) * (pt.visibility - my);
  }
  CoherenceResult r;
  r.slope_per_um = sxy / sxx;
  r.intercept = my - r.slope_per_um * mx;
  r.n_points = points.size();
  r.dispersion = line_dispersion(r, points);
  if (!(r.slope_per_um < 0.0) || !(r.intercept > kInvE))
    throw NoCrossingError("visibility line never decays to 1/e (slope " + std::to_string(r.slope_per_um) +
                          ", intercept " + std::to_string(r.intercept) + ")");
  r.coherence_length_um = (r.intercept - kInvE) / -r.slope_per_um;
  return r;
}

CurveComparison compare_curves(const CoherenceResult& a, const CoherenceResult& b,
                               std::span<const VisibilityPoint> points_a, std::span<const VisibilityPoint> points_b) {
  CurveComparison c;
  c.dispersion_a = line_dispersion(a, points_a);
  c.dispersion_b = line_dispersion(b, points_b);
  auto range = [](std::span<const VisibilityPoint> pts) {
    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
      return p.delta_l_um < q.delta_l_um;
    });
    return std::pair{lo->delta_l_um, hi->delta_l_um};
  };
  const auto [a_lo, a_hi] = range(points_a);
  const auto [b_lo, b_hi] = range(points_b);
  c.range_lo_um = std::max(a_lo, b_lo);
  c.range_hi_um = std::min(a_hi, b_hi);
  // Mean of (p + q x)^2 over [x1, x2], in closed form.
  const double p = a.intercept - b.intercept, q = a.slope_per_um - b.slope_per_um;
  const double x1 = c.range_lo_um, x2 = c.range_hi_um;
  const double mean_sq =
      x2 > x1 ? p * p + p * q * (x1 + x2) + q * q * (x1 * x1 + x1 * x2 + x2 * x2) / 3.0 : (p + q * x1) * (p + q * x1);
  c.line_gap_rms = std::sqrt(std::max(0.0, mean_sq));
  return c;
}

}  // namespace mzisim
