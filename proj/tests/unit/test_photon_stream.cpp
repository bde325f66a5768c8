#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mzisim/errors.hpp"
#include "mzisim/photon_stream.hpp"

using namespace mzisim;

namespace {

std::vector<double> times_of(const PhotonStream& s) {
  std::vector<double> t;
  for (const auto& e : s) t.push_back(e.t);
  return t;
}

std::vector<double> bin_histogram(const std::vector<double>& t, double bin, int n_bins) {
  std::vector<double> c(n_bins, 0.0);
  for (double x : t) {
    const auto k = static_cast<int>(x / bin);
    if (k >= 0 && k < n_bins) c[k] += 1.0;
  }
  return c;
}

double fano(const std::vector<double>& c) {
  const double m = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
  double v = 0.0;
  for (double x : c) v += (x - m) * (x - m);
  return v / (c.size() - 1) / m;
}

// Brute-force P(n | n >= 2) moments by direct summation of Poisson terms.
std::pair<double, double> conditional_moments(double mu) {
  double p = std::exp(-mu), z = 0.0, s1 = 0.0, s2 = 0.0;
  for (int n = 0; n < 200; ++n) {
    if (n > 0) p *= mu / n;
    if (n < 2) continue;
    z += p;
    s1 += n * p;
    s2 += double(n) * n * p;
  }
  const double mean = s1 / z;
  return {mean, s2 / z - mean * mean};
}

}  // namespace

const SpectralModel kGauss = calibrate_gaussian(268, 405);

TEST(GenerateStream, ZeroRateEmpty) { EXPECT_TRUE(generate_stream({0.0, 1.0, 1}, kGauss).empty()); }

TEST(GenerateStream, CountWithinFiveSigma) {
  const auto s = generate_stream({2e6, 10.0, 42}, reference_cw_table());
  EXPECT_LT(std::abs(double(s.size()) - 2e7), 5.0 * std::sqrt(2e7));
}

TEST(GenerateStream, DeterministicOrderedAndTagged) {
  const auto a = generate_stream({1e5, 0.5, 9}, kGauss);
  const auto b = generate_stream({1e5, 0.5, 9}, kGauss);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.t < y.t; }));
  for (const auto& e : a) {
    ASSERT_GE(e.t, 0.0);
    ASSERT_LT(e.t, 0.5);
    ASSERT_TRUE(e.has_frequency());
  }
  for (const auto& e : generate_stream({1e4, 0.5, 9}, reference_sp_table())) ASSERT_FALSE(e.has_frequency());
  EXPECT_NE(a, generate_stream({1e5, 0.5, 10}, kGauss));
}

TEST(GenerateStream, ExponentialInterArrivals) {
  const auto t = times_of(generate_stream({1e6, 1.0, 4}, reference_cw_table()));
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double d = t[i] - t[i - 1];
    s += d;
    s2 += d * d;
  }
  const double n = double(t.size() - 1);
  const double mean = s / n, cv2 = (s2 / n - mean * mean) / (mean * mean);
  EXPECT_NEAR(mean, 1e-6, 5e-6 / std::sqrt(n));
  EXPECT_NEAR(cv2, 1.0, 0.01);  // exponential: coefficient of variation 1
}

TEST(GenerateStream, PoissonFanoOfBinnedCounts) {
  const auto t = times_of(generate_stream({1e6, 1.0, 8}, reference_cw_table()));
  EXPECT_NEAR(fano(bin_histogram(t, 1e-4, 10000)), 1.0, 0.05);
}

TEST(GenerateStream, RejectsInvalidParams) {
  EXPECT_THROW(generate_stream({-1.0, 1.0, 1}, kGauss), ValidationError);
  EXPECT_THROW(generate_stream({1.0, 0.0, 1}, kGauss), ValidationError);
}

TEST(Attenuate, IdentityAndZero) {
  const auto s = generate_stream({1e5, 0.1, 2}, kGauss);
  EXPECT_EQ(attenuate(s, 1.0, 3), s);
  EXPECT_TRUE(attenuate(s, 0.0, 3).empty());
  EXPECT_THROW(attenuate(s, 1.5, 3), ValidationError);
  EXPECT_THROW(attenuate(s, -0.1, 3), ValidationError);
}

TEST(Attenuate, ThinnedRate) {
  const auto s = generate_stream({2e8, 0.05, 5}, reference_cw_table());
  const auto a = attenuate(s, 0.01, 6);
  const double expect = 2e6 * 0.05;
  EXPECT_LT(std::abs(double(a.size()) - expect), 5.0 * std::sqrt(expect));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.t < y.t; }));
}

TEST(Attenuate, ThinningMatchesDirectStreamChiSquared) {
  // 200 kcps thinned by 0.25 vs a direct 50 kcps stream: bin-count histograms
  // compared by a two-sample chi-squared test at the 1% level.
  const auto thinned = times_of(attenuate(generate_stream({2e5, 2.0, 21}, reference_cw_table()), 0.25, 22));
  const auto direct = times_of(generate_stream({5e4, 2.0, 23}, reference_cw_table()));
  const auto ca = bin_histogram(thinned, 1e-4, 20000), cb = bin_histogram(direct, 1e-4, 20000);
  std::vector<double> ha(15, 0.0), hb(15, 0.0);
  for (double c : ca) ha[std::min<int>(int(c), 14)] += 1;
  for (double c : cb) hb[std::min<int>(int(c), 14)] += 1;
  double chi2 = 0.0;
  int dof = -1;
  for (int k = 0; k < 15; ++k) {
    if (ha[k] + hb[k] < 10) continue;
    chi2 += (ha[k] - hb[k]) * (ha[k] - hb[k]) / (ha[k] + hb[k]);
    ++dof;
  }
  ASSERT_GE(dof, 5);
  // 1% upper critical values of chi-squared for dof 5..12.
  const double crit[] = {15.09, 16.81, 18.48, 20.09, 21.67, 23.21, 24.72, 26.22};
  EXPECT_LT(chi2, crit[std::min(dof, 12) - 5]);
}

TEST(MeanPhotonNumber, Examples) {
  EXPECT_NEAR(mean_photon_number(2e6, 22e-9), 0.044, 1e-15);
  EXPECT_EQ(mean_photon_number(0.0, 22e-9), 0.0);
  EXPECT_DOUBLE_EQ(mean_photon_number(1e6, 1e-6), 1.0);
}

TEST(BunchingStats, ConstructedCluster) {
  const std::vector<double> t{0.0, 10e-9, 1e-3};
  const auto b = bunching_stats(t, 22e-9);
  EXPECT_EQ(b.n_singles, 1u);
  EXPECT_EQ(b.n_doubles, 1u);
  EXPECT_EQ(b.n_higher, 0u);
  EXPECT_DOUBLE_EQ(b.doubles_fraction, 0.5);
}

TEST(BunchingStats, TriplesCountedAsHigher) {
  const std::vector<double> t{0.0, 1e-9, 2e-9, 1.0};
  const auto b = bunching_stats(t, 6e-9);
  EXPECT_EQ(b.n_higher, 1u);
  EXPECT_EQ(b.n_singles, 1u);
}

TEST(BunchingStats, TranslationInvariant) {
  auto t = times_of(generate_stream({2e6, 0.05, 31}, reference_cw_table()));
  const auto a = bunching_stats(t, 6e-9);
  for (auto& x : t) x += 123.0;
  const auto b = bunching_stats(t, 6e-9);
  // Large offsets round the gaps; allow a handful of boundary flips.
  EXPECT_NEAR(double(a.n_doubles), double(b.n_doubles), 3.0);
  EXPECT_NEAR(double(a.n_singles), double(b.n_singles), 6.0);
  for (auto& x : t) x -= 123.0;
}

TEST(BunchingStats, PoissonPairRate) {
  // Consecutive-gap clustering of a rate-R Poisson stream: a cluster is
  // exactly a pair with probability (1 - e^{-Rw})^1 e^{-Rw} per preceding
  // singleton-start, so doubles per second ~ R e^{-Rw}(1 - e^{-Rw}) e^{-Rw}.
  const double r = 2e6, w = 6e-9;
  const auto t = times_of(generate_stream({r, 1.0, 77}, reference_cw_table()));
  const auto b = bunching_stats(t, w);
  const double q = std::exp(-r * w);
  const double clusters = r * q;  // cluster starts per second
  const double doubles = clusters * (1.0 - q) * q;
  EXPECT_NEAR(double(b.n_doubles), doubles, 5.0 * std::sqrt(doubles));
  EXPECT_NEAR(double(b.n_doubles) / 1000.0, r * r * w / 1000.0, 1.0);  // ~ 24 per ms
  const double higher = clusters * (1.0 - q) * (1.0 - q);
  EXPECT_NEAR(double(b.n_higher), higher, 5.0 * std::sqrt(higher));
  EXPECT_NEAR(double(b.n_higher) / double(b.n_doubles), 0.012, 0.003);
}

TEST(ConditionalNumber, FanoAtMeasuredMu) {
  const auto d = conditional_number_distribution(0.044);
  const auto [mean, var] = conditional_moments(0.044);
  EXPECT_NEAR(d.mean, mean, 1e-12);
  EXPECT_NEAR(d.variance, var, 1e-12);
  EXPECT_NEAR(d.fano, var / mean, 1e-10);
  EXPECT_NEAR(d.fano, 0.007, 0.0005);
  EXPECT_LT(d.fano, 1.0);
  double sum = 0.0;
  for (double p : d.probabilities) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ConditionalNumber, SmallMuLimit) {
  const auto d = conditional_number_distribution(1e-6);
  EXPECT_NEAR(d.probabilities.at(0), 1.0, 1e-6);
  EXPECT_LT(d.fano, 1e-6);
}

TEST(ConditionalNumber, SubPoissonSweep) {
  for (double mu = 0.001; mu <= 0.1; mu += 0.001) {
    const auto d = conditional_number_distribution(mu);
    const auto [mean, var] = conditional_moments(mu);
    ASSERT_LT(d.fano, 1.0);
    ASSERT_NEAR(d.fano, var / mean, 1e-9);
  }
}

TEST(ConditionalNumber, RejectsNonPositive) {
  EXPECT_THROW(conditional_number_distribution(0.0), ValidationError);
  EXPECT_THROW(conditional_number_distribution(-1.0), ValidationError);
}

TEST(StreamCsv, Header) {
  std::ostringstream o;
  write_stream_csv(o, generate_stream({10, 1.0, 1}, reference_cw_table()));
  EXPECT_EQ(o.str().substr(0, o.str().find('\n')), "t_seconds,nu_hz");
}
