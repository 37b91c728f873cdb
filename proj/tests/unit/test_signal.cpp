#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "camseer/error.hpp"
#include "camseer/signal.hpp"

using namespace camseer;
using namespace camseer::signal;
using std::numbers::pi;

namespace {

Series sine(double freq, double seconds, double fs, double amp = 1.0) {
  Series s;
  s.dt = 1.0 / fs;
  const auto n = static_cast<std::size_t>(seconds * fs);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(amp * std::sin(2 * pi * freq * static_cast<double>(i) / fs));
  return s;
}

double rms(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i] * v[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

// |H| of the analog prototype evaluated at the pre-warped frequency.
double analytic_gain(double f, double fc, double fs) {
  const double r = std::tan(pi * f / fs) / std::tan(pi * fc / fs);
  return 1.0 / std::sqrt(1.0 + r * r * r * r);
}

double response(const FilterCoefficients& c, double f) {
  const std::complex<double> z = std::polar(1.0, -2 * pi * f / c.sample_rate_hz);
  const auto num = c.b[0] + c.b[1] * z + c.b[2] * z * z;
  const auto den = c.a[0] + c.a[1] * z + c.a[2] * z * z;
  return std::abs(num / den);
}

void expect_kind(ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Butterworth, CoefficientsMatchBilinearClosedForm) {
  for (double fc : {1.0, 5.0, 8.0, 12.5, 20.0}) {
    const auto c = design_butterworth2(fc, 50.0);
    const double K = std::tan(pi * fc / 50.0);
    const double norm = 1.0 / (1.0 + std::sqrt(2.0) * K + K * K);
    EXPECT_EQ(c.a[0], 1.0);
    EXPECT_NEAR(c.b[0], K * K * norm, 1e-14);
    EXPECT_NEAR(c.b[1], 2 * K * K * norm, 1e-14);
    EXPECT_NEAR(c.b[2], K * K * norm, 1e-14);
    EXPECT_NEAR(c.a[1], 2 * (K * K - 1) * norm, 1e-14);
    EXPECT_NEAR(c.a[2], (1 - std::sqrt(2.0) * K + K * K) * norm, 1e-14);
  }
}

TEST(Butterworth, GainAtCutoffIsHalfPower) {
  const auto c = design_butterworth2(5.0, 50.0);
  EXPECT_NEAR(response(c, 5.0), analytic_gain(5.0, 5.0, 50.0), 1e-12);
  EXPECT_NEAR(response(c, 5.0), 0.7071, 1e-3);
  EXPECT_NEAR(c.magnitude_at(5.0), response(c, 5.0), 1e-12);
  for (double f : {0.5, 2.0, 10.0, 20.0}) EXPECT_NEAR(response(c, f), analytic_gain(f, 5.0, 50.0), 1e-12) << f;
}

TEST(Butterworth, UnitDcGain) {
  const auto c = design_butterworth2(8.0, 50.0);
  const double dc = (c.b[0] + c.b[1] + c.b[2]) / (c.a[0] + c.a[1] + c.a[2]);
  EXPECT_NEAR(dc, 1.0, 1e-9);
  EXPECT_NEAR(c.dc_gain(), 1.0, 1e-9);
  EXPECT_LT(c.max_pole_modulus(), 1.0);
}

TEST(Butterworth, PolesInsideUnitCircleAcrossCutoffs) {
  for (double ratio = 0.01; ratio < 0.49; ratio += 0.01) {
    const auto c = design_butterworth2(ratio * 50.0, 50.0);
    const std::complex<double> disc = std::sqrt(std::complex<double>(c.a[1] * c.a[1] - 4 * c.a[2]));
    const double p1 = std::abs((-c.a[1] + disc) / 2.0), p2 = std::abs((-c.a[1] - disc) / 2.0);
    EXPECT_LT(std::max(p1, p2), 1.0) << ratio;
    EXPECT_NEAR(c.max_pole_modulus(), std::max(p1, p2), 1e-12);
  }
}

TEST(Butterworth, RejectsCutoffOutsideOpenBand) {
  expect_kind(ErrorKind::InvalidParameter, [] { design_butterworth2(25.0, 50.0); });
  expect_kind(ErrorKind::InvalidParameter, [] { design_butterworth2(0.0, 50.0); });
  expect_kind(ErrorKind::InvalidParameter, [] { design_butterworth2(-1.0, 50.0); });
  expect_kind(ErrorKind::InvalidParameter, [] { design_butterworth2(30.0, 50.0); });
}

TEST(Lfilter, MatchesDirectDifferenceEquation) {
  const auto c = design_butterworth2(5.0, 50.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x(200);
  for (auto& v : x) v = n(rng);
  const auto y = lfilter(c, x, {0.0, 0.0});
  std::vector<double> ref(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    double s = c.b[0] * x[k];
    if (k >= 1) s += c.b[1] * x[k - 1] - c.a[1] * ref[k - 1];
    if (k >= 2) s += c.b[2] * x[k - 2] - c.a[2] * ref[k - 2];
    ref[k] = s;
  }
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(y[k], ref[k], 1e-12);
}

TEST(Lfilter, SteadyStateInitialConditionsHoldAStep) {
  const auto c = design_butterworth2(5.0, 50.0);
  const auto zi = lfilter_zi(c);
  std::vector<double> ones(50, 1.0);
  for (double v : lfilter(c, ones, zi)) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Filtfilt, OneHertzSineHasZeroLagAndFullAmplitude) {
  const auto c = design_butterworth2(5.0, 50.0);
  const auto x = sine(1.0, 10.0, 50.0);
  const auto y = filtfilt(c, x);
  ASSERT_EQ(y.size(), x.size());
  const std::size_t edge = 50, n = x.size();
  int best_lag = 999;
  double best = -1e300;
  for (int lag = -10; lag <= 10; ++lag) {
    double s = 0.0;
    for (std::size_t i = edge; i < n - edge; ++i) s += x.values[i] * y.values[static_cast<std::size_t>(static_cast<int>(i) + lag)];
    if (s > best) best = s, best_lag = lag;
  }
  EXPECT_EQ(best_lag, 0);
  EXPECT_GE(rms(y.values, edge, n - edge) / rms(x.values, edge, n - edge), 0.98);
}

TEST(Filtfilt, ConstantIsPreserved) {
  const auto c = design_butterworth2(5.0, 50.0);
  Series x{std::vector<double>(100, 3.7), 0.02};
  for (double v : filtfilt(c, x).values) EXPECT_NEAR(v, 3.7, 1e-9);
}

TEST(Filtfilt, TwentyHertzAttenuatedByMoreThanFortyDecibels) {
  const auto c = design_butterworth2(5.0, 50.0);
  const auto x = sine(20.0, 10.0, 50.0);
  const auto y = filtfilt(c, x);
  const double ratio = rms(y.values, 50, x.size() - 50) / rms(x.values, 50, x.size() - 50);
  EXPECT_LT(ratio, 0.01);
  // Two passes: the interior ratio is the single-pass gain squared.
  EXPECT_NEAR(ratio, std::pow(analytic_gain(20.0, 5.0, 50.0), 2), 2e-4);
}

TEST(Filtfilt, TimeReversalSymmetry) {
  const auto c = design_butterworth2(5.0, 50.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 1);
  for (std::size_t len : {27u, 28u, 40u, 101u, 500u}) {
    std::vector<double> x(len);
    for (auto& v : x) v = n(rng);
    auto rev = x;
    std::reverse(rev.begin(), rev.end());
    auto y = filtfilt(c, x);
    const auto yr = filtfilt(c, rev);
    std::reverse(y.begin(), y.end());
    for (std::size_t i = 0; i < len; ++i) EXPECT_NEAR(y[i], yr[i], 1e-9);
  }
}

TEST(Filtfilt, PreservesLengthAndRejectsShortInput) {
  const auto c = design_butterworth2(8.0, 50.0);
  for (std::size_t len = kFiltfiltMinLength; len < 80; ++len)
    EXPECT_EQ(filtfilt(c, std::vector<double>(len, 1.0)).size(), len);
  expect_kind(ErrorKind::TooShortInput, [&] { filtfilt(c, std::vector<double>(kFiltfiltMinLength - 1, 1.0)); });
  EXPECT_EQ(kFiltfiltPad, 9u);
}

TEST(Differentiate, LinearRampAndConstant) {
  const auto v = differentiate(Series{{0, 1, 2, 3}, 0.02});
  ASSERT_EQ(v.size(), 4u);
  for (double d : v.values) EXPECT_NEAR(d, 50.0, 1e-9);
  for (double d : differentiate(Series{std::vector<double>(7, 2.5), 0.02}).values) EXPECT_EQ(d, 0.0);
}

TEST(Differentiate, SineMatchesAnalyticDerivative) {
  Series x;
  x.dt = 0.02;
  for (int i = 0; i < 500; ++i) x.values.push_back(std::sin(2 * pi * i * x.dt));
  const auto v = differentiate(x);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double d = 2 * pi * std::cos(2 * pi * static_cast<double>(i) * x.dt);
    err += (v.values[i] - d) * (v.values[i] - d);
    ref += d * d;
  }
  EXPECT_LT(std::sqrt(err / ref), 0.005);
}

TEST(Differentiate, OneSidedEndsAndShortInput) {
  const auto v = differentiate(Series{{1, 4, 9, 16}, 0.5});
  EXPECT_DOUBLE_EQ(v.values[0], 6.0);
  EXPECT_DOUBLE_EQ(v.values[1], 8.0);
  EXPECT_DOUBLE_EQ(v.values[2], 12.0);
  EXPECT_DOUBLE_EQ(v.values[3], 14.0);
  expect_kind(ErrorKind::TooShortInput, [] { differentiate(Series{{1.0}, 0.02}); });
}

TEST(Differentiate, RoundTripsCumulativeIntegral) {
  const double dt = 1e-3;
  std::vector<double> v, x{0.0};
  for (int i = 0; i < 4000; ++i) v.push_back(std::sin(2 * pi * 0.1 * i * dt) + 0.3 * i * dt);
  for (std::size_t i = 1; i < v.size(); ++i) x.push_back(x.back() + dt * 0.5 * (v[i - 1] + v[i]));
  const auto d = differentiate(Series{x, dt});
  for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_NEAR(d.values[i], v[i], 1e-6);
}

TEST(NormStats, HandExamples) {
  auto s = compute_norm_stats(std::vector<double>{0, 0, 0, 0});
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_TRUE(s.degenerate);

  s = compute_norm_stats(std::vector<double>{1, 3});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.std, std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(s.degenerate);

  s = compute_norm_stats(std::vector<double>{-1, 1, -1, 1});
  EXPECT_NEAR(s.mean, 0.0, 1e-15);
  EXPECT_NEAR(s.std, 1.1547, 1e-4);

  expect_kind(ErrorKind::TooShortInput, [] { compute_norm_stats(std::vector<double>{1.0}); });
}

TEST(NormStats, DegeneracyToleranceScalesWithMean) {
  EXPECT_TRUE(is_degenerate(1e6, 1e-7));
  EXPECT_FALSE(is_degenerate(1e6, 1e-5));
  EXPECT_TRUE(is_degenerate(0.0, 5e-13));
  EXPECT_FALSE(is_degenerate(0.0, 2e-12));
}

TEST(Zscore, HandExamples) {
  const auto z = zscore(Series{{1, 2, 3}, 0.02}, NormStats{2.0, 1.0, false});
  EXPECT_EQ(z.values, (std::vector<double>{-1, 0, 1}));

  const Series c{{5, 5, 5}, 0.02};
  const auto s = compute_norm_stats(c);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(zscore(c, s).values, (std::vector<double>{0, 0, 0}));
}

TEST(Zscore, OwnStatisticsGiveUnitMoments) {
  std::mt19937_64 rng(5);
  for (std::size_t len : {2u, 3u, 10u, 257u, 5000u}) {
    std::normal_distribution<double> n(3.0 * static_cast<double>(len % 7), 0.1 + static_cast<double>(len % 5));
    Series x;
    for (std::size_t i = 0; i < len; ++i) x.values.push_back(n(rng));
    const auto z = zscore(x, compute_norm_stats(x));
    const auto m = compute_norm_stats(z);
    EXPECT_NEAR(m.mean, 0.0, 1e-10) << len;
    EXPECT_NEAR(m.std, 1.0, 1e-10) << len;
  }
}
