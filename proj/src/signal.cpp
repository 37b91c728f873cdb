#include "camseer/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "camseer/error.hpp"

namespace camseer::signal {

double FilterCoefficients::max_pole_modulus() const {
  // z^2 + a1 z + a2 = 0
  const std::complex<double> disc = std::sqrt(std::complex<double>(a[1] * a[1] - 4.0 * a[2], 0.0));
  const auto p1 = (-a[1] + disc) / 2.0;
  const auto p2 = (-a[1] - disc) / 2.0;
  return std::max(std::abs(p1), std::abs(p2));
}

double FilterCoefficients::dc_gain() const { return (b[0] + b[1] + b[2]) / (a[0] + a[1] + a[2]); }

double FilterCoefficients::magnitude_at(double freq_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b[0] + b[1] * z1 + b[2] * z2) / (a[0] + a[1] * z1 + a[2] * z2));
}

FilterCoefficients design_butterworth2(double cutoff_hz, double sample_rate_hz) {
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), ErrorKind::InvalidParameter,
          "sample rate must be positive");
  require(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0, ErrorKind::InvalidParameter,
          "cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, Nyquist)");

  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);

  FilterCoefficients c;
  c.b = {k2 * norm, 2.0 * k2 * norm, k2 * norm};
  c.a = {1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - std::numbers::sqrt2 * k + k2) * norm};
  c.cutoff_hz = cutoff_hz;
  c.sample_rate_hz = sample_rate_hz;
  return c;
}

std::array<double, 2> lfilter_zi(const FilterCoefficients& c) {
  // Solve (I - A^T) zi = b[1:] - a[1:] * b[0] for the 2x2 companion system.
  const double r0 = c.b[1] - c.a[1] * c.b[0];
  const double r1 = c.b[2] - c.a[2] * c.b[0];
  const double z0 = (r0 + r1) / (1.0 + c.a[1] + c.a[2]);
  return {z0, r1 - c.a[2] * z0};
}

std::vector<double> lfilter(const FilterCoefficients& c, std::span<const double> x, std::array<double, 2> zi) {
  std::vector<double> y(x.size());
  double z0 = zi[0];
  double z1 = zi[1];
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double xn = x[n];
    const double yn = c.b[0] * xn + z0;
    z0 = c.b[1] * xn - c.a[1] * yn + z1;
    z1 = c.b[2] * xn - c.a[2] * yn;
    y[n] = yn;
  }
  return y;
}

namespace {

std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  return ext;
}

// One forward pass followed by one backward pass over the padded signal.
std::vector<double> forward_backward(const FilterCoefficients& c, std::span<const double> ext) {
  const auto zi = lfilter_zi(c);
  auto y = lfilter(c, ext, {zi[0] * ext.front(), zi[1] * ext.front()});
  std::reverse(y.begin(), y.end());
  auto z = lfilter(c, y, {zi[0] * y.front(), zi[1] * y.front()});
  std::reverse(z.begin(), z.end());
  return z;
}

}  // namespace

std::vector<double> filtfilt(const FilterCoefficients& c, std::span<const double> x) {
  require(x.size() >= kFiltfiltMinLength, ErrorKind::TooShortInput,
          "filtfilt needs at least " + std::to_string(kFiltfiltMinLength) + " samples, got " +
              std::to_string(x.size()));
  const std::size_t pad = kFiltfiltPad;
  const std::size_t n = x.size();

  const auto ext = odd_extend(x, pad);
  const auto fb = forward_backward(c, ext);

  std::vector<double> rev(ext.rbegin(), ext.rend());
  auto bf = forward_backward(c, rev);
  std::reverse(bf.begin(), bf.end());

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (fb[pad + i] + bf[pad + i]);
  return out;
}

Series filtfilt(const FilterCoefficients& c, const Series& x) {
  return Series{filtfilt(c, std::span<const double>(x.values)), x.dt};
}

Series differentiate(const Series& x) {
  const std::size_t n = x.size();
  require(n >= 2, ErrorKind::TooShortInput, "differentiate needs at least 2 samples");
  require(x.dt > 0.0, ErrorKind::InvalidParameter, "dt must be positive");
  const auto& v = x.values;
  Series out{std::vector<double>(n), x.dt};
  out.values[0] = (v[1] - v[0]) / x.dt;
  out.values[n - 1] = (v[n - 1] - v[n - 2]) / x.dt;
  for (std::size_t k = 1; k + 1 < n; ++k) out.values[k] = (v[k + 1] - v[k - 1]) / (2.0 * x.dt);
  return out;
}

bool is_degenerate(double mean, double std) { return std < 1e-12 * (1.0 + std::abs(mean)); }

NormStats compute_norm_stats(std::span<const double> x) {
  require(x.size() >= 2, ErrorKind::TooShortInput, "normalization statistics need at least 2 samples");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return {mean, sd, is_degenerate(mean, sd)};
}

void zscore_inplace(std::span<double> x, const NormStats& stats) {
  if (stats.degenerate) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  for (double& v : x) v = (v - stats.mean) / stats.std;
}

Series zscore(const Series& x, const NormStats& stats) {
  Series out = x;
  zscore_inplace(out.values, stats);
  return out;
}

}  // namespace camseer::signal
