#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace camseer::signal {

// Second-order IIR section in normalized form (a[0] == 1).
struct FilterCoefficients {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
  double cutoff_hz = 0.0;
  double sample_rate_hz = 0.0;

  // Largest pole modulus of the transfer function.
  double max_pole_modulus() const;
  double dc_gain() const;
  // |H(e^{jw})| of a single pass at the given frequency.
  double magnitude_at(double freq_hz) const;
};

struct Series {
  std::vector<double> values;
  double dt = 0.02;

  std::size_t size() const { return values.size(); }
};

struct NormStats {
  double mean = 0.0;
  double std = 0.0;
  bool degenerate = false;
};

// Odd-extension length used on each side by filtfilt: 3 * max(len(a), len(b)).
inline constexpr std::size_t kFiltfiltPad = 9;
inline constexpr std::size_t kFiltfiltMinLength = 3 * kFiltfiltPad;

// Low-pass 2nd-order Butterworth via the bilinear transform with the cutoff
// pre-warped, so the single-pass gain at cutoff_hz is exactly 1/sqrt(2).
FilterCoefficients design_butterworth2(double cutoff_hz, double sample_rate_hz);

// Single causal pass (transposed direct form II) with the given initial state.
std::vector<double> lfilter(const FilterCoefficients& c, std::span<const double> x, std::array<double, 2> zi);

// Steady-state initial state for a unit step (scale by the first sample).
std::array<double, 2> lfilter_zi(const FilterCoefficients& c);

// Zero-phase filtering. The result is the mean of the forward-backward and
// backward-forward passes, so reversing the input reverses the output
// exactly. Magnitude response is |H|^2 in the interior.
Series filtfilt(const FilterCoefficients& c, const Series& x);
std::vector<double> filtfilt(const FilterCoefficients& c, std::span<const double> x);

// Central differences inside, one-sided at both ends.
Series differentiate(const Series& x);

// Mean and (n-1) standard deviation; degenerate when std < 1e-12 * (1 + |mean|).
NormStats compute_norm_stats(std::span<const double> x);
inline NormStats compute_norm_stats(const Series& x) { return compute_norm_stats(std::span<const double>(x.values)); }

bool is_degenerate(double mean, double std);

// (x - mean) / std, or all zeros for degenerate statistics.
Series zscore(const Series& x, const NormStats& stats);
void zscore_inplace(std::span<double> x, const NormStats& stats);

}  // namespace camseer::signal
