// NEON (aarch64) variants. Advanced SIMD is mandatory on aarch64, so no
// runtime probe is needed once this file is compiled in.

#include "camseer/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace camseer::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_neon(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_neon(w + r * cols, x, cols);
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t_neon(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (v[r] == 0.0) continue;
    axpy_neon(v[r], w + r * cols, y, cols);
  }
}

void ger_neon(double* w, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] == 0.0) continue;
    axpy_neon(u[r], v, w + r * cols, cols);
  }
}

void adam_neon(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1,
               double b2, double eps, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon", dot_neon, gemv_neon, gemv_t_neon, ger_neon, axpy_neon, adam_neon};
  return table;
}

}  // namespace camseer::kernels
