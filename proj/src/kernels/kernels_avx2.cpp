// AVX2 + FMA variants. This file is compiled with -mavx2 -mfma; nothing here
// may run before the dispatcher has confirmed CPU support.

#include "camseer/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace camseer::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t r = 0;
  // Four rows share each load of x.
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), xv, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    y[r] += s0;
    y[r + 1] += s1;
    y[r + 2] += s2;
    y[r + 3] += s3;
  }
  for (; r < rows; ++r) y[r] += dot_avx2(w + r * cols, x, cols);
}

void gemv_t_avx2(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    const __m256d v0 = _mm256_set1_pd(v[r]);
    const __m256d v1 = _mm256_set1_pd(v[r + 1]);
    const __m256d v2 = _mm256_set1_pd(v[r + 2]);
    const __m256d v3 = _mm256_set1_pd(v[r + 3]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(y + c);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), v0, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), v1, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), v2, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), v3, acc);
      _mm256_storeu_pd(y + c, acc);
    }
    for (; c < cols; ++c) y[c] += w0[c] * v[r] + w1[c] * v[r + 1] + w2[c] * v[r + 2] + w3[c] * v[r + 3];
  }
  for (; r < rows; ++r) {
    const double* row = w + r * cols;
    const __m256d vr = _mm256_set1_pd(v[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(y + c, _mm256_fmadd_pd(_mm256_loadu_pd(row + c), vr, _mm256_loadu_pd(y + c)));
    for (; c < cols; ++c) y[c] += row[c] * v[r];
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ger_avx2(double* w, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] == 0.0) continue;
    axpy_avx2(u[r], v, w + r * cols, cols);
  }
}

void adam_avx2(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1,
               double b2, double eps, double c1, double c2) {
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d vb1c = _mm256_set1_pd(1.0 - b1);
  const __m256d vb2 = _mm256_set1_pd(b2);
  const __m256d vb2c = _mm256_set1_pd(1.0 - b2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vc1 = _mm256_set1_pd(c1);
  const __m256d vc2 = _mm256_set1_pd(c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vb1c, gv));
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vb2c, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d num = _mm256_mul_pd(vlr, _mm256_mul_pd(mv, vc1));
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vc2)), veps);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_div_pd(num, den)));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", dot_avx2, gemv_avx2, gemv_t_avx2, ger_avx2, axpy_avx2, adam_avx2};
  return table;
}

}  // namespace camseer::kernels
