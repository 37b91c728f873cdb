#pragma once

// Dense double-precision kernels used by the recurrent network inner loops.
//
// Every kernel has a portable scalar reference implementation. Vector
// variants (AVX2+FMA on x86-64, NEON on aarch64) are compiled into separate
// translation units and picked once at startup from the CPU feature bits.
// Setting CAMSEER_SIMD=scalar|avx2|neon overrides the choice.

#include <cstddef>
#include <optional>
#include <string_view>

namespace camseer::kernels {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[r] += sum_c w[r*cols + c] * x[c]
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);

  // y[c] += sum_r w[r*cols + c] * v[r]
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y);

  // w[r*cols + c] += u[r] * v[c]
  void (*ger)(double* w, std::size_t rows, std::size_t cols, const double* u, const double* v);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // Bias-corrected Adam update over a flat parameter vector.
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
  //   p -= lr * (m*c1) / (sqrt(v*c2) + eps)   with c1 = 1/(1-b1^t), c2 = 1/(1-b2^t)
  void (*adam)(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1,
               double b2, double eps, double c1, double c2);
};

const KernelTable& scalar();

// Returns the vector variant only when it was compiled in and the running CPU
// supports it.
std::optional<KernelTable> avx2();
std::optional<KernelTable> neon();

// The table used by the library. Resolved once; thread-safe.
const KernelTable& active();

}  // namespace camseer::kernels
