#include "camseer/kernels.hpp"

#include <cmath>

namespace camseer::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_scalar(w + r * cols, x, cols);
}

void gemv_t_scalar(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * vr;
  }
}

void ger_scalar(double* w, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ur * v[c];
  }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam_scalar(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1,
                 double b2, double eps, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar",    dot_scalar, gemv_scalar, gemv_t_scalar,
                                 ger_scalar,  axpy_scalar, adam_scalar};
  return table;
}

}  // namespace camseer::kernels
