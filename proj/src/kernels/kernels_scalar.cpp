#include "kernels_impl.hpp"

#include <cmath>

namespace rtmix::kernels::scalar {

void gemm_nn(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    double* c = C + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) c[j] = 0.0;
    for (int p = 0; p < k; ++p) {
      const double a = A[static_cast<std::size_t>(i) * k + p];
      const double* b = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) c[j] += a * b[j];
    }
  }
}

void gemm_nt(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const double* b = B + static_cast<std::size_t>(j) * k;
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += a[p] * b[p];
      C[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
}

void scale_columns(int m, int n, const double* w, double* A) {
  for (int i = 0; i < m; ++i) {
    double* a = A + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) a[j] *= w[j];
  }
}

void cubic_reaction(std::size_t n, const double* u, double linear, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i] * u[i] * u[i] - linear * u[i];
}

void multiply_add(std::size_t n, const double* s, const double* u, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += s[i] * u[i];
}

double weighted_sq_diff(std::size_t n, const double* w, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = a[i] - b[i];
    s += w[i] * e * e;
  }
  return s;
}

double weighted_abs_pow(std::size_t n, const double* w, const double* a, int p) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::fabs(a[i]);
    double v = x;
    for (int e = 1; e < p; ++e) v *= x;
    s += w[i] * v;
  }
  return s;
}

}  // namespace rtmix::kernels::scalar
