// Compiled with -mavx2 -mfma; only entered after a runtime CPU check.
// Keep this translation unit free of inline library templates so no AVX
// instructions leak into shared COMDAT symbols.

#include "kernels_impl.hpp"

#include <immintrin.h>

namespace rtmix::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double abs_scalar(double x) { return x < 0.0 ? -x : x; }

inline double pow_scalar(double x, int p) {
  double v = x;
  for (int e = 1; e < p; ++e) v *= x;
  return v;
}

}  // namespace

void gemm_nn(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * k;
    double* c = C + static_cast<std::size_t>(i) * n;
    int j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (int p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(a + p);
        const double* b = B + static_cast<std::size_t>(p) * n + j;
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 4), acc1);
      }
      _mm256_storeu_pd(c + j, acc0);
      _mm256_storeu_pd(c + j + 4, acc1);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int p = 0; p < k; ++p) {
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p), _mm256_loadu_pd(B + static_cast<std::size_t>(p) * n + j), acc);
      }
      _mm256_storeu_pd(c + j, acc);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += a[p] * B[static_cast<std::size_t>(p) * n + j];
      c[j] = s;
    }
  }
}

void gemm_nt(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const double* b = B + static_cast<std::size_t>(j) * k;
      __m256d acc = _mm256_setzero_pd();
      int p = 0;
      for (; p + 4 <= k; p += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc);
      double s = hsum(acc);
      for (; p < k; ++p) s += a[p] * b[p];
      C[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
}

void scale_columns(int m, int n, const double* w, double* A) {
  for (int i = 0; i < m; ++i) {
    double* a = A + static_cast<std::size_t>(i) * n;
    int j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(a + j, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(w + j)));
    for (; j < n; ++j) a[j] *= w[j];
  }
}

void cubic_reaction(std::size_t n, const double* u, double linear, double* out) {
  const __m256d lin = _mm256_set1_pd(linear);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(u + i);
    const __m256d x2 = _mm256_mul_pd(x, x);
    // x * (x^2 - linear)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(x, _mm256_sub_pd(x2, lin)));
  }
  for (; i < n; ++i) out[i] = u[i] * (u[i] * u[i] - linear);
}

void multiply_add(std::size_t n, const double* s, const double* u, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(u + i), _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += s[i] * u[i];
}

double weighted_sq_diff(std::size_t n, const double* w, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), e), e, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double e = a[i] - b[i];
    s += w[i] * e * e;
  }
  return s;
}

double weighted_abs_pow(std::size_t n, const double* w, const double* a, int p) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i));
    __m256d v = x;
    for (int e = 1; e < p; ++e) v = _mm256_mul_pd(v, x);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * pow_scalar(abs_scalar(a[i]), p);
  return s;
}

}  // namespace rtmix::kernels::avx2
