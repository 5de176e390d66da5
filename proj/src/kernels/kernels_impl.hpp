#pragma once

#include "rtmix/kernels.hpp"

#include <cstddef>

namespace rtmix::kernels {

#define RTMIX_KERNEL_DECLS                                                                    \
  void gemm_nn(int m, int n, int k, const double* A, const double* B, double* C);             \
  void gemm_nt(int m, int n, int k, const double* A, const double* B, double* C);             \
  void scale_columns(int m, int n, const double* w, double* A);                               \
  void cubic_reaction(std::size_t n, const double* u, double linear, double* out);            \
  void multiply_add(std::size_t n, const double* s, const double* u, double* out);            \
  double weighted_sq_diff(std::size_t n, const double* w, const double* a, const double* b);  \
  double weighted_abs_pow(std::size_t n, const double* w, const double* a, int p);

namespace scalar {
RTMIX_KERNEL_DECLS
}

#if defined(RTMIX_HAVE_AVX2)
namespace avx2 {
RTMIX_KERNEL_DECLS
}
#endif

#undef RTMIX_KERNEL_DECLS

}  // namespace rtmix::kernels
