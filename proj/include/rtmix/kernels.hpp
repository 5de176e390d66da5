#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops of assembly and norm evaluation. Every kernel has
// a scalar reference implementation; an AVX2/FMA variant is selected at
// runtime when the CPU supports it. All matrices are dense and row-major.

namespace rtmix::kernels {

enum class Isa { scalar, avx2 };

struct KernelSet {
  Isa isa;
  std::string_view name;

  /// C[m x n] = A[m x k] * B[k x n]
  void (*gemm_nn)(int m, int n, int k, const double* A, const double* B, double* C);
  /// C[m x n] = A[m x k] * B[n x k]^T
  void (*gemm_nt)(int m, int n, int k, const double* A, const double* B, double* C);
  /// A[i][j] *= w[j] for an m x n matrix
  void (*scale_columns)(int m, int n, const double* w, double* A);
  /// out[i] = u[i]^3 - linear * u[i]
  void (*cubic_reaction)(std::size_t n, const double* u, double linear, double* out);
  /// out[i] += s[i] * u[i]
  void (*multiply_add)(std::size_t n, const double* s, const double* u, double* out);
  /// sum_i w[i] * (a[i] - b[i])^2
  double (*weighted_sq_diff)(std::size_t n, const double* w, const double* a, const double* b);
  /// sum_i w[i] * |a[i]|^p, integer p >= 1
  double (*weighted_abs_pow)(std::size_t n, const double* w, const double* a, int p);
};

const KernelSet& scalar_kernels();
/// nullptr when the AVX2 variant was not compiled in.
const KernelSet* avx2_kernels();
bool cpu_supports_avx2();

/// Kernel set used by the library. Chosen once from the RTMIX_KERNELS
/// environment variable (scalar | avx2 | auto, default auto).
const KernelSet& active();
/// Overrides the active set; throws UnsupportedFeature when unavailable.
void select(Isa isa);

}  // namespace rtmix::kernels
