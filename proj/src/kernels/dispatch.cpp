#include "kernels_impl.hpp"

#include "rtmix/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace rtmix::kernels {
namespace {

const KernelSet kScalar{Isa::scalar,          "scalar",
                        scalar::gemm_nn,      scalar::gemm_nt,
                        scalar::scale_columns, scalar::cubic_reaction,
                        scalar::multiply_add, scalar::weighted_sq_diff,
                        scalar::weighted_abs_pow};

#if defined(RTMIX_HAVE_AVX2)
const KernelSet kAvx2{Isa::avx2,          "avx2",
                      avx2::gemm_nn,      avx2::gemm_nt,
                      avx2::scale_columns, avx2::cubic_reaction,
                      avx2::multiply_add, avx2::weighted_sq_diff,
                      avx2::weighted_abs_pow};
#endif

const KernelSet* initial_selection() {
  const char* env = std::getenv("RTMIX_KERNELS");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &kScalar;
  const KernelSet* fast = (avx2_kernels() && cpu_supports_avx2()) ? avx2_kernels() : nullptr;
  if (choice == "avx2" && !fast) return &kScalar;
  return fast ? fast : &kScalar;
}

std::atomic<const KernelSet*>& current() {
  static std::atomic<const KernelSet*> ptr{initial_selection()};
  return ptr;
}

}  // namespace

const KernelSet& scalar_kernels() { return kScalar; }

const KernelSet* avx2_kernels() {
#if defined(RTMIX_HAVE_AVX2)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(RTMIX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelSet& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    current().store(&kScalar, std::memory_order_release);
    return;
  }
  if (!avx2_kernels() || !cpu_supports_avx2()) throw UnsupportedFeature("AVX2 kernels are not available on this CPU/build");
  current().store(avx2_kernels(), std::memory_order_release);
}

}  // namespace rtmix::kernels
