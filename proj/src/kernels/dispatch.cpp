#include <cstdlib>
#include <string_view>

#include "camseer/kernels.hpp"

namespace camseer::kernels {

#if defined(CAMSEER_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(CAMSEER_HAVE_NEON)
const KernelTable& neon_table();
#endif

std::optional<KernelTable> avx2() {
#if defined(CAMSEER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_table();
#endif
  return std::nullopt;
}

std::optional<KernelTable> neon() {
#if defined(CAMSEER_HAVE_NEON)
  return neon_table();
#else
  return std::nullopt;
#endif
}

namespace {

KernelTable resolve() {
  const char* env = std::getenv("CAMSEER_SIMD");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return scalar();
  if (want == "avx2" || want == "auto") {
    if (auto t = avx2()) return *t;
  }
  if (want == "neon" || want == "auto") {
    if (auto t = neon()) return *t;
  }
  return scalar();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable table = resolve();
  return table;
}

}  // namespace camseer::kernels
