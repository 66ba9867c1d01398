#include <cstdlib>
#include <string_view>

#include "smallball/kernels.hpp"

namespace smallball::kernels {

#ifndef SMALLBALL_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#ifndef SMALLBALL_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

bool scalar_forced() {
  const char* env = std::getenv("SMALLBALL_SIMD");
  return env != nullptr && std::string_view(env) == "scalar";
}

const KernelTable& select() {
  if (scalar_forced()) return scalar_table();
#if defined(SMALLBALL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return *avx2_table();
#endif
#if defined(SMALLBALL_HAVE_NEON)
  return *neon_table();
#endif
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

Isa active_isa() { return active().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace smallball::kernels
