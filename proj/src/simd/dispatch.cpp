#include <atomic>
#include <cstdlib>
#include <string>

#include "trustcp/errors.hpp"
#include "trustcp/simd/kernels.hpp"

namespace trustcp::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(TRUSTCP_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(TRUSTCP_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::kScalarKernels;
    case Isa::avx2:
#if defined(TRUSTCP_HAVE_AVX2_KERNELS)
      return &detail::kAvx2Kernels;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(TRUSTCP_HAVE_NEON_KERNELS)
      return &detail::kNeonKernels;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Isa parse_isa(const std::string& name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  throw ArgumentError("unknown ISA '" + name + "'");
}

const KernelTable* detect() {
  if (const char* env = std::getenv("TRUSTCP_ISA"); env != nullptr && *env != '\0') {
    return &kernels_for(parse_isa(env));
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (isa_available(isa)) return table_for(isa);
  }
  return &detail::kScalarKernels;
}

std::atomic<const KernelTable*> g_forced{nullptr};

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return table_for(isa) != nullptr && cpu_supports(isa); }

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw ArgumentError("ISA '" + std::string(isa_name(isa)) + "' is not available on this machine");
  }
  return *table_for(isa);
}

const KernelTable& active_kernels() {
  if (const KernelTable* forced = g_forced.load(std::memory_order_acquire)) return *forced;
  static const KernelTable* detected = detect();
  return *detected;
}

void force_isa(Isa isa) { g_forced.store(&kernels_for(isa), std::memory_order_release); }

void reset_isa() { g_forced.store(nullptr, std::memory_order_release); }

}  // namespace trustcp::simd
