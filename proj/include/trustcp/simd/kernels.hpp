#pragma once

// Data-parallel inner loops used by nearest-neighbour search and the pinball
// simplex pricing step.
//
// Every kernel operates on a BlockedRows store: rows are grouped into blocks of
// kLanes, and inside a block the values are laid out dimension-major so that a
// single vector load fetches the same coordinate of kLanes consecutive rows.
// Vector variants therefore parallelise across rows, never across the
// reduction dimension: each lane accumulates its row in ascending coordinate
// order with a separate multiply and add, exactly like the scalar reference.
// Results are bit-identical across ISAs.

#include <cstddef>
#include <span>
#include <string_view>

namespace trustcp::simd {

inline constexpr std::size_t kLanes = 4;

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = sum_d (query[d] - row_i[d])^2 for every padded row slot
  // (n_blocks * kLanes outputs).
  void (*squared_distances)(const double* blocks, std::size_t n_blocks,
                            std::size_t dim, const double* query, double* out);
  // Minimum of squared_distances over the first n_rows rows; +inf if n_rows==0.
  double (*min_squared_distance)(const double* blocks, std::size_t n_rows,
                                 std::size_t dim, const double* query);
  // out[i] = sum_d row_i[d] * weights[d] for every padded row slot.
  void (*dot_rows)(const double* blocks, std::size_t n_blocks, std::size_t dim,
                   const double* weights, double* out);
};

// Kernels for the best ISA supported by the running CPU, unless overridden by
// force_isa() or the TRUSTCP_ISA environment variable (scalar|avx2|neon).
const KernelTable& active_kernels();

// Kernels for a specific ISA; throws ArgumentError if it is not compiled in or
// not supported by the running CPU.
const KernelTable& kernels_for(Isa isa);

bool isa_available(Isa isa);

// Process-wide override, mainly for equivalence tests and benchmarking.
void force_isa(Isa isa);
void reset_isa();

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(TRUSTCP_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(TRUSTCP_HAVE_NEON_KERNELS)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace trustcp::simd
