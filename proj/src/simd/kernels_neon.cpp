// NEON kernels for aarch64. Two float64x2 registers cover one four-row block.
// vmulq/vaddq are used instead of vfmaq to match the scalar rounding sequence.

#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "trustcp/simd/kernels.hpp"

namespace trustcp::simd {
namespace {

static_assert(kLanes == 4, "NEON kernels assume four rows per block");

inline void block_squared_distance(const double* block, std::size_t dim, const double* query,
                                   float64x2_t& lo, float64x2_t& hi) {
  lo = vdupq_n_f64(0.0);
  hi = vdupq_n_f64(0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    const float64x2_t q = vdupq_n_f64(query[d]);
    const float64x2_t dlo = vsubq_f64(q, vld1q_f64(block + d * kLanes));
    const float64x2_t dhi = vsubq_f64(q, vld1q_f64(block + d * kLanes + 2));
    lo = vaddq_f64(lo, vmulq_f64(dlo, dlo));
    hi = vaddq_f64(hi, vmulq_f64(dhi, dhi));
  }
}

void squared_distances_neon(const double* blocks, std::size_t n_blocks, std::size_t dim,
                            const double* query, double* out) {
  for (std::size_t b = 0; b < n_blocks; ++b) {
    float64x2_t lo, hi;
    block_squared_distance(blocks + b * kLanes * dim, dim, query, lo, hi);
    vst1q_f64(out + b * kLanes, lo);
    vst1q_f64(out + b * kLanes + 2, hi);
  }
}

double min_squared_distance_neon(const double* blocks, std::size_t n_rows, std::size_t dim,
                                 const double* query) {
  double result = std::numeric_limits<double>::infinity();
  const std::size_t n_blocks = (n_rows + kLanes - 1) / kLanes;
  double lanes[kLanes];
  for (std::size_t b = 0; b < n_blocks; ++b) {
    float64x2_t lo, hi;
    block_squared_distance(blocks + b * kLanes * dim, dim, query, lo, hi);
    vst1q_f64(lanes, lo);
    vst1q_f64(lanes + 2, hi);
    const std::size_t valid = std::min<std::size_t>(kLanes, n_rows - b * kLanes);
    for (std::size_t lane = 0; lane < valid; ++lane) result = std::min(result, lanes[lane]);
  }
  return result;
}

void dot_rows_neon(const double* blocks, std::size_t n_blocks, std::size_t dim,
                   const double* weights, double* out) {
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double* block = blocks + b * kLanes * dim;
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    for (std::size_t d = 0; d < dim; ++d) {
      const float64x2_t w = vdupq_n_f64(weights[d]);
      lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(block + d * kLanes), w));
      hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(block + d * kLanes + 2), w));
    }
    vst1q_f64(out + b * kLanes, lo);
    vst1q_f64(out + b * kLanes + 2, hi);
  }
}

}  // namespace

namespace detail {
const KernelTable kNeonKernels{Isa::neon, &squared_distances_neon, &min_squared_distance_neon,
                               &dot_rows_neon};
}  // namespace detail

}  // namespace trustcp::simd
