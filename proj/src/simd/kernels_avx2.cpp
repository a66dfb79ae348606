// AVX2 kernels. Compiled with -mavx2 only (no FMA): one lane per row, each lane
// performs the scalar reference's sub/mul/add sequence in coordinate order.

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "trustcp/simd/kernels.hpp"

namespace trustcp::simd {
namespace {

static_assert(kLanes == 4, "AVX2 kernels assume four double lanes per block");

inline __m256d block_squared_distance(const double* block, std::size_t dim, const double* query) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t d = 0; d < dim; ++d) {
    const __m256d q = _mm256_broadcast_sd(query + d);
    const __m256d x = _mm256_loadu_pd(block + d * kLanes);
    const __m256d diff = _mm256_sub_pd(q, x);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
  }
  return acc;
}

// Four blocks in flight hide the add latency; each lane still sees the scalar
// operation order.
void squared_distances_avx2(const double* blocks, std::size_t n_blocks, std::size_t dim,
                            const double* query, double* out) {
  const std::size_t stride = kLanes * dim;
  std::size_t b = 0;
  for (; b + 4 <= n_blocks; b += 4) {
    const double* p0 = blocks + b * stride;
    __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d q = _mm256_broadcast_sd(query + d);
      const __m256d d0 = _mm256_sub_pd(q, _mm256_loadu_pd(p0 + d * kLanes));
      const __m256d d1 = _mm256_sub_pd(q, _mm256_loadu_pd(p0 + stride + d * kLanes));
      const __m256d d2 = _mm256_sub_pd(q, _mm256_loadu_pd(p0 + 2 * stride + d * kLanes));
      const __m256d d3 = _mm256_sub_pd(q, _mm256_loadu_pd(p0 + 3 * stride + d * kLanes));
      a0 = _mm256_add_pd(a0, _mm256_mul_pd(d0, d0));
      a1 = _mm256_add_pd(a1, _mm256_mul_pd(d1, d1));
      a2 = _mm256_add_pd(a2, _mm256_mul_pd(d2, d2));
      a3 = _mm256_add_pd(a3, _mm256_mul_pd(d3, d3));
    }
    _mm256_storeu_pd(out + b * kLanes, a0);
    _mm256_storeu_pd(out + (b + 1) * kLanes, a1);
    _mm256_storeu_pd(out + (b + 2) * kLanes, a2);
    _mm256_storeu_pd(out + (b + 3) * kLanes, a3);
  }
  for (; b < n_blocks; ++b) {
    _mm256_storeu_pd(out + b * kLanes, block_squared_distance(blocks + b * stride, dim, query));
  }
}

double min_squared_distance_avx2(const double* blocks, std::size_t n_rows, std::size_t dim,
                                 const double* query) {
  const std::size_t full = n_rows / kLanes;
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < full; ++b) {
    best = _mm256_min_pd(best, block_squared_distance(blocks + b * kLanes * dim, dim, query));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, best);
  double result = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  const std::size_t tail = n_rows % kLanes;
  if (tail != 0) {
    _mm256_store_pd(lanes, block_squared_distance(blocks + full * kLanes * dim, dim, query));
    for (std::size_t lane = 0; lane < tail; ++lane) result = std::min(result, lanes[lane]);
  }
  return result;
}

void dot_rows_avx2(const double* blocks, std::size_t n_blocks, std::size_t dim,
                   const double* weights, double* out) {
  const std::size_t stride = kLanes * dim;
  std::size_t b = 0;
  for (; b + 4 <= n_blocks; b += 4) {
    const double* p0 = blocks + b * stride;
    __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d w = _mm256_broadcast_sd(weights + d);
      a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(p0 + d * kLanes), w));
      a1 = _mm256_add_pd(a1, _mm256_mul_pd(_mm256_loadu_pd(p0 + stride + d * kLanes), w));
      a2 = _mm256_add_pd(a2, _mm256_mul_pd(_mm256_loadu_pd(p0 + 2 * stride + d * kLanes), w));
      a3 = _mm256_add_pd(a3, _mm256_mul_pd(_mm256_loadu_pd(p0 + 3 * stride + d * kLanes), w));
    }
    _mm256_storeu_pd(out + b * kLanes, a0);
    _mm256_storeu_pd(out + (b + 1) * kLanes, a1);
    _mm256_storeu_pd(out + (b + 2) * kLanes, a2);
    _mm256_storeu_pd(out + (b + 3) * kLanes, a3);
  }
  for (; b < n_blocks; ++b) {
    const double* block = blocks + b * stride;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d w = _mm256_broadcast_sd(weights + d);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(block + d * kLanes), w));
    }
    _mm256_storeu_pd(out + b * kLanes, acc);
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Kernels{Isa::avx2, &squared_distances_avx2, &min_squared_distance_avx2,
                               &dot_rows_avx2};
}  // namespace detail

}  // namespace trustcp::simd
