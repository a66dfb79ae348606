// Scalar reference kernels. Vector variants must reproduce these bit for bit.

#include <limits>

#include "trustcp/simd/kernels.hpp"

namespace trustcp::simd {
namespace {

void squared_distances_scalar(const double* blocks, std::size_t n_blocks, std::size_t dim,
                              const double* query, double* out) {
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double* block = blocks + b * kLanes * dim;
    for (std::size_t lane = 0; lane < kLanes; ++lane) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = query[d] - block[d * kLanes + lane];
        acc = acc + diff * diff;
      }
      out[b * kLanes + lane] = acc;
    }
  }
}

double min_squared_distance_scalar(const double* blocks, std::size_t n_rows, std::size_t dim,
                                   const double* query) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* block = blocks + (r / kLanes) * kLanes * dim;
    const std::size_t lane = r % kLanes;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = query[d] - block[d * kLanes + lane];
      acc = acc + diff * diff;
    }
    if (acc < best) best = acc;
  }
  return best;
}

void dot_rows_scalar(const double* blocks, std::size_t n_blocks, std::size_t dim,
                     const double* weights, double* out) {
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double* block = blocks + b * kLanes * dim;
    for (std::size_t lane = 0; lane < kLanes; ++lane) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) acc = acc + block[d * kLanes + lane] * weights[d];
      out[b * kLanes + lane] = acc;
    }
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels{Isa::scalar, &squared_distances_scalar,
                                 &min_squared_distance_scalar, &dot_rows_scalar};
}  // namespace detail

}  // namespace trustcp::simd
