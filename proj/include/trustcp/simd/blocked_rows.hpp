#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trustcp/simd/kernels.hpp"

namespace trustcp::simd {

// Row store in the blocked, dimension-major layout consumed by the kernels.
// Padding slots in the last block hold zeros.
class BlockedRows {
 public:
  BlockedRows() = default;
  explicit BlockedRows(std::size_t dim) : dim_(dim) {}

  // rows: row-major n x dim.
  static BlockedRows from_row_major(std::span<const double> rows, std::size_t dim);

  void push_back(std::span<const double> row);

  std::size_t size() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_blocks() const { return (rows_ + kLanes - 1) / kLanes; }
  std::size_t padded_size() const { return num_blocks() * kLanes; }
  const double* data() const { return data_.data(); }

  double at(std::size_t row, std::size_t d) const {
    return data_[(row / kLanes) * kLanes * dim_ + d * kLanes + row % kLanes];
  }
  std::vector<double> row(std::size_t row) const;

  // Squared distance from query to every row; returns exactly size() values.
  std::vector<double> squared_distances(std::span<const double> query,
                                        const KernelTable& k = active_kernels()) const;
  double min_squared_distance(std::span<const double> query,
                              const KernelTable& k = active_kernels()) const;
  // Row-wise dot products with weights. out must hold padded_size() values;
  // entries past size() are padding.
  void dot(std::span<const double> weights, std::span<double> out,
           const KernelTable& k = active_kernels()) const;

 private:
  std::size_t dim_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> data_;
};

}  // namespace trustcp::simd
