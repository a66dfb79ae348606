#include "trustcp/simd/blocked_rows.hpp"

#include <limits>

#include "trustcp/errors.hpp"

namespace trustcp::simd {

BlockedRows BlockedRows::from_row_major(std::span<const double> rows, std::size_t dim) {
  if (dim == 0) throw ArgumentError("BlockedRows: dimension must be positive");
  if (rows.size() % dim != 0) throw ArgumentError("BlockedRows: size is not a multiple of dim");
  BlockedRows out(dim);
  const std::size_t n = rows.size() / dim;
  out.data_.reserve(((n + kLanes - 1) / kLanes) * kLanes * dim);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rows.subspan(i * dim, dim));
  return out;
}

void BlockedRows::push_back(std::span<const double> row) {
  if (row.size() != dim_) throw ArgumentError("BlockedRows: row dimension mismatch");
  if (rows_ % kLanes == 0) data_.resize(data_.size() + kLanes * dim_, 0.0);
  const std::size_t base = (rows_ / kLanes) * kLanes * dim_;
  const std::size_t lane = rows_ % kLanes;
  for (std::size_t d = 0; d < dim_; ++d) data_[base + d * kLanes + lane] = row[d];
  ++rows_;
}

std::vector<double> BlockedRows::row(std::size_t r) const {
  std::vector<double> out(dim_);
  for (std::size_t d = 0; d < dim_; ++d) out[d] = at(r, d);
  return out;
}

std::vector<double> BlockedRows::squared_distances(std::span<const double> query,
                                                   const KernelTable& k) const {
  if (query.size() != dim_) throw ArgumentError("squared_distances: query dimension mismatch");
  std::vector<double> out(padded_size());
  if (rows_ > 0) k.squared_distances(data_.data(), num_blocks(), dim_, query.data(), out.data());
  out.resize(rows_);
  return out;
}

double BlockedRows::min_squared_distance(std::span<const double> query,
                                         const KernelTable& k) const {
  if (query.size() != dim_) throw ArgumentError("min_squared_distance: query dimension mismatch");
  if (rows_ == 0) return std::numeric_limits<double>::infinity();
  return k.min_squared_distance(data_.data(), rows_, dim_, query.data());
}

void BlockedRows::dot(std::span<const double> weights, std::span<double> out,
                      const KernelTable& k) const {
  if (weights.size() != dim_) throw ArgumentError("dot: weight dimension mismatch");
  if (out.size() < padded_size()) throw ArgumentError("dot: output buffer too small");
  if (rows_ > 0) k.dot_rows(data_.data(), num_blocks(), dim_, weights.data(), out.data());
}

}  // namespace trustcp::simd
