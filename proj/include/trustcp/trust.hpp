#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trustcp/dataset.hpp"
#include "trustcp/simd/blocked_rows.hpp"

namespace trustcp {

struct TrustSettings {
  std::size_t k = 10;      // neighbour count for the density filter
  double delta = 0.0;      // fraction of each class dropped as low density
  double cap = 1e12;       // returned when the query sits on a predicted-class point
};

// Per-class training points, optionally density filtered. Classes absent from
// the training data hold no points.
class TrustIndex {
 public:
  TrustIndex(std::vector<simd::BlockedRows> class_points, std::size_t feature_dim,
             TrustSettings settings);

  std::size_t num_classes() const { return points_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const TrustSettings& settings() const { return settings_; }
  const simd::BlockedRows& class_points(std::size_t c) const { return points_.at(c); }

  // Squared distance to the nearest stored point of class c (+inf if empty).
  double nearest_squared_distance(std::span<const double> feature, std::size_t c) const;
  // Squared distance to the nearest stored point of any class other than c.
  double nearest_other_squared_distance(std::span<const double> feature, std::size_t c) const;

  // d_other / d_predicted, evaluated as sqrt(d_other^2 / d_predicted^2).
  double trust_score(std::span<const double> feature, std::size_t predicted_class) const;

 private:
  std::vector<simd::BlockedRows> points_;
  std::size_t feature_dim_;
  TrustSettings settings_;
};

TrustIndex build_trust_index(const LabeledDataset& train, const TrustSettings& settings = {});

// Distance from points[query_index] to its k-th nearest other point.
double knn_radius(const std::vector<std::vector<double>>& points, std::size_t query_index,
                  std::size_t k);
double knn_radius(const simd::BlockedRows& points, std::size_t query_index, std::size_t k);

// Trust at each example's argmax class, in dataset order.
std::vector<double> trust_all(const TrustIndex& index, const LabeledDataset& ds);

}  // namespace trustcp
