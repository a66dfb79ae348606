#include "trustcp/trust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trustcp/errors.hpp"
#include "trustcp/scores.hpp"

namespace trustcp {

TrustIndex::TrustIndex(std::vector<simd::BlockedRows> class_points, std::size_t feature_dim,
                       TrustSettings settings)
    : points_(std::move(class_points)), feature_dim_(feature_dim), settings_(settings) {
  if (!(settings_.cap > 0.0) || !std::isfinite(settings_.cap)) {
    throw ArgumentError("trust cap must be a positive finite number");
  }
  for (const auto& p : points_) {
    if (p.size() > 0 && p.dim() != feature_dim_) {
      throw ArgumentError("trust index: class point dimension mismatch");
    }
  }
}

double TrustIndex::nearest_squared_distance(std::span<const double> feature, std::size_t c) const {
  if (feature.size() != feature_dim_) {
    throw DataError("trust query has dimension " + std::to_string(feature.size()) +
                    ", index has " + std::to_string(feature_dim_));
  }
  if (c >= points_.size()) throw ArgumentError("trust query: class index out of range");
  return points_[c].min_squared_distance(feature);
}

double TrustIndex::nearest_other_squared_distance(std::span<const double> feature,
                                                  std::size_t c) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t other = 0; other < points_.size(); ++other) {
    if (other == c || points_[other].size() == 0) continue;
    best = std::min(best, nearest_squared_distance(feature, other));
  }
  return best;
}

double TrustIndex::trust_score(std::span<const double> feature, std::size_t predicted_class) const {
  const double own = nearest_squared_distance(feature, predicted_class);
  if (points_[predicted_class].size() == 0) {
    throw DataError("trust score: class " + std::to_string(predicted_class) +
                    " has no training points");
  }
  const double other = nearest_other_squared_distance(feature, predicted_class);
  if (std::isinf(other)) {
    throw DataError("trust score: no training points outside class " +
                    std::to_string(predicted_class));
  }
  if (own == 0.0) return other > 0.0 ? settings_.cap : 1.0;
  return std::min(std::sqrt(other / own), settings_.cap);
}

double knn_radius(const simd::BlockedRows& points, std::size_t query_index, std::size_t k) {
  if (query_index >= points.size()) throw ArgumentError("knn_radius: query index out of range");
  if (k < 1 || k >= points.size()) {
    throw ArgumentError("knn_radius: k must lie in [1, " + std::to_string(points.size()) + ")");
  }
  auto sq = points.squared_distances(points.row(query_index));
  sq.erase(sq.begin() + static_cast<std::ptrdiff_t>(query_index));
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k - 1), sq.end());
  return std::sqrt(sq[k - 1]);
}

double knn_radius(const std::vector<std::vector<double>>& points, std::size_t query_index,
                  std::size_t k) {
  if (points.empty()) throw ArgumentError("knn_radius: empty point set");
  simd::BlockedRows rows(points.front().size());
  for (const auto& p : points) rows.push_back(p);
  return knn_radius(rows, query_index, k);
}

namespace {

simd::BlockedRows filter_low_density(const simd::BlockedRows& pts, std::size_t cls,
                                     const TrustSettings& settings) {
  const std::size_t n = pts.size();
  if (n < settings.k + 1) {
    throw DataError("class " + std::to_string(cls) + " has " + std::to_string(n) +
                    " training points; density filtering with k=" + std::to_string(settings.k) +
                    " needs at least " + std::to_string(settings.k + 1));
  }
  const auto drop = static_cast<std::size_t>(std::ceil(settings.delta * static_cast<double>(n)));
  if (drop >= n) {
    throw DataError("density filtering would remove every point of class " + std::to_string(cls));
  }
  std::vector<double> radius(n);
  for (std::size_t i = 0; i < n; ++i) radius[i] = knn_radius(pts, i, settings.k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Largest radius first; among equal radii the later point goes first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return radius[a] > radius[b] || (radius[a] == radius[b] && a > b);
  });
  std::vector<bool> keep(n, true);
  for (std::size_t i = 0; i < drop; ++i) keep[order[i]] = false;
  simd::BlockedRows out(pts.dim());
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(pts.row(i));
  }
  return out;
}

}  // namespace

TrustIndex build_trust_index(const LabeledDataset& train, const TrustSettings& settings) {
  if (!(settings.delta >= 0.0 && settings.delta < 1.0)) {
    throw ArgumentError("trust delta must lie in [0, 1)");
  }
  if (settings.delta > 0.0 && settings.k < 1) throw ArgumentError("trust k must be at least 1");
  if (train.empty()) throw DataError("trust index needs a nonempty training set");
  std::vector<simd::BlockedRows> per_class(train.num_classes(),
                                           simd::BlockedRows(train.feature_dim()));
  for (const auto& ex : train.examples()) per_class[ex.label].push_back(ex.features);
  if (settings.delta > 0.0) {
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      if (per_class[c].size() == 0) continue;
      per_class[c] = filter_low_density(per_class[c], c, settings);
    }
  }
  return TrustIndex(std::move(per_class), train.feature_dim(), settings);
}

std::vector<double> trust_all(const TrustIndex& index, const LabeledDataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples()) {
    out.push_back(index.trust_score(ex.features, predicted_class(class_probabilities(ex))));
  }
  return out;
}

}  // namespace trustcp
