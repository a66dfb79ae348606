#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "trustcp/errors.hpp"
#include "trustcp/scores.hpp"
#include "trustcp/synthetic.hpp"
#include "trustcp/trust.hpp"

using namespace trustcp;

namespace {

LabeledDataset points_1d(const std::vector<std::pair<std::size_t, double>>& pts, std::size_t k) {
  std::vector<LabeledExample> ex;
  for (auto [label, x] : pts) {
    std::vector<double> logits(k, 0.0);
    logits[label] = 1.0;
    ex.push_back({label, logits, {x}, std::nullopt});
  }
  return LabeledDataset(ex, k, 1);
}

LabeledDataset random_labeled(std::size_t n, std::size_t k, std::size_t dim, std::uint64_t seed,
                              bool dyadic = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> grid(-64, 64);
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample e;
    e.label = i % k;
    e.logits.assign(k, 0.0);
    for (auto& v : e.logits) v = g(rng);
    for (std::size_t d = 0; d < dim; ++d) {
      e.features.push_back(dyadic ? grid(rng) / 8.0 : g(rng) + 0.7 * double(e.label == d % k));
    }
    ex.push_back(std::move(e));
  }
  return LabeledDataset(ex, k, dim);
}

std::vector<double> scaled(const std::vector<double>& v, double c) {
  auto out = v;
  for (auto& x : out) x *= c;
  return out;
}

LabeledDataset scale_features(const LabeledDataset& ds, double c) {
  auto ex = ds.examples();
  for (auto& e : ex) e.features = scaled(e.features, c);
  return LabeledDataset(ex, ds.num_classes(), ds.feature_dim());
}

}  // namespace

TEST(KnnRadius, Examples) {
  const std::vector<std::vector<double>> pts{{0.0}, {1.0}, {3.0}};
  EXPECT_EQ(knn_radius(pts, 0, 1), 1.0);
  EXPECT_EQ(knn_radius(pts, 0, 2), 3.0);
  EXPECT_THROW(knn_radius(pts, 0, 3), ArgumentError);
  EXPECT_THROW(knn_radius(pts, 0, 0), ArgumentError);
}

TEST(KnnRadius, MatchesSortOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> pts(100, std::vector<double>(5));
  for (auto& p : pts) for (auto& x : p) x = g(rng);
  const auto blocked = [&] {
    simd::BlockedRows b(5);
    for (const auto& p : pts) b.push_back(p);
    return b;
  }();
  for (std::size_t q = 0; q < 100; q += 7) {
    std::vector<double> d;
    for (std::size_t j = 0; j < 100; ++j) if (j != q) d.push_back(std::sqrt(oracle::squared_distance(pts[q], pts[j])));
    std::sort(d.begin(), d.end());
    for (std::size_t k : {1u, 2u, 10u, 99u}) {
      EXPECT_EQ(knn_radius(pts, q, k), d[k - 1]);
      EXPECT_EQ(knn_radius(blocked, q, k), d[k - 1]);
    }
  }
}

TEST(TrustIndex, NoFilteringKeepsClassSets) {
  const auto train = random_labeled(57, 3, 4, 2);
  const auto index = build_trust_index(train);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::vector<double>> want;
    for (const auto& e : train.examples()) if (e.label == c) want.push_back(e.features);
    const auto& got = index.class_points(c);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got.row(i), want[i]);
  }
}

TEST(TrustIndex, FilteringDropsLowDensityPoint) {
  const auto train = points_1d({{0, 0.0}, {0, 0.1}, {0, 0.2}, {0, 10.0}, {1, 5.0}, {1, 5.5}}, 2);
  const auto index = build_trust_index(train, {1, 0.25, 1e12});
  const auto& kept = index.class_points(0);
  ASSERT_EQ(kept.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(kept.at(i, 0), 1.0);
  // ceil(0.25 * 2) = 1 point removed from class 1 as well.
  EXPECT_EQ(index.class_points(1).size(), 1u);
}

TEST(TrustIndex, FilteringRemovesCeilFraction) {
  const auto train = random_labeled(90, 3, 2, 5);
  for (double delta : {0.05, 0.1, 0.33, 0.5}) {
    const auto index = build_trust_index(train, {3, delta, 1e12});
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(index.class_points(c).size(), 30u - static_cast<std::size_t>(std::ceil(delta * 30.0)));
    }
  }
}

TEST(TrustIndex, FilteringErrors) {
  const auto train = points_1d({{0, 0.0}, {0, 0.1}, {1, 5.0}, {1, 5.5}, {1, 6.0}}, 2);
  EXPECT_THROW(build_trust_index(train, {1, 1.0, 1e12}), ArgumentError);
  try {
    build_trust_index(train, {2, 0.1, 1e12});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("class 0"), std::string::npos) << e.what();
  }
}

TEST(TrustScore, HandRatios) {
  const auto index = build_trust_index(points_1d({{0, 0.0}, {1, 2.0}}, 2));
  const std::vector<double> q{0.5};
  EXPECT_DOUBLE_EQ(index.trust_score(q, 0), 3.0);
  EXPECT_DOUBLE_EQ(index.trust_score(q, 1), 1.0 / 3.0);
  EXPECT_EQ(index.trust_score(std::vector<double>{0.0}, 0), 1e12);
  const auto stacked = build_trust_index(points_1d({{0, 1.0}, {1, 1.0}}, 2));
  EXPECT_EQ(stacked.trust_score(std::vector<double>{1.0}, 0), 1.0);
  EXPECT_THROW(index.trust_score(std::vector<double>{0.0, 1.0}, 0), DataError);
  const auto lonely = build_trust_index(points_1d({{0, 0.0}, {0, 1.0}}, 2));
  EXPECT_THROW(lonely.trust_score(q, 0), DataError);
}

TEST(TrustScore, MatchesExhaustiveOracle) {
  const auto train = random_labeled(500, 4, 6, 9);
  const auto queries = random_labeled(200, 4, 6, 10);
  const auto index = build_trust_index(train);
  const auto all = trust_all(index, queries);
  ASSERT_EQ(all.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& f = queries[i].features;
    const std::size_t pred = predicted_class(class_probabilities(queries[i]));
    double same = std::numeric_limits<double>::infinity(), other = same;
    for (const auto& t : train.examples()) {
      const double d = oracle::squared_distance(f, t.features);
      if (t.label == pred) same = std::min(same, d);
      else other = std::min(other, d);
    }
    EXPECT_EQ(index.nearest_squared_distance(f, pred), same);
    EXPECT_EQ(index.nearest_other_squared_distance(f, pred), other);
    EXPECT_EQ(all[i], std::sqrt(other / same));
    EXPECT_GE(all[i], 0.0);
    EXPECT_LE(all[i], 1e12);
  }
  const auto single = trust_all(index, queries.subset({3}));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], all[3]);
}

TEST(TrustScore, ScaleEquivariance) {
  const auto train = random_labeled(300, 3, 5, 11);
  const auto queries = random_labeled(100, 3, 5, 12);
  const auto base = trust_all(build_trust_index(train), queries);
  const auto half = trust_all(build_trust_index(scale_features(train, 0.5)), scale_features(queries, 0.5));
  EXPECT_EQ(base, half);

  const auto dtrain = random_labeled(300, 3, 5, 13, true);
  const auto dqueries = random_labeled(100, 3, 5, 14, true);
  const auto dbase = trust_all(build_trust_index(dtrain), dqueries);
  const auto triple = trust_all(build_trust_index(scale_features(dtrain, 3.0)), scale_features(dqueries, 3.0));
  EXPECT_EQ(dbase, triple);
}
