#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "trustcp/conformal.hpp"
#include "trustcp/errors.hpp"

using namespace trustcp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const ScoreFunction kAps{ScoreKind::aps};
const ScoreFunction kSoftmax{ScoreKind::softmax};

LabeledExample random_example(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> g(0.0, 1.5);
  LabeledExample e;
  e.logits.resize(k);
  for (auto& v : e.logits) v = g(rng);
  e.features = {g(rng), g(rng)};
  e.label = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
  return e;
}

PredictionSet brute_set(const LabeledExample& e, double q, const ScoreFunction& sf) {
  PredictionSet s;
  for (std::size_t y = 0; y < e.logits.size(); ++y) if (score(e, y, sf) <= q) s.members.push_back(y);
  return s;
}

ScoredCalibration random_scored(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoredCalibration sc;
  for (std::size_t i = 0; i < n; ++i) {
    const double conf = 0.2 + 0.8 * u(rng);
    sc.conf.push_back(conf);
    sc.trust.push_back(3.0 * u(rng));
    sc.scores.push_back(u(rng) * (1.2 - conf));
    sc.rank.push_back(1);
    sc.predicted.push_back(0);
  }
  return sc;
}

}  // namespace

TEST(Standard, OrderStatisticExamples) {
  std::vector<double> s;
  for (int i = 1; i <= 9; ++i) s.push_back(i / 10.0);
  const auto cal = fit_standard(s, 0.1);
  EXPECT_EQ(conformal_rank(9, 0.1), 9u);
  EXPECT_EQ(cal.qhat, 0.9);
  EXPECT_EQ(fit_standard(std::vector<double>{1, 2, 3, 4, 5}, 0.1).qhat, kInf);
  EXPECT_EQ(conformal_rank(5, 0.1), 6u);
  EXPECT_EQ(conformal_rank(99, 0.1), 90u);
  std::vector<double> big(99);
  std::iota(big.begin(), big.end(), 0.0);
  std::reverse(big.begin(), big.end());
  EXPECT_EQ(fit_standard(big, 0.1).qhat, 89.0);
  EXPECT_THROW(fit_standard(std::vector<double>{}, 0.1), ArgumentError);
  EXPECT_THROW(fit_standard(s, 0.0), ArgumentError);
}

TEST(Standard, MatchesOrderStatisticOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + t % 60;
    const double alpha = 0.01 + 0.98 * u(rng);
    std::vector<double> s(n);
    for (auto& v : s) v = std::floor(u(rng) * 20.0) / 20.0;
    const auto m = static_cast<std::size_t>(std::ceil((double(n) + 1.0) * (1.0 - alpha) - 1e-9));
    const double want = m > n ? kInf : oracle::order_statistic(s, m);
    EXPECT_EQ(fit_standard(s, alpha).qhat, want);
  }
}

TEST(Standard, PredictExamples) {
  std::mt19937_64 rng(2);
  const auto e = random_example(rng, 6);
  EXPECT_EQ(predict_standard({kInf, 0.1, 10}, e, kAps).size(), 6u);
  EXPECT_EQ(predict_standard({0.0, 0.1, 10}, e, kAps).members,
            (std::vector<std::size_t>{predicted_class(class_probabilities(e))}));
  for (int t = 0; t < 200; ++t) {
    const auto ex = random_example(rng, 2 + t % 8);
    const double q = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (const auto* sf : {&kAps, &kSoftmax}) {
      EXPECT_EQ(predict_standard({q, 0.1, 10}, ex, *sf), brute_set(ex, q, *sf));
    }
  }
}

TEST(Mondrian, PerBinThresholdsMatchOracle) {
  std::mt19937_64 rng(3);
  const auto sc = random_scored(rng, 700);
  const BinScheme scheme{5, 3, SecondAxis::trust, std::nullopt};
  const auto cal = fit_mondrian(sc, scheme, 0.1);
  std::vector<std::vector<double>> per_bin(scheme.num_bins());
  for (std::size_t i = 0; i < sc.size(); ++i) per_bin[cal.layout.bin_of(sc.conf[i], sc.trust[i])].push_back(sc.scores[i]);
  // Fitted layout bins match the equal-count assignment of the same sample.
  EXPECT_EQ(assign_bins(sc.conf, sc.trust, scheme), [&] {
    std::vector<std::size_t> b;
    for (std::size_t i = 0; i < sc.size(); ++i) b.push_back(cal.layout.bin_of(sc.conf[i], sc.trust[i]));
    return b;
  }());
  for (std::size_t b = 0; b < per_bin.size(); ++b) {
    EXPECT_EQ(cal.counts[b], per_bin[b].size());
    if (per_bin[b].empty()) {
      EXPECT_EQ(cal.qhat[b], cal.fallback);
      continue;
    }
    const std::size_t n = per_bin[b].size();
    const auto m = static_cast<std::size_t>(std::ceil((double(n) + 1.0) * 0.9 - 1e-9));
    EXPECT_EQ(cal.qhat[b], m > n ? kInf : oracle::order_statistic(per_bin[b], m)) << "bin " << b;
  }
  EXPECT_EQ(cal.fallback, fit_standard(sc.scores, 0.1).qhat);
}

TEST(Mondrian, SingleBinReducesToStandard) {
  std::mt19937_64 rng(4);
  const auto sc = random_scored(rng, 300);
  const auto cal = fit_mondrian(sc, BinScheme{1, 1, SecondAxis::trust, std::nullopt}, 0.1);
  const auto std_cal = fit_standard(sc.scores, 0.1);
  ASSERT_EQ(cal.qhat.size(), 1u);
  EXPECT_EQ(cal.qhat[0], std_cal.qhat);
  for (int t = 0; t < 100; ++t) {
    const auto e = random_example(rng, 5);
    EXPECT_EQ(predict_mondrian(cal, e, 0.7, kAps), predict_standard(std_cal, e, kAps));
  }
}

TEST(Mondrian, SmallBinSaturates) {
  ScoredCalibration sc;
  for (int i = 0; i < 5; ++i) {
    sc.scores.push_back(0.1 * i);
    sc.conf.push_back(0.95);
    sc.trust.push_back(1.0);
    sc.rank.push_back(1);
    sc.predicted.push_back(0);
  }
  const auto cal = fit_mondrian(sc, BinScheme{2, 1, SecondAxis::trust, std::nullopt}, 0.1);
  EXPECT_EQ(cal.threshold(0.95, 1.0), kInf);
  std::mt19937_64 rng(5);
  const LabeledExample e{0, {5.0, 0.0, 0.0, 0.0}, {0.0}, std::nullopt};
  EXPECT_EQ(predict_mondrian(cal, e, 1.0, kAps).size(), 4u);
  // Empty Conf bin [0, 0.5) falls back to the global threshold.
  EXPECT_EQ(cal.threshold(0.2, 1.0), cal.fallback);
}

TEST(Mondrian, PredictMatchesBruteForce) {
  std::mt19937_64 rng(6);
  const auto sc = random_scored(rng, 500);
  const auto cal = fit_mondrian(sc, BinScheme{4, 2, SecondAxis::trust, std::nullopt}, 0.1);
  for (int t = 0; t < 200; ++t) {
    const auto e = random_example(rng, 6);
    const double trust = 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double q = cal.qhat[cal.layout.bin_of(confidence(e), trust)];
    EXPECT_EQ(predict_mondrian(cal, e, trust, kSoftmax), brute_set(e, q, kSoftmax));
  }
}

TEST(Conditional, ConstantBasisMatchesStandard) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto basis = FunctionBasis::polynomial(0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 20 + t * 3;
    std::vector<double> cal(n);
    for (auto& v : cal) v = u(rng);
    const RowMatrix rows = RowMatrix::Ones(n, 1);
    std::vector<double> cand(8);
    for (auto& v : cand) v = u(rng);
    const auto got = conditional_predict_set(rows, cal, basis, {0.5, 1.0, {}}, cand, 0.1);
    EXPECT_EQ(got, threshold_set(cand, fit_standard(cal, 0.1).qhat)) << "instance " << t;
  }
}

TEST(Conditional, ConstantBasisIncludesZeroScore) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 10 + t;
    std::vector<double> cal(n);
    for (auto& v : cal) v = u(rng);
    const ConditionalCalibrator c(FunctionBasis::polynomial(0), RowMatrix::Ones(n, 1), cal, 0.1);
    EXPECT_TRUE(c.includes(std::vector<double>{1.0}, 0.0));
  }
}

TEST(Conditional, InclusionIsDownwardClosed) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto basis = FunctionBasis::polynomial(2);
  for (int t = 0; t < 30; ++t) {
    const auto sc = random_scored(rng, 60);
    RowMatrix rows(60, basis.dimension());
    for (std::size_t i = 0; i < 60; ++i) {
      const auto v = basis.evaluate({sc.conf[i], sc.trust[i], {}});
      for (std::size_t j = 0; j < v.size(); ++j) rows(i, j) = v[j];
    }
    const ConditionalCalibrator c(basis, rows, sc.scores, 0.1);
    const auto phi = basis.evaluate({0.2 + 0.8 * u(rng), 3.0 * u(rng), {}});
    bool seen_excluded = false;
    for (int k = 0; k <= 40; ++k) {
      const bool in = c.includes(phi, k / 40.0);
      if (seen_excluded) {
        EXPECT_FALSE(in) << "score " << k / 40.0;
      }
      if (!in) seen_excluded = true;
    }
  }
}

TEST(Conditional, WarmAndColdAgree) {
  std::mt19937_64 rng(10);
  const auto basis = FunctionBasis::polynomial(3);
  const auto sc = random_scored(rng, 200);
  RowMatrix rows(200, basis.dimension());
  for (std::size_t i = 0; i < 200; ++i) {
    const auto v = basis.evaluate({sc.conf[i], sc.trust[i], {}});
    for (std::size_t j = 0; j < v.size(); ++j) rows(i, j) = v[j];
  }
  const ConditionalCalibrator c(basis, rows, sc.scores, 0.1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const Covariates x{0.2 + 0.8 * u(rng), 3.0 * u(rng), {}};
    std::vector<double> cand(5);
    for (auto& v : cand) v = u(rng);
    EXPECT_EQ(c.predict(x, cand, true), c.predict(x, cand, false));
  }
}

TEST(Conditional, ToyInstanceMatchesLineSearchRefit) {
  // K = 3 candidates, n = 6 calibration points, basis {1, conf}.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto basis = FunctionBasis::polynomial(1);
  std::size_t checked = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 6;
    oracle::Matrix dense;
    RowMatrix rows(n, 3);
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = basis.evaluate({u(rng), 2.0 * u(rng), {}});
      dense.push_back(v);
      for (std::size_t j = 0; j < 3; ++j) rows(i, j) = v[j];
      scores.push_back(u(rng));
    }
    const Covariates x{u(rng), 2.0 * u(rng), {}};
    const auto phi = basis.evaluate(x);
    std::vector<double> cand{u(rng), u(rng), u(rng)};
    const auto got = conditional_predict_set(rows, scores, basis, x, cand, 0.3);
    for (std::size_t y = 0; y < 3; ++y) {
      auto aug_rows = dense;
      aug_rows.push_back(phi);
      auto aug_scores = scores;
      aug_scores.push_back(cand[y]);
      const auto grid = oracle::pinball_line_search(aug_rows, aug_scores, 0.3);
      double fitted = 0.0;
      for (std::size_t j = 0; j < 3; ++j) fitted += phi[j] * grid.beta[j];
      // The imputed row often lies on the optimal fit, which then passes
      // through it exactly: included.
      const bool want = cand[y] <= fitted + 1e-7;
      EXPECT_EQ(got.contains(y), want) << "instance " << t << " class " << y;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 120u);
}

TEST(Oracle, PrefixExamples) {
  EXPECT_EQ(oracle_predict_set(std::vector<double>{0.95, 0.03, 0.02}, 0.1).members, (std::vector<std::size_t>{0}));
  EXPECT_EQ(oracle_predict_set(std::vector<double>{0.5, 0.3, 0.2}, 0.1).size(), 3u);
  EXPECT_EQ(oracle_predict_set(std::vector<double>(10, 0.1), 0.1).size(), 9u);
  EXPECT_EQ(oracle_predict_set(std::vector<double>{0.2, 0.5, 0.3}, 0.4).members, (std::vector<std::size_t>{1, 2}));
}

TEST(PredictionSetType, ThresholdSetIsSortedSubset) {
  const std::vector<double> s{0.5, 0.1, 0.9, 0.1};
  EXPECT_EQ(threshold_set(s, 0.5).members, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_TRUE(threshold_set(s, -1.0).members.empty());
  EXPECT_TRUE(threshold_set(s, 0.1).contains(3));
  EXPECT_FALSE(threshold_set(s, 0.1).contains(0));
}
