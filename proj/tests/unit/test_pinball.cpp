#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trustcp/pinball.hpp"

using namespace trustcp;

namespace {

struct Instance {
  RowMatrix rows;
  std::vector<double> scores;
  oracle::Matrix dense;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t p, bool intercept) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Instance inst;
  inst.rows.resize(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(p);
    for (std::size_t j = 0; j < p; ++j) r[j] = (intercept && j == 0) ? 1.0 : u(rng);
    for (std::size_t j = 0; j < p; ++j) inst.rows(i, j) = r[j];
    inst.dense.push_back(r);
    inst.scores.push_back(u(rng));
  }
  return inst;
}

}  // namespace

TEST(Pinball, LossDefinition) {
  EXPECT_DOUBLE_EQ(pinball_loss(2.0, 0.1), 1.8);
  EXPECT_DOUBLE_EQ(pinball_loss(-2.0, 0.1), 0.2);
  EXPECT_EQ(pinball_loss(0.0, 0.3), 0.0);
}

TEST(Pinball, InterceptOnlyMedian) {
  RowMatrix rows = RowMatrix::Ones(3, 1);
  const std::vector<double> s{1.0, 2.0, 3.0};
  const auto fit = fit_quantile_regression(rows, s, 0.5);
  EXPECT_EQ(fit.beta[0], 2.0);
  EXPECT_DOUBLE_EQ(fit.achieved_loss, (0.5 * 1 + 0.5 * 1) / 3.0);
}

TEST(Pinball, InterceptOnlyUpperQuantile) {
  RowMatrix rows = RowMatrix::Ones(10, 1);
  std::vector<double> s;
  for (int i = 1; i <= 10; ++i) s.push_back(i);
  const auto fit = fit_quantile_regression(rows, s, 0.1);
  EXPECT_EQ(fit.beta[0], 9.0);
  // 1-D scan of the piecewise-linear loss over a fine grid.
  double best = 1e300;
  for (int k = 0; k <= 12000; ++k) {
    double b = k / 1000.0, loss = 0.0;
    for (double v : s) loss += oracle::pinball(v - b, 0.1);
    best = std::min(best, loss / 10.0);
  }
  EXPECT_NEAR(fit.achieved_loss, best, 1e-12);
}

TEST(Pinball, InterceptOnlyEqualsEmpiricalQuantile) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 40;
    const double alpha = 0.05 + 0.9 * u(rng);
    std::vector<double> s(n);
    for (auto& v : s) v = u(rng);
    const auto fit = fit_quantile_regression(RowMatrix::Ones(n, 1), s, alpha);
    const double pos = (1.0 - alpha) * double(n);
    if (std::abs(pos - std::round(pos)) < 1e-9) continue;  // optimum is an interval
    const auto m = static_cast<std::size_t>(std::ceil(pos));
    EXPECT_EQ(fit.beta[0], oracle::order_statistic(s, m)) << "n=" << n << " alpha=" << alpha;
  }
}

TEST(Pinball, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + t % 8, p = 1 + (t / 8) % 3;
    const double alpha = 0.05 + 0.9 * u(rng);
    const auto inst = random_instance(rng, n, p, t % 2 == 0);
    const auto fit = fit_quantile_regression(inst.rows, inst.scores, alpha);
    const double want = oracle::pinball_vertex_min(inst.dense, inst.scores, alpha);
    EXPECT_NEAR(fit.achieved_loss, want, 1e-12);
    EXPECT_NEAR(oracle::pinball_objective(inst.dense, inst.scores, fit.beta, alpha), fit.achieved_loss, 1e-12);
    EXPECT_EQ(fit.rank, oracle::matrix_rank(inst.dense));
    // A vertex interpolates rank(Phi) rows.
    for (std::size_t i : fit.basis_rows) {
      double f = 0.0;
      for (std::size_t j = 0; j < p; ++j) f += inst.dense[i][j] * fit.beta[j];
      EXPECT_NEAR(f, inst.scores[i], 1e-10);
    }
  }
}

TEST(Pinball, RankDeficientDesign) {
  RowMatrix rows(5, 3);
  rows << 1, 2, 2, 1, -1, -1, 1, 0.5, 0.5, 1, 3, 3, 1, 0, 0;
  const std::vector<double> s{0.3, 0.9, 0.1, 0.6, 0.2};
  oracle::Matrix dense(5, std::vector<double>(3));
  for (int i = 0; i < 5; ++i) for (int j = 0; j < 3; ++j) dense[i][j] = rows(i, j);
  const auto fit = fit_quantile_regression(rows, s, 0.2);
  EXPECT_EQ(fit.rank, 2u);
  EXPECT_NEAR(fit.achieved_loss, oracle::pinball_vertex_min(dense, s, 0.2), 1e-12);
}

TEST(Pinball, AugmentMatchesColdRefit) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 5 + t % 30, p = 1 + t % 4;
    const auto inst = random_instance(rng, n, p, true);
    const PinballProblem problem(inst.rows, inst.scores, 0.1);
    std::vector<double> phi(p);
    phi[0] = 1.0;
    for (std::size_t j = 1; j < p; ++j) phi[j] = u(rng);
    const double s = u(rng);
    const auto warm = problem.augment(phi, s, true);
    const auto cold = problem.augment(phi, s, false);
    EXPECT_NEAR(warm.fit.achieved_loss, cold.fit.achieved_loss, 1e-12);
    EXPECT_EQ(warm.included, cold.included);

    RowMatrix rows(n + 1, p);
    rows.topRows(n) = inst.rows;
    for (std::size_t j = 0; j < p; ++j) rows(n, j) = phi[j];
    auto scores = inst.scores;
    scores.push_back(s);
    const auto full = fit_quantile_regression(rows, scores, 0.1);
    EXPECT_NEAR(warm.fit.achieved_loss, full.achieved_loss, 1e-12);
  }
}

TEST(Pinball, AgreesWithLineSearch) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 4 + t % 5, p = 1 + t % 3;
    const auto inst = random_instance(rng, n, p, true);
    const double alpha = 0.1 + 0.8 * u(rng);
    const auto fit = fit_quantile_regression(inst.rows, inst.scores, alpha);
    const auto grid = oracle::pinball_line_search(inst.dense, inst.scores, alpha);
    EXPECT_GE(grid.loss, fit.achieved_loss - 1e-12);
    EXPECT_NEAR(grid.loss, fit.achieved_loss, 1e-6);
  }
}
