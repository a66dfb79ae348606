#include "trustcp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trustcp/errors.hpp"

namespace trustcp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
}

}  // namespace

bool PredictionSet::contains(std::size_t y) const {
  return std::binary_search(members.begin(), members.end(), y);
}

PredictionSet threshold_set(std::span<const double> class_scores, double threshold) {
  PredictionSet set;
  for (std::size_t y = 0; y < class_scores.size(); ++y) {
    if (class_scores[y] <= threshold) set.members.push_back(y);
  }
  return set;
}

std::size_t conformal_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  // The small slack keeps exact products such as 100 * 0.9 from rounding up.
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9));
}

StandardCalibrator fit_standard(std::span<const double> scores, double alpha) {
  check_alpha(alpha);
  if (scores.empty()) throw ArgumentError("fit_standard: no calibration scores");
  StandardCalibrator cal;
  cal.alpha = alpha;
  cal.n = scores.size();
  const std::size_t m = conformal_rank(cal.n, alpha);
  if (m > cal.n) {
    cal.qhat = std::numeric_limits<double>::infinity();
    return cal;
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m - 1), sorted.end());
  cal.qhat = sorted[m - 1];
  return cal;
}

PredictionSet predict_standard(const StandardCalibrator& cal, const LabeledExample& example,
                               const ScoreFunction& sf) {
  return threshold_set(all_scores(class_probabilities(example), sf), cal.qhat);
}

double MondrianCalibrator::threshold(double conf, double trust) const {
  return qhat[layout.bin_of(conf, trust)];
}

MondrianCalibrator fit_mondrian(const ScoredCalibration& sc, const BinScheme& scheme, double alpha) {
  return fit_mondrian(sc, BinLayout::fit(sc.conf, sc.trust, scheme), alpha);
}

MondrianCalibrator fit_mondrian(const ScoredCalibration& sc, BinLayout layout, double alpha) {
  check_alpha(alpha);
  MondrianCalibrator cal;
  cal.alpha = alpha;
  cal.fallback = fit_standard(sc.scores, alpha).qhat;
  cal.layout = std::move(layout);
  const std::size_t nb = cal.layout.num_bins();
  std::vector<std::vector<double>> per_bin(nb);
  for (std::size_t i = 0; i < sc.size(); ++i) {
    per_bin[cal.layout.bin_of(sc.conf[i], sc.trust[i])].push_back(sc.scores[i]);
  }
  cal.qhat.resize(nb);
  cal.counts.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    cal.counts[b] = per_bin[b].size();
    cal.qhat[b] = per_bin[b].empty() ? cal.fallback : fit_standard(per_bin[b], alpha).qhat;
  }
  return cal;
}

PredictionSet predict_mondrian(const MondrianCalibrator& cal, const LabeledExample& example,
                               double trust, const ScoreFunction& sf) {
  const auto probs = class_probabilities(example);
  return threshold_set(all_scores(probs, sf), cal.threshold(confidence(probs), trust));
}

RowMatrix basis_rows(const FunctionBasis& basis, const ScoredCalibration& sc,
                     const LabeledDataset& ds) {
  if (ds.size() != sc.size()) throw ArgumentError("basis_rows: dataset and scores differ in size");
  const std::size_t p = basis.dimension();
  RowMatrix rows(static_cast<Eigen::Index>(sc.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const Covariates x{sc.conf[i], sc.trust[i], ds[i].features};
    basis.evaluate(x, std::span<double>(rows.row(static_cast<Eigen::Index>(i)).data(), p));
  }
  return rows;
}

ConditionalCalibrator::ConditionalCalibrator(FunctionBasis basis, const RowMatrix& cal_rows,
                                             std::vector<double> cal_scores, double alpha)
    : basis_(std::move(basis)), problem_(cal_rows, std::move(cal_scores), alpha) {
  if (static_cast<std::size_t>(cal_rows.cols()) != basis_.dimension()) {
    throw ArgumentError("calibration rows do not match the basis dimension");
  }
}

bool ConditionalCalibrator::includes(std::span<const double> phi, double candidate_score,
                                     bool warm) const {
  return problem_.augment(phi, candidate_score, warm).included;
}

PredictionSet ConditionalCalibrator::predict(const Covariates& x,
                                             std::span<const double> candidate_scores,
                                             bool warm) const {
  const auto phi = basis_.evaluate(x);
  PredictionSet set;
  for (std::size_t y = 0; y < candidate_scores.size(); ++y) {
    if (includes(phi, candidate_scores[y], warm)) set.members.push_back(y);
  }
  return set;
}

ConditionalCalibrator fit_conditional(const ScoredCalibration& sc, const LabeledDataset& ds,
                                      FunctionBasis basis, double alpha) {
  RowMatrix rows = basis_rows(basis, sc, ds);
  return ConditionalCalibrator(std::move(basis), rows, sc.scores, alpha);
}

PredictionSet conditional_predict_set(const RowMatrix& cal_rows, std::span<const double> cal_scores,
                                      const FunctionBasis& basis, const Covariates& x,
                                      std::span<const double> candidate_scores, double alpha) {
  ConditionalCalibrator cal(basis, cal_rows,
                            std::vector<double>(cal_scores.begin(), cal_scores.end()), alpha);
  return cal.predict(x, candidate_scores);
}

PredictionSet oracle_predict_set(std::span<const double> posterior, double alpha) {
  check_alpha(alpha);
  double total = 0.0;
  for (double p : posterior) total += p;
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("oracle posterior must sum to 1");
  const auto order = descending_order(posterior);
  PredictionSet set;
  double mass = 0.0;
  for (std::size_t y : order) {
    set.members.push_back(y);
    mass += posterior[y];
    // Rounding slack: ten masses of 0.1 must reach 0.9 after nine terms.
    if (mass >= 1.0 - alpha - 1e-12) break;
  }
  std::sort(set.members.begin(), set.members.end());
  return set;
}

}  // namespace trustcp
