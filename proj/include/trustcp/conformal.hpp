#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trustcp/basis.hpp"
#include "trustcp/binning.hpp"
#include "trustcp/dataset.hpp"
#include "trustcp/pinball.hpp"
#include "trustcp/scores.hpp"

namespace trustcp {

struct PredictionSet {
  std::vector<std::size_t> members;  // ascending

  bool contains(std::size_t y) const;
  std::size_t size() const { return members.size(); }
  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

// {y : class_scores[y] <= threshold}
PredictionSet threshold_set(std::span<const double> class_scores, double threshold);

// ceil((n + 1)(1 - alpha)), the 1-based order statistic used as threshold.
std::size_t conformal_rank(std::size_t n, double alpha);

struct StandardCalibrator {
  double qhat = 0.0;  // +inf when conformal_rank(n, alpha) > n
  double alpha = 0.1;
  std::size_t n = 0;
};

StandardCalibrator fit_standard(std::span<const double> scores, double alpha);
PredictionSet predict_standard(const StandardCalibrator& cal, const LabeledExample& example,
                               const ScoreFunction& sf);

struct MondrianCalibrator {
  BinLayout layout;
  std::vector<double> qhat;          // per bin; fallback where the bin had no data
  std::vector<std::size_t> counts;   // calibration points per bin
  double fallback = 0.0;
  double alpha = 0.1;

  double threshold(double conf, double trust) const;
};

// Bins over (Conf, Trust) with the layout fitted on the calibration sample.
MondrianCalibrator fit_mondrian(const ScoredCalibration& sc, const BinScheme& scheme, double alpha);
// Same, with a layout fixed in advance.
MondrianCalibrator fit_mondrian(const ScoredCalibration& sc, BinLayout layout, double alpha);
PredictionSet predict_mondrian(const MondrianCalibrator& cal, const LabeledExample& example,
                               double trust, const ScoreFunction& sf);

// Design matrix with one basis row per calibration example.
RowMatrix basis_rows(const FunctionBasis& basis, const ScoredCalibration& sc,
                     const LabeledDataset& ds);

class ConditionalCalibrator {
 public:
  ConditionalCalibrator(FunctionBasis basis, const RowMatrix& cal_rows,
                        std::vector<double> cal_scores, double alpha);

  const FunctionBasis& basis() const { return basis_; }
  const PinballProblem& problem() const { return problem_; }
  double alpha() const { return problem_.alpha(); }

  // Refits once per candidate class with its score imputed for the test point.
  PredictionSet predict(const Covariates& x, std::span<const double> candidate_scores,
                        bool warm = true) const;
  bool includes(std::span<const double> phi, double candidate_score, bool warm = true) const;

 private:
  FunctionBasis basis_;
  PinballProblem problem_;
};

ConditionalCalibrator fit_conditional(const ScoredCalibration& sc, const LabeledDataset& ds,
                                      FunctionBasis basis, double alpha);

// One-shot form: solves the calibration problem and predicts one point.
PredictionSet conditional_predict_set(const RowMatrix& cal_rows, std::span<const double> cal_scores,
                                      const FunctionBasis& basis, const Covariates& x,
                                      std::span<const double> candidate_scores, double alpha);

// Smallest descending-probability prefix with mass >= 1 - alpha.
PredictionSet oracle_predict_set(std::span<const double> posterior, double alpha);

}  // namespace trustcp
