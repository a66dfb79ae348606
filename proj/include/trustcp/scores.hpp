#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustcp/dataset.hpp"

namespace trustcp {

class TrustIndex;

enum class ScoreKind { softmax, aps, raps };

ScoreKind parse_score_kind(const std::string& name);
std::string score_kind_name(ScoreKind kind);

struct ScoreFunction {
  ScoreKind kind = ScoreKind::aps;
  double raps_lambda = 0.01;  // only read for raps
  std::size_t raps_kreg = 5;

  void validate() const;
};

// Per-example calibration record; every vector has one entry per example, in
// dataset order.
struct ScoredCalibration {
  std::vector<double> scores;
  std::vector<double> conf;
  std::vector<double> trust;
  std::vector<std::size_t> rank;
  std::vector<std::size_t> predicted;
  std::optional<std::vector<std::string>> group;

  std::size_t size() const { return scores.size(); }
};

// Row-max-stabilised softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> class_probabilities(const LabeledExample& example);

// Class indices by descending probability; equal probabilities keep ascending
// class order. Every rank and APS prefix sum uses this order.
std::vector<std::size_t> descending_order(std::span<const double> probs);

std::size_t predicted_class(std::span<const double> probs);

double confidence(std::span<const double> probs);
double confidence(const LabeledExample& example);

// 1-based.
std::size_t rank_of_label(std::span<const double> probs, std::size_t y);
std::size_t rank_of_label(const LabeledExample& example, std::size_t y);

double score(std::span<const double> probs, std::size_t y, const ScoreFunction& sf);
double score(const LabeledExample& example, std::size_t y, const ScoreFunction& sf);

// score(probs, y, sf) for every y, bit-identical to the per-class calls.
std::vector<double> all_scores(std::span<const double> probs, const ScoreFunction& sf);

ScoredCalibration score_calibration(const LabeledDataset& ds, const ScoreFunction& sf,
                                    const TrustIndex& trust_index);

}  // namespace trustcp
