#include "trustcp/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trustcp/errors.hpp"
#include "trustcp/trust.hpp"

namespace trustcp {

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "softmax") return ScoreKind::softmax;
  if (name == "aps") return ScoreKind::aps;
  if (name == "raps") return ScoreKind::raps;
  throw ArgumentError("unknown score kind '" + name + "' (expected softmax, aps or raps)");
}

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::softmax: return "softmax";
    case ScoreKind::aps: return "aps";
    case ScoreKind::raps: return "raps";
  }
  return "?";
}

void ScoreFunction::validate() const {
  if (kind != ScoreKind::raps) return;
  if (!(raps_lambda >= 0.0) || !std::isfinite(raps_lambda)) {
    throw ArgumentError("raps_lambda must be a nonnegative finite number");
  }
  if (raps_kreg < 1) throw ArgumentError("raps_kreg must be at least 1");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<double> class_probabilities(const LabeledExample& example) {
  return softmax(example.logits);
}

std::vector<std::size_t> descending_order(std::span<const double> probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return order;
}

std::size_t predicted_class(std::span<const double> probs) {
  // First maximum, consistent with descending_order()[0].
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double confidence(std::span<const double> probs) {
  return *std::max_element(probs.begin(), probs.end());
}

double confidence(const LabeledExample& example) {
  return confidence(class_probabilities(example));
}

namespace {

void check_label(std::span<const double> probs, std::size_t y) {
  if (y >= probs.size()) {
    throw ArgumentError("class index " + std::to_string(y) + " out of range for " +
                        std::to_string(probs.size()) + " classes");
  }
}

}  // namespace

std::size_t rank_of_label(std::span<const double> probs, std::size_t y) {
  check_label(probs, y);
  // Classes ahead of y: strictly larger probability, or equal with lower index.
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > probs[y] || (probs[j] == probs[y] && j < y)) ++ahead;
  }
  return ahead + 1;
}

std::size_t rank_of_label(const LabeledExample& example, std::size_t y) {
  return rank_of_label(class_probabilities(example), y);
}

double score(std::span<const double> probs, std::size_t y, const ScoreFunction& sf) {
  check_label(probs, y);
  if (sf.kind == ScoreKind::softmax) return 1.0 - probs[y];
  const auto order = descending_order(probs);
  double mass = 0.0;
  std::size_t position = 0;
  while (order[position] != y) mass += probs[order[position++]];
  if (sf.kind == ScoreKind::raps) {
    const std::size_t rank = position + 1;
    if (rank > sf.raps_kreg) mass += sf.raps_lambda * static_cast<double>(rank - sf.raps_kreg);
  }
  return mass;
}

double score(const LabeledExample& example, std::size_t y, const ScoreFunction& sf) {
  return score(class_probabilities(example), y, sf);
}

std::vector<double> all_scores(std::span<const double> probs, const ScoreFunction& sf) {
  std::vector<double> out(probs.size());
  if (sf.kind == ScoreKind::softmax) {
    for (std::size_t y = 0; y < probs.size(); ++y) out[y] = 1.0 - probs[y];
    return out;
  }
  const auto order = descending_order(probs);
  double mass = 0.0;
  for (std::size_t position = 0; position < order.size(); ++position) {
    double s = mass;
    const std::size_t rank = position + 1;
    if (sf.kind == ScoreKind::raps && rank > sf.raps_kreg) {
      s += sf.raps_lambda * static_cast<double>(rank - sf.raps_kreg);
    }
    out[order[position]] = s;
    mass += probs[order[position]];
  }
  return out;
}

ScoredCalibration score_calibration(const LabeledDataset& ds, const ScoreFunction& sf,
                                    const TrustIndex& trust_index) {
  sf.validate();
  if (!ds.empty() && ds.feature_dim() != trust_index.feature_dim()) {
    throw DataError("feature dimension " + std::to_string(ds.feature_dim()) +
                    " does not match trust index dimension " +
                    std::to_string(trust_index.feature_dim()));
  }
  ScoredCalibration out;
  const std::size_t n = ds.size();
  out.scores.reserve(n);
  out.conf.reserve(n);
  out.trust.reserve(n);
  out.rank.reserve(n);
  out.predicted.reserve(n);
  for (const auto& ex : ds.examples()) {
    const auto probs = class_probabilities(ex);
    const std::size_t pred = predicted_class(probs);
    out.scores.push_back(score(probs, ex.label, sf));
    out.conf.push_back(probs[pred]);
    out.rank.push_back(rank_of_label(probs, ex.label));
    out.predicted.push_back(pred);
    out.trust.push_back(trust_index.trust_score(ex.features, pred));
  }
  if (ds.has_groups()) {
    std::vector<std::string> groups;
    groups.reserve(n);
    for (const auto& ex : ds.examples()) groups.push_back(ex.group.value_or(""));
    out.group = std::move(groups);
  }
  return out;
}

}  // namespace trustcp
