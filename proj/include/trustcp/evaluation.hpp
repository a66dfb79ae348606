#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustcp/conformal.hpp"
#include "trustcp/simd/blocked_rows.hpp"

namespace trustcp {

// 1 where the true label is in the prediction set.
using CoverFlags = std::vector<std::uint8_t>;

CoverFlags covered_flags(const std::vector<PredictionSet>& sets, std::span<const std::size_t> labels);

struct BinStat {
  std::size_t bin_id = 0;
  std::size_t count = 0;
  double coverage = 0.0;
};

// Nonempty bins in ascending id order.
std::vector<BinStat> bin_table(std::span<const std::uint8_t> cover, std::span<const std::size_t> bins);

// Mean over nonempty bins of |coverage - (1 - alpha)|, in percentage points.
double covgap(std::span<const std::uint8_t> cover, std::span<const std::size_t> bins, double alpha);
double class_covgap(std::span<const std::uint8_t> cover, std::span<const std::size_t> labels,
                    double alpha);

struct MarginalStats {
  double coverage = 0.0;
  double avg_size = 0.0;
};
MarginalStats marginal_and_size(const std::vector<PredictionSet>& sets,
                                std::span<const std::size_t> labels);

double worst_group_coverage(std::span<const std::uint8_t> cover,
                            std::span<const std::string> groups);

struct CoverageReport {
  double marginal_coverage = 0.0;
  double avg_set_size = 0.0;
  double covgap_conf_trust = 0.0;
  double covgap_conf_rank = 0.0;
  double covgap_class = 0.0;
  std::vector<BinStat> bins_conf_trust;
  std::vector<BinStat> bins_conf_rank;
  std::vector<BinStat> bins_class;
  std::optional<double> worst_group_coverage;
};

// Per-example inputs of a report, all in evaluation order.
struct EvaluationInputs {
  std::vector<PredictionSet> sets;
  std::vector<std::size_t> labels;
  std::vector<double> conf;
  std::vector<double> trust;
  std::vector<std::size_t> rank;
  std::optional<std::vector<std::string>> groups;
};

CoverageReport coverage_report(const EvaluationInputs& in, const BinScheme& scheme, double alpha);

// ---- Euclidean-ball audit -------------------------------------------------

// Balls of the given radius around n_centers test points drawn without
// replacement; balls with fewer than min_neighbors members (center included)
// are discarded. Throws DataError when every ball is discarded.
double euclidean_ball_covgap(const simd::BlockedRows& features, std::span<const std::uint8_t> cover,
                             double radius, std::size_t n_centers, std::size_t min_neighbors,
                             double alpha, std::uint64_t seed);

struct RadiusGrid {
  double r_min = 0.0;
  double r_max = 0.0;
  std::vector<double> grid;
};

// r_min / r_max are the minimum and 90th percentile of distances over
// n_pairs random pairs of distinct points.
RadiusGrid radius_grid(const simd::BlockedRows& features, std::size_t n_points, std::uint64_t seed,
                       std::size_t n_pairs = 10000);

struct AuditSettings {
  std::size_t trials = 100;
  std::size_t centers = 100;
  std::size_t min_neighbors = 10;
};

struct AuditPoint {
  double radius = 0.0;
  double covgap = 0.0;  // mean over trials with at least one kept ball; NaN if none
  double stderr_ = 0.0;
  std::size_t valid_trials = 0;
};

// Each (radius, trial) pair draws its own centers from a seed derived from
// (seed, radius index, trial), so results do not depend on evaluation order.
std::vector<AuditPoint> ball_audit_curve(const simd::BlockedRows& features,
                                         std::span<const std::uint8_t> cover,
                                         std::span<const double> radii, double alpha,
                                         const AuditSettings& settings, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// ---- correlation -----------------------------------------------------------

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n - 2 degrees of freedom
};

Correlation pearson(std::span<const double> xs, std::span<const double> ys);
Correlation spearman(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

// Probability that a random positive scores above a random negative (ties 1/2).
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

}  // namespace trustcp
