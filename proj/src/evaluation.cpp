#include "trustcp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trustcp/errors.hpp"

namespace trustcp {

CoverFlags covered_flags(const std::vector<PredictionSet>& sets, std::span<const std::size_t> labels) {
  if (sets.size() != labels.size()) throw ArgumentError("covered_flags: length mismatch");
  CoverFlags out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i] = sets[i].contains(labels[i]) ? 1 : 0;
  return out;
}

std::vector<BinStat> bin_table(std::span<const std::uint8_t> cover, std::span<const std::size_t> bins) {
  if (cover.size() != bins.size()) throw ArgumentError("bin_table: length mismatch");
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> acc;  // bin -> (count, covered)
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto& a = acc[bins[i]];
    ++a.first;
    a.second += cover[i] ? 1 : 0;
  }
  std::vector<BinStat> out;
  out.reserve(acc.size());
  for (const auto& [id, a] : acc) {
    out.push_back({id, a.first, static_cast<double>(a.second) / static_cast<double>(a.first)});
  }
  return out;
}

double covgap(std::span<const std::uint8_t> cover, std::span<const std::size_t> bins, double alpha) {
  const auto table = bin_table(cover, bins);
  if (table.empty()) throw ArgumentError("covgap: no nonempty bins");
  double total = 0.0;
  for (const auto& b : table) total += std::abs(b.coverage - (1.0 - alpha));
  return 100.0 * total / static_cast<double>(table.size());
}

double class_covgap(std::span<const std::uint8_t> cover, std::span<const std::size_t> labels,
                    double alpha) {
  return covgap(cover, labels, alpha);
}

MarginalStats marginal_and_size(const std::vector<PredictionSet>& sets,
                                std::span<const std::size_t> labels) {
  if (sets.size() != labels.size()) throw ArgumentError("marginal_and_size: length mismatch");
  if (sets.empty()) throw ArgumentError("marginal_and_size: no examples");
  std::size_t covered = 0;
  std::size_t size = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    covered += sets[i].contains(labels[i]) ? 1 : 0;
    size += sets[i].size();
  }
  const auto n = static_cast<double>(sets.size());
  return {static_cast<double>(covered) / n, static_cast<double>(size) / n};
}

double worst_group_coverage(std::span<const std::uint8_t> cover,
                            std::span<const std::string> groups) {
  if (cover.size() != groups.size()) throw ArgumentError("worst_group_coverage: length mismatch");
  std::map<std::string, std::pair<std::size_t, std::size_t>> acc;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto& a = acc[groups[i]];
    ++a.first;
    a.second += cover[i] ? 1 : 0;
  }
  if (acc.empty()) throw ArgumentError("worst_group_coverage: no groups");
  double worst = 1.0;
  for (const auto& [name, a] : acc) {
    worst = std::min(worst, static_cast<double>(a.second) / static_cast<double>(a.first));
  }
  return worst;
}

CoverageReport coverage_report(const EvaluationInputs& in, const BinScheme& scheme, double alpha) {
  const std::size_t n = in.sets.size();
  if (in.labels.size() != n || in.conf.size() != n || in.trust.size() != n || in.rank.size() != n) {
    throw ArgumentError("coverage_report: per-example inputs differ in length");
  }
  CoverageReport rep;
  const auto stats = marginal_and_size(in.sets, in.labels);
  rep.marginal_coverage = stats.coverage;
  rep.avg_set_size = stats.avg_size;
  const auto cover = covered_flags(in.sets, in.labels);

  BinScheme trust_scheme = scheme;
  trust_scheme.axis2 = SecondAxis::trust;
  trust_scheme.manual_edges.reset();
  const auto trust_bins = assign_bins(in.conf, in.trust, trust_scheme);
  rep.bins_conf_trust = bin_table(cover, trust_bins);
  rep.covgap_conf_trust = covgap(cover, trust_bins, alpha);

  BinScheme rank_scheme = scheme;
  rank_scheme.axis2 = SecondAxis::rank;
  std::vector<double> rank(in.rank.begin(), in.rank.end());
  const auto rank_bins = assign_bins(in.conf, rank, rank_scheme);
  rep.bins_conf_rank = bin_table(cover, rank_bins);
  rep.covgap_conf_rank = covgap(cover, rank_bins, alpha);

  rep.bins_class = bin_table(cover, in.labels);
  rep.covgap_class = class_covgap(cover, in.labels, alpha);
  if (in.groups) rep.worst_group_coverage = worst_group_coverage(cover, *in.groups);
  return rep;
}

}  // namespace trustcp
