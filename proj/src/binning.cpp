#include "trustcp/binning.hpp"

#include <algorithm>
#include <numeric>

#include "trustcp/basis.hpp"
#include "trustcp/errors.hpp"

namespace trustcp {

SecondAxis parse_second_axis(const std::string& name) {
  if (name == "none") return SecondAxis::none;
  if (name == "trust") return SecondAxis::trust;
  if (name == "rank") return SecondAxis::rank;
  throw ArgumentError("unknown second binning axis '" + name + "'");
}

void BinScheme::validate() const {
  if (n_conf < 1) throw ArgumentError("n_conf must be at least 1");
  if (axis2 == SecondAxis::none) return;
  if (manual_edges) {
    const auto& e = *manual_edges;
    if (e.size() < 2) throw ArgumentError("manual bin edges need at least 2 values");
    for (std::size_t i = 1; i < e.size(); ++i) {
      if (!(e[i] > e[i - 1])) throw ArgumentError("manual bin edges must be strictly increasing");
    }
  } else if (n_sub < 1) {
    throw ArgumentError("n_sub must be at least 1");
  }
}

std::size_t BinScheme::sub_bins() const {
  if (axis2 == SecondAxis::none) return 1;
  if (manual_edges) return manual_edges->size() - 1;
  return n_sub;
}

std::size_t conf_bin(double conf, std::size_t n_conf) {
  if (!(conf >= 0.0 && conf <= 1.0)) {
    throw ArgumentError("confidence " + std::to_string(conf) + " outside [0, 1]");
  }
  const auto edges = even_edges(n_conf);
  return interval_index(edges, conf, true);
}

namespace {

std::size_t manual_bin(const std::vector<double>& edges, double v) {
  const std::size_t n = edges.size() - 1;
  const std::size_t i = interval_index(edges, v, true);
  if (i == n) {
    throw ArgumentError("value " + std::to_string(v) + " outside the manual bin edges");
  }
  return i;
}

// Positions (into the sorted order) at which each equal-count chunk starts.
std::vector<std::size_t> chunk_starts(std::size_t m, std::size_t n_sub) {
  std::vector<std::size_t> starts(n_sub);
  for (std::size_t c = 0; c < n_sub; ++c) starts[c] = c * m / n_sub;
  return starts;
}

std::vector<std::vector<std::size_t>> members_by_conf(std::span<const double> conf,
                                                      std::size_t n_conf) {
  std::vector<std::vector<std::size_t>> members(n_conf);
  for (std::size_t i = 0; i < conf.size(); ++i) members[conf_bin(conf[i], n_conf)].push_back(i);
  return members;
}

}  // namespace

std::vector<std::size_t> assign_bins(std::span<const double> conf, std::span<const double> values2,
                                     const BinScheme& scheme) {
  scheme.validate();
  const bool uses_second = scheme.axis2 != SecondAxis::none;
  if (uses_second && values2.size() != conf.size()) {
    throw ArgumentError("assign_bins: value vectors differ in length");
  }
  const std::size_t subs = scheme.sub_bins();
  std::vector<std::size_t> bins(conf.size());
  const auto members = members_by_conf(conf, scheme.n_conf);
  for (std::size_t b = 0; b < members.size(); ++b) {
    auto idx = members[b];
    if (!uses_second) {
      for (std::size_t i : idx) bins[i] = b;
      continue;
    }
    if (scheme.manual_edges) {
      for (std::size_t i : idx) bins[i] = b * subs + manual_bin(*scheme.manual_edges, values2[i]);
      continue;
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t c) { return values2[a] < values2[c]; });
    const auto starts = chunk_starts(idx.size(), subs);
    std::size_t chunk = 0;
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      while (chunk + 1 < subs && pos >= starts[chunk + 1]) ++chunk;
      bins[idx[pos]] = b * subs + chunk;
    }
  }
  return bins;
}

BinLayout BinLayout::fit(std::span<const double> conf, std::span<const double> values2,
                         const BinScheme& scheme) {
  scheme.validate();
  BinLayout layout;
  layout.scheme_ = scheme;
  layout.cuts_.assign(scheme.n_conf, {});
  if (scheme.axis2 == SecondAxis::none || scheme.manual_edges) return layout;
  if (values2.size() != conf.size()) throw ArgumentError("bin layout: value vectors differ in length");
  const auto members = members_by_conf(conf, scheme.n_conf);
  for (std::size_t b = 0; b < members.size(); ++b) {
    std::vector<double> v;
    v.reserve(members[b].size());
    for (std::size_t i : members[b]) v.push_back(values2[i]);
    std::sort(v.begin(), v.end());
    if (v.empty()) continue;
    const auto starts = chunk_starts(v.size(), scheme.n_sub);
    for (std::size_t c = 1; c < scheme.n_sub; ++c) {
      if (starts[c] < v.size()) layout.cuts_[b].push_back(v[starts[c]]);
    }
  }
  return layout;
}

std::size_t BinLayout::bin_of(double conf, double value2) const {
  const std::size_t b = conf_bin(conf, scheme_.n_conf);
  const std::size_t subs = scheme_.sub_bins();
  if (scheme_.axis2 == SecondAxis::none) return b;
  if (scheme_.manual_edges) return b * subs + manual_bin(*scheme_.manual_edges, value2);
  const auto& c = cuts_[b];
  const auto sub = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), value2) - c.begin());
  return b * subs + sub;
}

}  // namespace trustcp
