#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "trustcp/errors.hpp"
#include "trustcp/evaluation.hpp"

namespace trustcp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::uint64_t seed) {
  k = std::min(k, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

void check_audit_inputs(const simd::BlockedRows& features, std::span<const std::uint8_t> cover) {
  if (features.size() != cover.size()) throw ArgumentError("ball audit: length mismatch");
  if (features.size() == 0) throw ArgumentError("ball audit: no test points");
}

// Distances from one center, sorted, with covered counts along the same order.
struct SortedBall {
  std::vector<double> sq;
  std::vector<std::uint32_t> covered_prefix;  // covered among the first i+1 points

  SortedBall(const simd::BlockedRows& features, std::span<const std::uint8_t> cover,
             std::size_t center) {
    const auto d = features.squared_distances(features.row(center));
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return d[a] < d[b] || (d[a] == d[b] && a < b);
    });
    sq.resize(d.size());
    covered_prefix.resize(d.size());
    std::uint32_t run = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      sq[i] = d[order[i]];
      run += cover[order[i]] ? 1 : 0;
      covered_prefix[i] = run;
    }
  }

  // (members, covered members) within the closed ball of squared radius r2.
  std::pair<std::size_t, std::size_t> query(double r2) const {
    const auto count = static_cast<std::size_t>(std::upper_bound(sq.begin(), sq.end(), r2) - sq.begin());
    return {count, count == 0 ? 0 : covered_prefix[count - 1]};
  }
};

// Mean taken relative to the first value, so equal values average exactly.
double shifted_mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x - xs.front();
  return xs.front() + acc / static_cast<double>(xs.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

double euclidean_ball_covgap(const simd::BlockedRows& features, std::span<const std::uint8_t> cover,
                             double radius, std::size_t n_centers, std::size_t min_neighbors,
                             double alpha, std::uint64_t seed) {
  check_audit_inputs(features, cover);
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
  const double r2 = radius * radius;
  const auto centers = sample_without_replacement(features.size(), n_centers, seed);
  std::vector<double> gaps;
  std::size_t largest = 0;
  for (std::size_t c : centers) {
    const auto d = features.squared_distances(features.row(c));
    std::size_t count = 0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] <= r2) {
        ++count;
        covered += cover[i] ? 1 : 0;
      }
    }
    largest = std::max(largest, count);
    if (count < min_neighbors) continue;
    gaps.push_back(std::abs(static_cast<double>(covered) / static_cast<double>(count) - (1.0 - alpha)));
  }
  if (gaps.empty()) {
    throw DataError("no ball of radius " + std::to_string(radius) + " has " +
                    std::to_string(min_neighbors) + " neighbours (largest had " +
                    std::to_string(largest) + ")");
  }
  return 100.0 * shifted_mean(gaps);
}

RadiusGrid radius_grid(const simd::BlockedRows& features, std::size_t n_points, std::uint64_t seed,
                       std::size_t n_pairs) {
  const std::size_t n = features.size();
  if (n < 2) throw ArgumentError("radius_grid needs at least 2 points");
  if (n_points < 1) throw ArgumentError("radius_grid needs at least 1 grid point");
  if (n_pairs < 1) throw ArgumentError("radius_grid needs at least 1 pair");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  std::vector<double> dist(n_pairs);
  for (auto& d : dist) {
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    double acc = 0.0;
    for (std::size_t k = 0; k < features.dim(); ++k) {
      const double diff = features.at(i, k) - features.at(j, k);
      acc = acc + diff * diff;
    }
    d = std::sqrt(acc);
  }
  std::sort(dist.begin(), dist.end());
  RadiusGrid g;
  g.r_min = dist.front();
  const double h = 0.9 * static_cast<double>(n_pairs - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n_pairs - 1);
  g.r_max = dist[lo] + (h - static_cast<double>(lo)) * (dist[hi] - dist[lo]);
  g.grid.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double f = n_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_points - 1);
    g.grid[i] = g.r_min + f * (g.r_max - g.r_min);
  }
  g.grid.back() = g.r_max;
  return g;
}

std::vector<AuditPoint> ball_audit_curve(const simd::BlockedRows& features,
                                         std::span<const std::uint8_t> cover,
                                         std::span<const double> radii, double alpha,
                                         const AuditSettings& settings, std::uint64_t seed) {
  check_audit_inputs(features, cover);
  if (settings.trials < 1 || settings.centers < 1) {
    throw ArgumentError("ball audit needs at least one trial and one center");
  }
  const std::size_t n = features.size();
  const std::size_t n_radii = radii.size();
  const std::size_t per_trial = std::min(settings.centers, n);

  // Draw every (radius, trial) center set up front, then visit each distinct
  // center once and answer all balls around it from its sorted distances.
  struct Slot {
    std::size_t radius_index;
    std::size_t trial;
  };
  std::vector<std::vector<Slot>> uses(n);
  for (std::size_t ri = 0; ri < n_radii; ++ri) {
    if (!(radii[ri] >= 0.0)) throw ArgumentError("ball audit radii must be nonnegative");
    for (std::size_t t = 0; t < settings.trials; ++t) {
      for (std::size_t c : sample_without_replacement(n, per_trial, derive_seed(seed, ri, t))) {
        uses[c].push_back({ri, t});
      }
    }
  }

  std::vector<std::vector<double>> ball_gaps(n_radii * settings.trials);
  for (std::size_t c = 0; c < n; ++c) {
    if (uses[c].empty()) continue;
    const SortedBall ball(features, cover, c);
    for (const Slot& s : uses[c]) {
      const auto [count, covered] = ball.query(radii[s.radius_index] * radii[s.radius_index]);
      if (count < settings.min_neighbors) continue;
      const std::size_t k = s.radius_index * settings.trials + s.trial;
      ball_gaps[k].push_back(
          std::abs(static_cast<double>(covered) / static_cast<double>(count) - (1.0 - alpha)));
    }
  }

  std::vector<AuditPoint> curve(n_radii);
  for (std::size_t ri = 0; ri < n_radii; ++ri) {
    std::vector<double> gaps;
    for (std::size_t t = 0; t < settings.trials; ++t) {
      const std::size_t k = ri * settings.trials + t;
      if (!ball_gaps[k].empty()) gaps.push_back(100.0 * shifted_mean(ball_gaps[k]));
    }
    auto& pt = curve[ri];
    pt.radius = radii[ri];
    pt.valid_trials = gaps.size();
    if (gaps.empty()) {
      pt.covgap = std::numeric_limits<double>::quiet_NaN();
      pt.stderr_ = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    pt.covgap = mean;
    pt.stderr_ = gaps.size() > 1
                     ? std::sqrt(ss / static_cast<double>(gaps.size() - 1)) /
                           std::sqrt(static_cast<double>(gaps.size()))
                     : 0.0;
  }
  return curve;
}

}  // namespace trustcp
