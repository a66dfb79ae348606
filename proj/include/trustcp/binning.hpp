#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trustcp {

enum class SecondAxis { none, trust, rank };

SecondAxis parse_second_axis(const std::string& name);

// Conf bins are evenly spaced over [0, 1], half-open except the last. Each Conf
// bin is cut into n_sub equal-count chunks of the second-axis value, unless
// manual edges are given, in which case the second axis is binned by value.
struct BinScheme {
  std::size_t n_conf = 10;
  std::size_t n_sub = 4;
  SecondAxis axis2 = SecondAxis::trust;
  std::optional<std::vector<double>> manual_edges;

  void validate() const;
  std::size_t sub_bins() const;
  std::size_t num_bins() const { return n_conf * sub_bins(); }
};

// Bin id = conf_bin * sub_bins() + sub_bin. values2 is ignored when axis2 is none.
std::vector<std::size_t> assign_bins(std::span<const double> conf, std::span<const double> values2,
                                     const BinScheme& scheme);

std::size_t conf_bin(double conf, std::size_t n_conf);

// Fixed cut values derived from a reference sample, so that new points can be
// located one at a time. Within each Conf bin the cuts are the second-axis
// values that start each equal-count chunk of the reference sample; a point
// falls into the chunk given by the number of cuts at or below its value.
class BinLayout {
 public:
  static BinLayout fit(std::span<const double> conf, std::span<const double> values2,
                       const BinScheme& scheme);

  std::size_t bin_of(double conf, double value2) const;
  std::size_t num_bins() const { return scheme_.num_bins(); }
  const BinScheme& scheme() const { return scheme_; }
  const std::vector<std::vector<double>>& cuts() const { return cuts_; }

 private:
  BinScheme scheme_;
  std::vector<std::vector<double>> cuts_;  // per Conf bin, nondecreasing
};

}  // namespace trustcp
