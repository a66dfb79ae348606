#pragma once

// Experiment configuration. A single JSON document; missing keys take the
// defaults below, unknown keys are rejected. Command-line flags are applied on
// top of the parsed document, so the precedence is flag > file > default.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustcp/basis.hpp"
#include "trustcp/dataset.hpp"
#include "trustcp/scores.hpp"
#include "trustcp/synthetic.hpp"
#include "trustcp/trust.hpp"

namespace trustcp {

enum class Method { standard, mondrian, conditional, oracle };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct BasisConfig {
  BasisKind kind = BasisKind::polynomial;
  std::size_t degree = 5;
  std::size_t pca_components = 2;
  std::vector<double> conf_edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  // Last edge is +inf; written as the string "inf" in JSON.
  std::vector<double> trust_edges{0.0, 0.75, 1.0, 1.5, std::numeric_limits<double>::infinity()};
};

struct BinningConfig {
  std::size_t n_conf = 10;
  std::size_t n_sub = 4;
  std::optional<std::vector<double>> rank_edges;
};

struct DistortionConfig {
  std::string kind = "none";  // none | temperature | mean_shift
  double t = 1.0;
  // One value per feature; a single value is repeated across every feature.
  std::vector<double> shift;
};

struct SyntheticConfig {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 16;
  // Explicit means, or means drawn from N(0, mean_scale^2 I) with means_seed.
  std::vector<std::vector<double>> class_means;
  double mean_scale = 1.0;
  std::uint64_t means_seed = 0;
  double sigma2 = 1.0;
  std::vector<double> priors;  // empty: uniform
  DistortionConfig distortion;
  std::size_t sample_count = 4000;  // calibration/evaluation pool
  std::size_t train_count = 2000;   // trust-score training set

  // Pool (or train) specification for a run seed.
  SyntheticSpec pool_spec(std::uint64_t seed) const;
  SyntheticSpec train_spec(std::uint64_t seed) const;
};

struct AuditConfig {
  std::size_t radii = 20;
  std::size_t trials = 100;
  std::size_t centers = 100;
  std::size_t min_neighbors = 10;
  std::size_t pairs = 10000;
};

struct DataConfig {
  std::optional<std::string> train;
  std::optional<std::string> pool;
  std::optional<DataFormat> format;  // inferred from the extension when absent
};

struct RunConfig {
  std::uint64_t seed = 0;
  double alpha = 0.1;
  Method method = Method::standard;
  double split_fraction = 0.5;
  bool temperature_scaling = true;
  ScoreFunction score;
  TrustSettings trust;
  BasisConfig basis;
  BinningConfig binning;
  SyntheticConfig synthetic;
  AuditConfig audit;
  DataConfig data;
  std::vector<std::size_t> degrees{0, 1, 2, 3, 4, 5};

  // Throws ArgumentError.
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace trustcp
