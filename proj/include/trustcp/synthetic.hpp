#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "trustcp/dataset.hpp"

namespace trustcp {

// How the stored logits deviate from the Bayes posterior of the mixture.
struct NoDistortion {};
struct TemperatureDistortion {
  double t = 1.0;  // posterior log-probabilities are divided by t
};
struct MeanShiftDistortion {
  std::vector<double> shift;  // added to every class mean when forming the model posterior
};
using ModelDistortion = std::variant<NoDistortion, TemperatureDistortion, MeanShiftDistortion>;

// Isotropic Gaussian mixture: X | Y=k ~ N(mean_k, sigma2 * I), Y ~ priors.
struct SyntheticSpec {
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<std::vector<double>> class_means;
  double shared_covariance_scale = 1.0;
  std::vector<double> class_priors;
  ModelDistortion model_distortion = NoDistortion{};
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;

  // Throws ArgumentError when the invariants do not hold.
  void validate() const;
};

// Class means drawn i.i.d. from N(0, scale^2 I); deterministic in seed.
std::vector<std::vector<double>> random_class_means(std::size_t num_classes,
                                                    std::size_t feature_dim, double scale,
                                                    std::uint64_t seed);

// Exact posterior P(Y = k | X = feature). Entries sum to 1.
std::vector<double> bayes_probabilities(const SyntheticSpec& spec, std::span<const double> feature);

// Log-probabilities of the (possibly distorted) model at feature.
std::vector<double> model_logits(const SyntheticSpec& spec, std::span<const double> feature);

LabeledDataset generate_gaussian_mixture(const SyntheticSpec& spec);

}  // namespace trustcp
