#include "trustcp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "trustcp/errors.hpp"

namespace trustcp {

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ArgumentError("synthetic spec: need at least 2 classes");
  if (feature_dim < 1) throw ArgumentError("synthetic spec: feature_dim must be positive");
  if (class_means.size() != num_classes) {
    throw ArgumentError("synthetic spec: expected one mean per class");
  }
  for (const auto& m : class_means) {
    if (m.size() != feature_dim) throw ArgumentError("synthetic spec: mean dimension mismatch");
  }
  if (!(shared_covariance_scale > 0.0) || !std::isfinite(shared_covariance_scale)) {
    throw ArgumentError("synthetic spec: covariance scale must be positive");
  }
  if (class_priors.size() != num_classes) {
    throw ArgumentError("synthetic spec: expected one prior per class");
  }
  double total = 0.0;
  for (double p : class_priors) {
    if (!(p >= 0.0)) throw ArgumentError("synthetic spec: priors must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("synthetic spec: priors must sum to 1");
  if (const auto* t = std::get_if<TemperatureDistortion>(&model_distortion)) {
    if (!(t->t > 0.0)) throw ArgumentError("synthetic spec: temperature must be positive");
  }
  if (const auto* s = std::get_if<MeanShiftDistortion>(&model_distortion)) {
    if (s->shift.size() != feature_dim) {
      throw ArgumentError("synthetic spec: mean shift dimension mismatch");
    }
  }
  if (sample_count == 0) throw ArgumentError("synthetic spec: sample_count must be positive");
}

std::vector<std::vector<double>> random_class_means(std::size_t num_classes,
                                                    std::size_t feature_dim, double scale,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(feature_dim));
  for (auto& m : means) {
    for (auto& v : m) v = normal(rng);
  }
  return means;
}

namespace {

// log prior - ||x - (mean + shift)||^2 / (2 sigma^2), normalised to log-probabilities.
std::vector<double> log_posterior(const SyntheticSpec& spec, std::span<const double> x,
                                  std::span<const double> shift) {
  std::vector<double> logp(spec.num_classes);
  const double inv_two_var = 1.0 / (2.0 * spec.shared_covariance_scale);
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    double sq = 0.0;
    for (std::size_t d = 0; d < spec.feature_dim; ++d) {
      const double mean = spec.class_means[k][d] + (shift.empty() ? 0.0 : shift[d]);
      const double diff = x[d] - mean;
      sq += diff * diff;
    }
    const double prior = spec.class_priors[k];
    logp[k] = (prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity()) -
              sq * inv_two_var;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  for (double v : logp) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  for (auto& v : logp) v -= lse;
  return logp;
}

}  // namespace

std::vector<double> bayes_probabilities(const SyntheticSpec& spec, std::span<const double> feature) {
  if (feature.size() != spec.feature_dim) {
    throw ArgumentError("bayes_probabilities: feature dimension mismatch");
  }
  auto logp = log_posterior(spec, feature, {});
  for (auto& v : logp) v = std::exp(v);
  const double total = std::accumulate(logp.begin(), logp.end(), 0.0);
  for (auto& v : logp) v /= total;
  return logp;
}

std::vector<double> model_logits(const SyntheticSpec& spec, std::span<const double> feature) {
  if (feature.size() != spec.feature_dim) {
    throw ArgumentError("model_logits: feature dimension mismatch");
  }
  return std::visit(
      [&](const auto& dist) -> std::vector<double> {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, NoDistortion>) {
          return log_posterior(spec, feature, {});
        } else if constexpr (std::is_same_v<T, TemperatureDistortion>) {
          auto logits = log_posterior(spec, feature, {});
          for (auto& v : logits) v /= dist.t;
          return logits;
        } else {
          return log_posterior(spec, feature, dist.shift);
        }
      },
      spec.model_distortion);
}

LabeledDataset generate_gaussian_mixture(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<std::size_t> label_dist(spec.class_priors.begin(),
                                                     spec.class_priors.end());
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.shared_covariance_scale));
  std::vector<LabeledExample> examples;
  examples.reserve(spec.sample_count);
  for (std::size_t i = 0; i < spec.sample_count; ++i) {
    LabeledExample ex;
    ex.label = label_dist(rng);
    ex.features.resize(spec.feature_dim);
    for (std::size_t d = 0; d < spec.feature_dim; ++d) {
      ex.features[d] = spec.class_means[ex.label][d] + noise(rng);
    }
    ex.logits = model_logits(spec, ex.features);
    examples.push_back(std::move(ex));
  }
  return LabeledDataset(std::move(examples), spec.num_classes, spec.feature_dim);
}

}  // namespace trustcp
