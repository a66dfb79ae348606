#pragma once

#include "trustcp/dataset.hpp"

namespace trustcp {

class Temperature {
 public:
  static constexpr double kMin = 0.01;
  static constexpr double kMax = 100.0;

  // Throws ArgumentError outside [kMin, kMax].
  explicit Temperature(double value);
  double value() const { return value_; }

 private:
  double value_;
};

struct TemperatureFit {
  Temperature temperature{1.0};
  // Every row has identical logits, so the NLL does not depend on T.
  bool flat = false;
  double nll = 0.0;
  double nll_at_one = 0.0;
  // Final golden-section bracket width in log T.
  double bracket_width = 0.0;
};

// Mean negative log-likelihood of softmax(logits / T) against the labels.
double temperature_nll(const LabeledDataset& ds, double temperature);

// Golden-section search on log T over [log kMin, log kMax] until the bracket is
// narrower than log_tolerance. Never returns a T whose NLL exceeds NLL(T=1).
TemperatureFit fit_temperature(const LabeledDataset& cal, double log_tolerance = 1e-4);

LabeledDataset apply_temperature(const LabeledDataset& ds, Temperature t);

}  // namespace trustcp
