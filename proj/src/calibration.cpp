#include "trustcp/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "trustcp/errors.hpp"

namespace trustcp {

Temperature::Temperature(double value) : value_(value) {
  if (!(value >= kMin && value <= kMax)) {
    throw ArgumentError("temperature must lie in [0.01, 100], got " + std::to_string(value));
  }
}

double temperature_nll(const LabeledDataset& ds, double temperature) {
  if (ds.empty()) throw ArgumentError("temperature_nll: empty dataset");
  const double inv_t = 1.0 / temperature;
  double total = 0.0;
  for (const auto& ex : ds.examples()) {
    const double mx = *std::max_element(ex.logits.begin(), ex.logits.end()) * inv_t;
    double sum = 0.0;
    for (double z : ex.logits) sum += std::exp(z * inv_t - mx);
    total += mx + std::log(sum) - ex.logits[ex.label] * inv_t;
  }
  return total / static_cast<double>(ds.size());
}

namespace {

bool all_rows_flat(const LabeledDataset& ds) {
  for (const auto& ex : ds.examples()) {
    const auto [lo, hi] = std::minmax_element(ex.logits.begin(), ex.logits.end());
    if (*lo != *hi) return false;
  }
  return true;
}

}  // namespace

TemperatureFit fit_temperature(const LabeledDataset& cal, double log_tolerance) {
  if (cal.empty()) throw ArgumentError("fit_temperature: calibration set is empty");
  if (!(log_tolerance > 0.0)) throw ArgumentError("fit_temperature: tolerance must be positive");

  TemperatureFit fit;
  fit.nll_at_one = temperature_nll(cal, 1.0);
  if (all_rows_flat(cal)) {
    fit.flat = true;
    fit.nll = fit.nll_at_one;
    return fit;
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto objective = [&](double log_t) { return temperature_nll(cal, std::exp(log_t)); };
  double a = std::log(Temperature::kMin);
  double b = std::log(Temperature::kMax);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a >= log_tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  fit.bracket_width = b - a;

  const double t = std::clamp(std::exp(0.5 * (a + b)), Temperature::kMin, Temperature::kMax);
  const double nll = temperature_nll(cal, t);
  if (nll <= fit.nll_at_one) {
    fit.temperature = Temperature(t);
    fit.nll = nll;
  } else {
    fit.nll = fit.nll_at_one;
  }
  return fit;
}

LabeledDataset apply_temperature(const LabeledDataset& ds, Temperature t) {
  if (t.value() == 1.0) return ds;
  std::vector<LabeledExample> examples = ds.examples();
  for (auto& ex : examples) {
    for (auto& z : ex.logits) z /= t.value();
  }
  return LabeledDataset(std::move(examples), ds.num_classes(), ds.feature_dim());
}

}  // namespace trustcp
