#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trustcp {

// What a basis may look at for one example.
struct Covariates {
  double conf = 0.0;
  double trust = 0.0;
  std::span<const double> features;
};

enum class BasisKind { polynomial, indicator, pca };

BasisKind parse_basis_kind(const std::string& name);
std::string basis_kind_name(BasisKind kind);

// Principal directions of a training feature matrix.
struct PcaModel {
  Eigen::VectorXd mean;          // D
  Eigen::MatrixXd components;    // m x D, one unit direction per row
  Eigen::VectorXd eigenvalues;   // m, descending
};

// train_features: n x D, n >= 2, 1 <= m <= min(n, D).
PcaModel fit_pca(const Eigen::MatrixXd& train_features, std::size_t m);

class FunctionBasis {
 public:
  static FunctionBasis polynomial(std::size_t degree);
  // conf_edges partition [0, 1]; trust_edges partition [0, +inf) and must end
  // with +inf. Intervals are half-open except the last conf interval.
  static FunctionBasis indicator(std::vector<double> conf_edges, std::vector<double> trust_edges);
  static FunctionBasis pca(PcaModel model);

  BasisKind kind() const { return kind_; }
  std::size_t dimension() const;
  std::size_t degree() const { return degree_; }
  const std::vector<double>& conf_edges() const { return conf_edges_; }
  const std::vector<double>& trust_edges() const { return trust_edges_; }
  const PcaModel& pca_model() const { return pca_; }

  // out.size() must equal dimension().
  void evaluate(const Covariates& x, std::span<double> out) const;
  std::vector<double> evaluate(const Covariates& x) const;

  // Human-readable name of each basis function, in evaluation order.
  std::vector<std::string> function_names() const;

 private:
  FunctionBasis() = default;

  BasisKind kind_ = BasisKind::polynomial;
  std::size_t degree_ = 0;
  std::vector<double> conf_edges_;
  std::vector<double> trust_edges_;
  PcaModel pca_;
};

// Monotone map of [0, inf) onto [0, 1) applied to Trust inside the polynomial basis.
inline double rescaled_trust(double t) { return t / (1.0 + t); }

// Index of the interval containing v; the last interval is closed when
// close_last is set. Returns edges.size() - 1 when v lies outside.
std::size_t interval_index(std::span<const double> edges, double v, bool close_last);

// Evenly spaced edges over [0, 1].
std::vector<double> even_edges(std::size_t n_intervals);

}  // namespace trustcp
