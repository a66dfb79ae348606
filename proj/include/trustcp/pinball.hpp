#pragma once

// Linear quantile regression under the pinball loss
//
//   min_beta  (1/n) sum_i  (1-alpha) (s_i - phi_i'beta)_+  +  alpha (phi_i'beta - s_i)_+
//
// solved exactly by a bounded dual simplex on
//
//   max  sum_i s_i eta_i   s.t.  sum_i eta_i phi_i = 0,   -alpha <= eta_i <= 1-alpha.
//
// A basis is a set of rank(Phi) rows interpolated exactly by beta; every other
// row sits at the bound matching the sign of its residual. The ratio test flips
// bounds along the piecewise-linear primal path (long-step dual simplex), and a
// smallest-index rule takes over after a run of degenerate pivots so the method
// cannot cycle. Returned coefficients are always a vertex of the primal.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trustcp {

double pinball_loss(double residual, double alpha);

struct QuantileFit {
  std::vector<double> beta;   // one per basis column; zero on dropped dependent columns
  double achieved_loss = 0.0; // mean pinball loss at beta
  std::size_t iterations = 0;
  std::size_t rank = 0;
  std::vector<std::size_t> basis_rows;  // rows interpolated exactly
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// rows: n x p design, scores: n values, alpha in (0, 1).
QuantileFit fit_quantile_regression(const RowMatrix& rows, std::span<const double> scores,
                                    double alpha);

struct AugmentedFit {
  bool included = false;  // imputed score <= fitted value at the extra row
  double fitted = 0.0;    // phi_extra' beta
  double residual = 0.0;  // imputed score - fitted
  QuantileFit fit;
};

// A calibration problem solved once, then refit with one extra (phi, s) row at
// a time. Thread-safe for concurrent augment() calls.
class PinballProblem {
 public:
  PinballProblem(const RowMatrix& rows, std::vector<double> scores, double alpha);
  ~PinballProblem();
  PinballProblem(PinballProblem&&) noexcept;
  PinballProblem& operator=(PinballProblem&&) noexcept;

  const QuantileFit& base_fit() const;
  std::size_t size() const;
  std::size_t columns() const;
  double alpha() const;

  // Exact refit on the n+1 rows. warm=true starts from the calibration
  // optimum; warm=false solves from scratch (used to cross-check).
  AugmentedFit augment(std::span<const double> phi, double score, bool warm = true) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trustcp
