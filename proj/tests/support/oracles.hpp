#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library beyond plain data types.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // row-major, rows x cols

struct EigenPairs {
  std::vector<double> values;   // descending
  Matrix vectors;               // one eigenvector per row, unit length
};

// Cyclic Jacobi rotations on a symmetric matrix.
EigenPairs jacobi_eigen(Matrix a, double tol = 1e-15, int max_sweeps = 100);

double pinball(double resid, double alpha);
double pinball_objective(const Matrix& rows, const std::vector<double>& scores,
                         const std::vector<double>& beta, double alpha);

// Minimum of the mean pinball loss by enumerating every subset of rank(rows)
// rows, interpolating it exactly and evaluating the loss (Gaussian elimination
// with partial pivoting, no shared code with the simplex).
double pinball_vertex_min(const Matrix& rows, const std::vector<double>& scores, double alpha);

struct SearchResult {
  double loss = 0.0;
  std::vector<double> beta;
};

// Nested one-dimensional minimisation of the (convex) mean pinball loss:
// golden-section search over beta_0..beta_{p-2} inside [-bound, bound], and an
// exact scan of the breakpoints for the last coordinate.
SearchResult pinball_line_search(const Matrix& rows, const std::vector<double>& scores, double alpha,
                                 double bound = 1e4, int iterations = 100);

// Numerical rank by Gaussian elimination.
std::size_t matrix_rank(const Matrix& rows, double tol = 1e-10);

// The m-th smallest value (1-based) by counting, no sorting.
double order_statistic(const std::vector<double>& xs, std::size_t m);

// Squared Euclidean distance, coordinates summed in ascending order with a
// separate multiply and add per term.
double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
