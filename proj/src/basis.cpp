#include "trustcp/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trustcp/errors.hpp"

namespace trustcp {

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "polynomial") return BasisKind::polynomial;
  if (name == "indicator") return BasisKind::indicator;
  if (name == "pca") return BasisKind::pca;
  throw ArgumentError("unknown basis kind '" + name + "' (expected polynomial, indicator or pca)");
}

std::string basis_kind_name(BasisKind kind) {
  switch (kind) {
    case BasisKind::polynomial: return "polynomial";
    case BasisKind::indicator: return "indicator";
    case BasisKind::pca: return "pca";
  }
  return "?";
}

PcaModel fit_pca(const Eigen::MatrixXd& train_features, std::size_t m) {
  const auto n = static_cast<std::size_t>(train_features.rows());
  const auto d = static_cast<std::size_t>(train_features.cols());
  if (n < 2) throw ArgumentError("pca basis needs at least 2 training rows");
  if (m < 1 || m > std::min(n, d)) {
    throw ArgumentError("pca basis: " + std::to_string(m) + " components requested, at most " +
                        std::to_string(std::min(n, d)) + " available");
  }
  PcaModel model;
  model.mean = train_features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = train_features.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

  model.components.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  model.eigenvalues.resize(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    // Eigen returns ascending eigenvalues.
    const auto col = static_cast<Eigen::Index>(d - 1 - k);
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    if (v(largest) < 0.0) v = -v;
    model.components.row(static_cast<Eigen::Index>(k)) = v.transpose();
    model.eigenvalues(static_cast<Eigen::Index>(k)) = solver.eigenvalues()(col);
  }
  return model;
}

std::vector<double> even_edges(std::size_t n_intervals) {
  if (n_intervals < 1) throw ArgumentError("need at least one interval");
  std::vector<double> edges(n_intervals + 1);
  for (std::size_t i = 0; i <= n_intervals; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(n_intervals);
  }
  return edges;
}

std::size_t interval_index(std::span<const double> edges, double v, bool close_last) {
  const std::size_t n = edges.size() - 1;
  if (v < edges.front()) return n;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const auto pos = static_cast<std::size_t>(it - edges.begin());
  if (pos <= n) return pos - 1;
  // v >= last edge
  return (close_last && v == edges.back()) ? n - 1 : n;
}

namespace {

void check_edges(const std::vector<double>& edges, double lo, double hi, const char* axis) {
  if (edges.size() < 2) throw ArgumentError(std::string(axis) + " edges need at least 2 values");
  if (edges.front() != lo || edges.back() != hi) {
    throw ArgumentError(std::string(axis) + " edges must start at " + std::to_string(lo) +
                        " and end at " + (std::isinf(hi) ? std::string("inf") : std::to_string(hi)));
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw ArgumentError(std::string(axis) + " edges must be strictly increasing");
    }
  }
}

}  // namespace

FunctionBasis FunctionBasis::polynomial(std::size_t degree) {
  FunctionBasis b;
  b.kind_ = BasisKind::polynomial;
  b.degree_ = degree;
  return b;
}

FunctionBasis FunctionBasis::indicator(std::vector<double> conf_edges,
                                       std::vector<double> trust_edges) {
  check_edges(conf_edges, 0.0, 1.0, "conf");
  check_edges(trust_edges, 0.0, std::numeric_limits<double>::infinity(), "trust");
  FunctionBasis b;
  b.kind_ = BasisKind::indicator;
  b.conf_edges_ = std::move(conf_edges);
  b.trust_edges_ = std::move(trust_edges);
  return b;
}

FunctionBasis FunctionBasis::pca(PcaModel model) {
  if (model.components.rows() < 1 || model.components.cols() != model.mean.size()) {
    throw ArgumentError("pca basis: inconsistent model");
  }
  FunctionBasis b;
  b.kind_ = BasisKind::pca;
  b.pca_ = std::move(model);
  return b;
}

std::size_t FunctionBasis::dimension() const {
  switch (kind_) {
    case BasisKind::polynomial: return (degree_ + 1) * (degree_ + 2) / 2;
    case BasisKind::indicator: return conf_edges_.size() + trust_edges_.size() - 2;
    case BasisKind::pca: return static_cast<std::size_t>(pca_.components.rows()) + 1;
  }
  return 0;
}

void FunctionBasis::evaluate(const Covariates& x, std::span<double> out) const {
  if (out.size() != dimension()) throw ArgumentError("basis output size mismatch");
  switch (kind_) {
    case BasisKind::polynomial: {
      if (!(x.trust >= 0.0)) throw ArgumentError("trust must be nonnegative");
      const double t = rescaled_trust(x.trust);
      std::vector<double> cp(degree_ + 1, 1.0), tp(degree_ + 1, 1.0);
      for (std::size_t i = 1; i <= degree_; ++i) {
        cp[i] = cp[i - 1] * x.conf;
        tp[i] = tp[i - 1] * t;
      }
      // Grouped by total degree; within a degree, higher Conf powers first.
      std::size_t k = 0;
      for (std::size_t total = 0; total <= degree_; ++total) {
        for (std::size_t i = total + 1; i-- > 0;) out[k++] = cp[i] * tp[total - i];
      }
      return;
    }
    case BasisKind::indicator: {
      std::fill(out.begin(), out.end(), 0.0);
      const std::size_t n1 = conf_edges_.size() - 1;
      const std::size_t ci = interval_index(conf_edges_, x.conf, true);
      if (ci == n1) throw ArgumentError("conf value " + std::to_string(x.conf) + " outside [0, 1]");
      const std::size_t ti = interval_index(trust_edges_, x.trust, false);
      if (ti == trust_edges_.size() - 1) {
        throw ArgumentError("trust value " + std::to_string(x.trust) + " outside [0, inf)");
      }
      out[ci] = 1.0;
      out[n1 + ti] = 1.0;
      return;
    }
    case BasisKind::pca: {
      const auto d = pca_.mean.size();
      if (static_cast<Eigen::Index>(x.features.size()) != d) {
        throw ArgumentError("pca basis: feature dimension mismatch");
      }
      out[0] = 1.0;
      for (Eigen::Index k = 0; k < pca_.components.rows(); ++k) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
          acc += (x.features[static_cast<std::size_t>(j)] - pca_.mean(j)) * pca_.components(k, j);
        }
        out[static_cast<std::size_t>(k) + 1] = acc;
      }
      return;
    }
  }
}

std::vector<double> FunctionBasis::evaluate(const Covariates& x) const {
  std::vector<double> out(dimension());
  evaluate(x, out);
  return out;
}

std::vector<std::string> FunctionBasis::function_names() const {
  std::vector<std::string> names;
  switch (kind_) {
    case BasisKind::polynomial:
      for (std::size_t total = 0; total <= degree_; ++total) {
        for (std::size_t i = total + 1; i-- > 0;) {
          names.push_back("conf^" + std::to_string(i) + "*trust^" + std::to_string(total - i));
        }
      }
      break;
    case BasisKind::indicator:
      for (std::size_t i = 0; i + 1 < conf_edges_.size(); ++i) names.push_back("conf_bin_" + std::to_string(i));
      for (std::size_t i = 0; i + 1 < trust_edges_.size(); ++i) names.push_back("trust_bin_" + std::to_string(i));
      break;
    case BasisKind::pca:
      names.push_back("intercept");
      for (Eigen::Index k = 0; k < pca_.components.rows(); ++k) names.push_back("pc_" + std::to_string(k));
      break;
  }
  return names;
}

}  // namespace trustcp
