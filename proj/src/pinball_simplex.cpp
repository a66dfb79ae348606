#include "trustcp/pinball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "trustcp/errors.hpp"
#include "trustcp/simd/blocked_rows.hpp"

namespace trustcp {

double pinball_loss(double residual, double alpha) {
  return residual > 0.0 ? (1.0 - alpha) * residual : -alpha * residual;
}

namespace {

constexpr signed char kLower = -1;
constexpr signed char kBasic = 0;
constexpr signed char kUpper = 1;

// Rows of the reduced design plus at most one appended row.
struct RowSource {
  const RowMatrix* base = nullptr;
  const simd::BlockedRows* blocked = nullptr;
  const std::vector<double>* base_scores = nullptr;
  std::optional<Eigen::VectorXd> extra;
  double extra_score = 0.0;

  std::size_t n_base() const { return static_cast<std::size_t>(base->rows()); }
  std::size_t size() const { return n_base() + (extra ? 1 : 0); }
  std::size_t cols() const { return static_cast<std::size_t>(base->cols()); }

  Eigen::Ref<const Eigen::RowVectorXd> row(std::size_t j) const {
    if (j < n_base()) return base->row(static_cast<Eigen::Index>(j));
    return extra->transpose();
  }
  double score(std::size_t j) const { return j < n_base() ? (*base_scores)[j] : extra_score; }

  // out[j] = row_j . w for every row; out is resized to hold padding.
  void products(const Eigen::VectorXd& w, std::vector<double>& out) const {
    out.resize(blocked->padded_size() + 1);
    blocked->dot(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                 std::span<double>(out.data(), blocked->padded_size()));
    if (extra) out[n_base()] = extra->dot(w);
  }
};

struct SimplexState {
  std::vector<double> resid;
  std::vector<signed char> status;
  std::vector<std::size_t> basis;
  Eigen::VectorXd beta;
  Eigen::VectorXd g;  // sum over nonbasic rows of eta_j * phi_j
  Eigen::VectorXd eta_basic;
  Eigen::MatrixXd inv;  // inverse of the basis rows, updated in place between refreshes
  std::size_t iterations = 0;
};

class DualSimplex {
 public:
  // row_scale: largest absolute design entry; score_scale: max(1, largest |score|).
  DualSimplex(const RowSource& rows, double alpha, double row_scale, double score_scale)
      : rows_(rows),
        alpha_(alpha),
        upper_(1.0 - alpha),
        lower_(-alpha),
        resid_tol_(1e-11 * score_scale),
        feas_tol_(1e-10),
        row_scale_(std::max(row_scale, 1e-300)) {}

  double eta_of(signed char s) const { return s == kUpper ? upper_ : lower_; }

  // Greedy independent rows nearest the target quantile.
  void cold_start(SimplexState& st) const {
    const std::size_t n = rows_.size();
    const std::size_t r = rows_.cols();
    std::vector<double> sorted(n);
    for (std::size_t j = 0; j < n; ++j) sorted[j] = rows_.score(j);
    std::sort(sorted.begin(), sorted.end());
    auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - alpha_) - 1e-9));
    m = std::clamp<std::size_t>(m, 1, n);
    const double target = sorted[m - 1];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(rows_.score(a) - target) < std::abs(rows_.score(b) - target);
    });

    std::vector<Eigen::VectorXd> q;
    st.basis.clear();
    for (std::size_t j : order) {
      if (st.basis.size() == r) break;
      Eigen::VectorXd v = rows_.row(j).transpose();
      const double norm = v.norm();
      if (norm == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& u : q) v -= u.dot(v) * u;
      }
      const double rest = v.norm();
      if (rest > 1e-9 * norm) {
        q.push_back(v / rest);
        st.basis.push_back(j);
      }
    }
    if (st.basis.size() != r) throw NumericError("pinball simplex: could not find a starting basis");

    st.status.assign(n, kLower);
    st.resid.assign(n, 0.0);
    for (std::size_t j : st.basis) st.status[j] = kBasic;
    factor(st);
    solve_beta(st);
    recompute_residuals(st);
    for (std::size_t j = 0; j < n; ++j) {
      if (st.status[j] != kBasic) st.status[j] = st.resid[j] > 0.0 ? kUpper : kLower;
    }
    recompute_g(st);
    solve_eta(st);
  }

  // Appends the extra row as a nonbasic at the bound its residual selects.
  void append_extra(SimplexState& st) const {
    const double r = rows_.extra_score - rows_.extra->dot(st.beta);
    st.resid.push_back(r);
    st.status.push_back(r > 0.0 ? kUpper : kLower);
    st.g += eta_of(st.status.back()) * *rows_.extra;
    solve_eta(st);
  }

  void run(SimplexState& st) const {
    const std::size_t n = rows_.size();
    const std::size_t r = rows_.cols();
    const std::size_t max_iter = 100 * (n + r) + 1000;
    const std::size_t degenerate_limit = 2 * r + 20;
    std::size_t degenerate_run = 0;
    bool bland = false;
    std::vector<double> alpha_row;
    std::vector<Candidate> cands(n);
    std::vector<std::size_t> flips;

    while (true) {
      // Leaving row: the most infeasible basic multiplier.
      std::size_t leave_pos = r;
      double worst = feas_tol_;
      for (std::size_t k = 0; k < r; ++k) {
        const double e = st.eta_basic(static_cast<Eigen::Index>(k));
        const double viol = std::max(e - upper_, lower_ - e);
        if (viol <= feas_tol_) continue;
        if (bland) {
          if (leave_pos == r || st.basis[k] < st.basis[leave_pos]) {
            leave_pos = k;
            worst = viol;
          }
        } else if (viol > worst || (viol == worst && leave_pos < r && st.basis[k] < st.basis[leave_pos])) {
          leave_pos = k;
          worst = viol;
        }
      }
      if (leave_pos == r) {
        if (refresh(st, false) == 0) return;
        continue;
      }
      if (++st.iterations > max_iter) {
        throw NumericError("pinball simplex: iteration limit exceeded");
      }

      const double e_q = st.eta_basic(static_cast<Eigen::Index>(leave_pos));
      const double sigma = e_q > upper_ ? 1.0 : -1.0;
      const double slope0 = -(sigma > 0 ? e_q - upper_ : lower_ - e_q);
      const Eigen::VectorXd delta = -sigma * st.inv.col(static_cast<Eigen::Index>(leave_pos));
      rows_.products(delta, alpha_row);

      const double alpha_tol =
          1e-11 * row_scale_ * std::max(1.0, delta.cwiseAbs().sum());
      // Any single breakpoint whose |alpha| covers the initial slope bounds the
      // step, so later breakpoints never need to enter the heap.
      const double need = -slope0;
      double bound = std::numeric_limits<double>::infinity();
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const signed char s = st.status[j];
        const double a = alpha_row[j];
        double t_j, abs_a;
        if (s == kUpper && a > alpha_tol) {
          t_j = std::max(0.0, st.resid[j]) / a;
          abs_a = a;
        } else if (s == kLower && a < -alpha_tol) {
          t_j = std::max(0.0, -st.resid[j]) / -a;
          abs_a = -a;
        } else {
          continue;
        }
        if (t_j > bound) continue;
        if (abs_a >= need) bound = t_j;
        cands[m++] = {t_j, j, abs_a};
      }
      if (m == 0) throw NumericError("pinball simplex: dual ratio test found no entering row");
      const auto cands_end =
          bland ? cands.begin() + static_cast<std::ptrdiff_t>(m)
                : std::partition(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(m),
                                 [bound](const Candidate& c) { return c.t <= bound; });

      flips.clear();
      Candidate enter{};
      if (bland) {
        enter = *std::min_element(cands.begin(), cands_end);
      } else {
        std::make_heap(cands.begin(), cands_end, std::greater<>{});
        auto heap_end = cands_end;
        double slope = slope0;
        bool found = false;
        while (heap_end != cands.begin()) {
          std::pop_heap(cands.begin(), heap_end, std::greater<>{});
          --heap_end;
          const Candidate c = *heap_end;
          slope += c.abs_alpha;
          enter = c;
          if (slope >= 0.0) {
            found = true;
            break;
          }
          flips.push_back(c.row);
        }
        if (!found) {
          if (slope < -1e-9) throw NumericError("pinball simplex: primal objective unbounded");
          flips.pop_back();
        }
      }

      const double t = enter.t;
      degenerate_run = t > 0.0 ? 0 : degenerate_run + 1;
      if (bland && t > 0.0) bland = false;
      if (degenerate_run > degenerate_limit) bland = true;

      // Move along the edge.
      st.beta += t * delta;
      if (t != 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
          if (st.status[j] != kBasic) st.resid[j] -= t * alpha_row[j];
        }
      }
      for (std::size_t j : flips) {
        if (st.status[j] == kUpper) {
          st.status[j] = kLower;
          st.g -= rows_.row(j).transpose();
        } else {
          st.status[j] = kUpper;
          st.g += rows_.row(j).transpose();
        }
      }
      const std::size_t q = st.basis[leave_pos];
      const std::size_t e = enter.row;
      st.g -= eta_of(st.status[e]) * rows_.row(e).transpose();
      st.status[e] = kBasic;
      st.resid[e] = 0.0;
      st.status[q] = sigma > 0 ? kUpper : kLower;
      st.resid[q] = sigma * t;
      st.g += eta_of(st.status[q]) * rows_.row(q).transpose();
      st.basis[leave_pos] = e;

      if (st.iterations % kRefreshInterval == 0) {
        refresh(st);
      } else {
        replace_basis_row(st, leave_pos);
        solve_eta(st);
      }
    }
  }

  QuantileFit result(const SimplexState& st) const {
    QuantileFit fit;
    fit.beta.assign(st.beta.data(), st.beta.data() + st.beta.size());
    fit.iterations = st.iterations;
    fit.rank = rows_.cols();
    fit.basis_rows = st.basis;
    std::sort(fit.basis_rows.begin(), fit.basis_rows.end());
    double loss = 0.0;
    for (std::size_t j = 0; j < rows_.size(); ++j) loss += pinball_loss(st.resid[j], alpha_);
    fit.achieved_loss = loss / static_cast<double>(rows_.size());
    return fit;
  }

 private:
  struct Candidate {
    double t;
    std::size_t row;
    double abs_alpha;
    bool operator>(const Candidate& o) const { return t > o.t || (t == o.t && row > o.row); }
    bool operator<(const Candidate& o) const { return t < o.t || (t == o.t && row < o.row); }
  };

  static constexpr std::size_t kRefreshInterval = 32;

  void factor(SimplexState& st) const {
    const auto r = static_cast<Eigen::Index>(st.basis.size());
    Eigen::MatrixXd b(r, r);
    for (Eigen::Index k = 0; k < r; ++k) b.row(k) = rows_.row(st.basis[static_cast<std::size_t>(k)]);
    st.inv = b.partialPivLu().inverse();
  }

  // Sherman-Morrison update after basis position k received a new row.
  void replace_basis_row(SimplexState& st, std::size_t k) const {
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd u = st.inv.col(kk);
    Eigen::RowVectorXd v = rows_.row(st.basis[k]) * st.inv;
    const double pivot = v(kk);
    v(kk) -= 1.0;
    st.inv.noalias() -= (u / pivot) * v;
  }

  void solve_beta(SimplexState& st) const {
    Eigen::VectorXd sb(static_cast<Eigen::Index>(st.basis.size()));
    for (std::size_t k = 0; k < st.basis.size(); ++k) {
      sb(static_cast<Eigen::Index>(k)) = rows_.score(st.basis[k]);
    }
    st.beta = st.inv * sb;
  }

  void recompute_residuals(SimplexState& st) const {
    std::vector<double> fitted;
    rows_.products(st.beta, fitted);
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      st.resid[j] = st.status[j] == kBasic ? 0.0 : rows_.score(j) - fitted[j];
    }
  }

  void recompute_g(SimplexState& st) const {
    const std::size_t nb = rows_.n_base();
    Eigen::VectorXd eta(static_cast<Eigen::Index>(nb));
    for (std::size_t j = 0; j < nb; ++j) {
      eta(static_cast<Eigen::Index>(j)) = st.status[j] == kBasic ? 0.0 : eta_of(st.status[j]);
    }
    st.g.noalias() = rows_.base->transpose() * eta;
    if (rows_.extra && st.status[nb] != kBasic) st.g += eta_of(st.status[nb]) * *rows_.extra;
  }

  void solve_eta(SimplexState& st) const { st.eta_basic.noalias() = -(st.inv.transpose() * st.g); }

  // Rebuilds beta, residuals and g from the basis; moves any nonbasic row
  // whose residual sign disagrees with its bound. Returns the number moved.
  // With always_rebuild unset the basis inverse is reused, and g and eta are
  // left alone when nothing moved.
  std::size_t refresh(SimplexState& st, bool always_rebuild = true) const {
    if (always_rebuild) factor(st);
    solve_beta(st);
    recompute_residuals(st);
    std::size_t moved = 0;
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      if (st.status[j] == kUpper && st.resid[j] < -resid_tol_) {
        st.status[j] = kLower;
        ++moved;
      } else if (st.status[j] == kLower && st.resid[j] > resid_tol_) {
        st.status[j] = kUpper;
        ++moved;
      }
    }
    if (moved == 0 && !always_rebuild) return 0;
    recompute_g(st);
    solve_eta(st);
    return moved;
  }

  const RowSource& rows_;
  double alpha_;
  double upper_;
  double lower_;
  double resid_tol_;
  double feas_tol_;
  double row_scale_;
};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
}

}  // namespace

struct PinballProblem::Impl {
  double alpha = 0.1;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<Eigen::Index> kept;     // independent columns, ascending
  std::vector<Eigen::Index> dropped;  // columns spanned by the kept ones
  Eigen::MatrixXd dependency;         // Phi_dropped = Phi_kept * dependency
  RowMatrix reduced;
  simd::BlockedRows blocked;
  std::vector<double> scores;
  double score_scale = 1.0;
  double row_scale = 0.0;
  SimplexState base_state;
  QuantileFit base;

  RowSource source() const {
    RowSource src;
    src.base = &reduced;
    src.blocked = &blocked;
    src.base_scores = &scores;
    return src;
  }

  std::vector<double> expand(const Eigen::VectorXd& beta_kept) const {
    std::vector<double> beta(p, 0.0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      beta[static_cast<std::size_t>(kept[k])] = beta_kept(static_cast<Eigen::Index>(k));
    }
    return beta;
  }
};

PinballProblem::PinballProblem(const RowMatrix& rows, std::vector<double> scores, double alpha)
    : impl_(std::make_unique<Impl>()) {
  check_alpha(alpha);
  auto& m = *impl_;
  m.alpha = alpha;
  m.n = static_cast<std::size_t>(rows.rows());
  m.p = static_cast<std::size_t>(rows.cols());
  if (m.n == 0) throw ArgumentError("quantile regression needs at least one row");
  if (m.p == 0) throw ArgumentError("quantile regression needs at least one basis column");
  if (scores.size() != m.n) throw ArgumentError("quantile regression: score count mismatch");
  for (double s : scores) {
    if (!std::isfinite(s)) throw ArgumentError("quantile regression: scores must be finite");
  }
  if (!rows.allFinite()) throw ArgumentError("quantile regression: design must be finite");
  m.scores = std::move(scores);
  for (double s : m.scores) m.score_scale = std::max(m.score_scale, std::abs(s));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rows);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = 0; k < rows.cols(); ++k) {
    (k < rank ? m.kept : m.dropped).push_back(perm(k));
  }
  std::sort(m.kept.begin(), m.kept.end());
  std::sort(m.dropped.begin(), m.dropped.end());
  if (rank == 0) {
    m.base.beta.assign(m.p, 0.0);
    double loss = 0.0;
    for (double s : m.scores) loss += pinball_loss(s, alpha);
    m.base.achieved_loss = loss / static_cast<double>(m.n);
    return;
  }

  m.reduced.resize(rows.rows(), rank);
  for (Eigen::Index k = 0; k < rank; ++k) m.reduced.col(k) = rows.col(m.kept[static_cast<std::size_t>(k)]);
  if (!m.dropped.empty()) {
    Eigen::MatrixXd dep_cols(rows.rows(), static_cast<Eigen::Index>(m.dropped.size()));
    for (std::size_t k = 0; k < m.dropped.size(); ++k) {
      dep_cols.col(static_cast<Eigen::Index>(k)) = rows.col(m.dropped[k]);
    }
    m.dependency = Eigen::MatrixXd(m.reduced).colPivHouseholderQr().solve(dep_cols);
  }
  m.blocked = simd::BlockedRows::from_row_major(
      std::span<const double>(m.reduced.data(), static_cast<std::size_t>(m.reduced.size())),
      static_cast<std::size_t>(rank));

  m.row_scale = m.reduced.cwiseAbs().maxCoeff();
  const RowSource src = m.source();
  DualSimplex solver(src, alpha, m.row_scale, m.score_scale);
  solver.cold_start(m.base_state);
  solver.run(m.base_state);
  m.base = solver.result(m.base_state);
  m.base.beta = m.expand(m.base_state.beta);
}

PinballProblem::~PinballProblem() = default;
PinballProblem::PinballProblem(PinballProblem&&) noexcept = default;
PinballProblem& PinballProblem::operator=(PinballProblem&&) noexcept = default;

const QuantileFit& PinballProblem::base_fit() const { return impl_->base; }
std::size_t PinballProblem::size() const { return impl_->n; }
std::size_t PinballProblem::columns() const { return impl_->p; }
double PinballProblem::alpha() const { return impl_->alpha; }

AugmentedFit PinballProblem::augment(std::span<const double> phi, double score, bool warm) const {
  const auto& m = *impl_;
  if (phi.size() != m.p) throw ArgumentError("augmented row has the wrong number of columns");
  if (!std::isfinite(score)) throw ArgumentError("imputed score must be finite");
  AugmentedFit out;

  Eigen::VectorXd kept_part(static_cast<Eigen::Index>(m.kept.size()));
  for (std::size_t k = 0; k < m.kept.size(); ++k) {
    kept_part(static_cast<Eigen::Index>(k)) = phi[static_cast<std::size_t>(m.kept[k])];
  }
  // A row outside the span of the calibration design adds a free direction:
  // the refit interpolates it and leaves every calibration residual alone.
  bool in_span = true;
  double phi_scale = 1.0;
  for (double v : phi) phi_scale = std::max(phi_scale, std::abs(v));
  if (m.kept.empty()) {
    in_span = std::all_of(phi.begin(), phi.end(), [](double v) { return v == 0.0; });
  } else if (!m.dropped.empty()) {
    const Eigen::VectorXd implied = m.dependency.transpose() * kept_part;
    for (std::size_t k = 0; k < m.dropped.size(); ++k) {
      const double actual = phi[static_cast<std::size_t>(m.dropped[k])];
      if (std::abs(actual - implied(static_cast<Eigen::Index>(k))) > 1e-9 * phi_scale) {
        in_span = false;
        break;
      }
    }
  }
  if (!in_span) {
    out.included = true;
    out.fitted = score;
    out.residual = 0.0;
    out.fit = m.base;
    out.fit.achieved_loss = m.base.achieved_loss * static_cast<double>(m.n) /
                            static_cast<double>(m.n + 1);
    out.fit.rank = m.base.rank + 1;
    return out;
  }
  if (m.kept.empty()) {
    out.fitted = 0.0;
    out.residual = score;
    out.included = score <= 0.0;
    out.fit = m.base;
    out.fit.achieved_loss = (m.base.achieved_loss * static_cast<double>(m.n) +
                             pinball_loss(score, m.alpha)) /
                            static_cast<double>(m.n + 1);
    return out;
  }

  RowSource src = m.source();
  src.extra = kept_part;
  src.extra_score = score;
  DualSimplex solver(src, m.alpha, std::max(m.row_scale, kept_part.cwiseAbs().maxCoeff()),
                     std::max(m.score_scale, std::abs(score)));
  SimplexState st;
  if (warm) {
    st = m.base_state;
    st.iterations = 0;
    solver.append_extra(st);
  } else {
    solver.cold_start(st);
  }
  solver.run(st);

  const std::size_t extra = m.n;
  out.fit = solver.result(st);
  out.fit.beta = m.expand(st.beta);
  out.fitted = kept_part.dot(st.beta);
  out.residual = st.status[extra] == 0 ? 0.0 : st.resid[extra];
  out.included = st.status[extra] == 0 || st.resid[extra] <= 0.0;
  return out;
}

QuantileFit fit_quantile_regression(const RowMatrix& rows, std::span<const double> scores,
                                    double alpha) {
  PinballProblem problem(rows, std::vector<double>(scores.begin(), scores.end()), alpha);
  return problem.base_fit();
}

}  // namespace trustcp
