#include "c2trace/lp.hpp"

#include <gmpxx.h>

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

template <class T>
struct Num;

template <>
struct Num<mpq_class> {
  static int sign(const mpq_class& v) { return sgn(v); }
};

template <>
struct Num<double> {
  static constexpr double eps = 1e-11;
  static int sign(double v) { return v > eps ? 1 : (v < -eps ? -1 : 0); }
};

template <class T>
class Tableau {
public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows) * (cols + 1)), basis_(rows) {}

  T& at(int i, int j) { return a_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  T& rhs(int i) { return at(i, n_); }
  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<int>& basis() { return basis_; }
  std::vector<T>& reduced() { return red_; }
  T& value() { return obj_; }

  void pivot(int r, int c) {
    const T p = at(r, c);
    std::vector<int> nz;
    for (int j = 0; j <= n_; ++j) {
      if (Num<T>::sign(at(r, j)) == 0 && j != c) {
        at(r, j) = T{};
        continue;
      }
      at(r, j) /= p;
      nz.push_back(j);
    }
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const T f = at(i, c);
      if (Num<T>::sign(f) == 0) {
        at(i, c) = T{};
        continue;
      }
      for (int j : nz) at(i, j) -= f * at(r, j);
    }
    const T f = red_[c];
    if (Num<T>::sign(f) != 0) {
      for (int j : nz) {
        if (j == n_)
          obj_ -= f * at(r, j);
        else
          red_[j] -= f * at(r, j);
      }
    }
    red_[c] = T{};
    basis_[r] = c;
  }

  // Runs Bland pivots over columns [0, allowed). Returns false if unbounded.
  bool optimize(int allowed, int& pivots) {
    for (;;) {
      int c = -1;
      for (int j = 0; j < allowed; ++j)
        if (Num<T>::sign(red_[j]) < 0) {
          c = j;
          break;
        }
      if (c < 0) return true;
      int r = -1;
      T best{};
      for (int i = 0; i < m_; ++i) {
        if (Num<T>::sign(at(i, c)) <= 0) continue;
        T ratio = rhs(i) / at(i, c);
        if (r < 0 || ratio < best || (ratio == best && basis_[i] < basis_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r < 0) return false;
      pivot(r, c);
      ++pivots;
    }
  }

  void set_objective(const std::vector<T>& c) {
    red_ = c;
    red_.resize(n_);
    obj_ = T{};
    for (int i = 0; i < m_; ++i) {
      const T cb = c[basis_[i]];
      if (Num<T>::sign(cb) == 0) continue;
      for (int j = 0; j < n_; ++j) red_[j] -= cb * at(i, j);
      obj_ -= cb * rhs(i);
    }
  }

  void drop_row(int r) {
    for (int j = 0; j <= n_; ++j) at(r, j) = at(m_ - 1, j);
    basis_[r] = basis_[m_ - 1];
    --m_;
    basis_.pop_back();
    a_.resize(static_cast<std::size_t>(m_) * (n_ + 1));
  }

private:
  int m_, n_;
  std::vector<T> a_;
  std::vector<int> basis_;
  std::vector<T> red_;
  T obj_{};
};

}  // namespace

template <class T>
LpSolution<T> solve_simplex(const LinearProgram<T>& lp) {
  const int nv = static_cast<int>(lp.cost.size());
  // Column layout: x+ per variable, x- for free ones, slacks/surplus, artificials.
  std::vector<int> neg_col(nv, -1);
  int ncols = nv;
  for (int j = 0; j < nv; ++j)
    if (lp.free_var[j]) neg_col[j] = ncols++;
  const int m = static_cast<int>(lp.rows.size());
  std::vector<int> sign(m, 1);
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  for (int i = 0; i < m; ++i) {
    if (Num<T>::sign(lp.rows[i].rhs) < 0) sign[i] = -1;
    if (lp.rows[i].kind == RowKind::less_equal) slack_col[i] = ncols++;
  }
  const int first_art = ncols;
  for (int i = 0; i < m; ++i) {
    const bool slack_basic = lp.rows[i].kind == RowKind::less_equal && sign[i] > 0;
    if (!slack_basic) art_col[i] = ncols++;
  }

  Tableau<T> tab(m, ncols);
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    for (const auto& [j, v] : row.coef) {
      tab.at(i, j) += sign[i] * v;
      if (neg_col[j] >= 0) tab.at(i, neg_col[j]) -= sign[i] * v;
    }
    if (slack_col[i] >= 0) tab.at(i, slack_col[i]) = T(sign[i]);
    tab.rhs(i) = sign[i] * row.rhs;
    if (art_col[i] >= 0) {
      tab.at(i, art_col[i]) = T(1);
      tab.basis()[i] = art_col[i];
    } else {
      tab.basis()[i] = slack_col[i];
    }
  }

  LpSolution<T> sol;
  if (first_art < ncols) {
    std::vector<T> c1(ncols, T{});
    for (int j = first_art; j < ncols; ++j) c1[j] = T(1);
    tab.set_objective(c1);
    tab.optimize(ncols, sol.pivots);
    if (Num<T>::sign(-tab.value()) > 0) return sol;
    for (int i = tab.rows() - 1; i >= 0; --i) {
      if (tab.basis()[i] < first_art) continue;
      int c = -1;
      for (int j = 0; j < first_art; ++j)
        if (Num<T>::sign(tab.at(i, j)) != 0) {
          c = j;
          break;
        }
      if (c >= 0)
        tab.pivot(i, c);
      else
        tab.drop_row(i);
    }
  }
  std::vector<T> c2(ncols, T{});
  for (int j = 0; j < nv; ++j) {
    c2[j] = lp.cost[j];
    if (neg_col[j] >= 0) c2[neg_col[j]] = -lp.cost[j];
  }
  tab.set_objective(c2);
  if (!tab.optimize(first_art, sol.pivots)) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  std::vector<T> col(ncols, T{});
  for (int i = 0; i < tab.rows(); ++i) col[tab.basis()[i]] = tab.rhs(i);
  sol.x.assign(nv, T{});
  for (int j = 0; j < nv; ++j) {
    sol.x[j] = col[j];
    if (neg_col[j] >= 0) sol.x[j] -= col[neg_col[j]];
  }
  sol.objective = -tab.value();
  sol.status = LpStatus::optimal;
  return sol;
}

template LpSolution<mpq_class> solve_simplex(const LinearProgram<mpq_class>&);
template LpSolution<double> solve_simplex(const LinearProgram<double>&);

IpmSolution solve_ipm(const InequalityLp& lp, const IpmOptions& opts) {
  using Eigen::VectorXd;
  const Eigen::SparseMatrix<double>& a = lp.a;
  const Eigen::Index m = a.rows(), n = a.cols();
  if (lp.b.size() != m || lp.q.size() != n) throw ValidationError("LP dimensions disagree");
  const Eigen::SparseMatrix<double> at = a.transpose();

  VectorXd x = VectorXd::Zero(n);
  VectorXd s = (lp.b - a * x).cwiseMax(1.0);
  VectorXd y = VectorXd::Ones(m);
  const double scale = 1.0 + lp.b.lpNorm<Eigen::Infinity>() + lp.q.lpNorm<Eigen::Infinity>();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  Eigen::SparseMatrix<double> reg(n, n);
  reg.setIdentity();

  auto step_to_boundary = [](const VectorXd& v, const VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
  };

  IpmSolution sol, best;
  double best_merit = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const VectorXd rd = lp.q + at * y;
    const VectorXd rp = a * x + s - lp.b;
    const double mu = s.dot(y) / static_cast<double>(m);
    const double pobj = lp.q.dot(x);
    const double dobj = -lp.b.dot(y);
    sol.iterations = it;
    if (rd.lpNorm<Eigen::Infinity>() < opts.feas_tol * scale && rp.lpNorm<Eigen::Infinity>() < opts.feas_tol * scale &&
        std::abs(pobj - dobj) < opts.objective_tol * (1.0 + std::abs(pobj)) && mu < opts.gap_tol * scale) {
      sol.x = x;
      sol.y = y;
      sol.objective = pobj;
      return sol;
    }
    const double merit = std::max({rd.lpNorm<Eigen::Infinity>() / scale, rp.lpNorm<Eigen::Infinity>() / scale,
                                   std::abs(pobj - dobj) / (1.0 + std::abs(pobj))});
    if (!std::isfinite(merit) || mu < 1e-30 * scale) break;
    if (merit < best_merit) {
      best_merit = merit;
      best = {x, y, pobj, it, true};
    }

    const VectorXd d = y.cwiseQuotient(s);
    Eigen::SparseMatrix<double> normal = at * d.asDiagonal() * a;
    normal += (1e-12 * (1.0 + d.maxCoeff())) * reg;
    if (!analyzed) {
      ldlt.analyzePattern(normal);
      analyzed = true;
    }
    ldlt.factorize(normal);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("interior point factorization failed");

    auto solve_dir = [&](const VectorXd& rc, VectorXd& dx, VectorXd& ds, VectorXd& dy) {
      const VectorXd rhs = -rd - at * (d.cwiseProduct(rp) - rc.cwiseQuotient(s));
      dx = ldlt.solve(rhs);
      dy = d.cwiseProduct(a * dx + rp) - rc.cwiseQuotient(s);
      ds = -(rc + s.cwiseProduct(dy)).cwiseQuotient(y);
    };

    VectorXd dx, ds, dy;
    VectorXd rc = s.cwiseProduct(y);
    solve_dir(rc, dx, ds, dy);
    const double ap = step_to_boundary(s, ds);
    const double ad = step_to_boundary(y, dy);
    const double mu_aff = (s + ap * ds).dot(y + ad * dy) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3);
    rc = s.cwiseProduct(y) + ds.cwiseProduct(dy) - VectorXd::Constant(m, sigma * mu);
    solve_dir(rc, dx, ds, dy);
    const double alpha_p = std::min(1.0, 0.995 * step_to_boundary(s, ds));
    const double alpha_d = std::min(1.0, 0.995 * step_to_boundary(y, dy));
    x += alpha_p * dx;
    s += alpha_p * ds;
    y += alpha_d * dy;
  }
  if (best_merit <= opts.stall_tol) return best;
  throw ConvergenceError("interior point method did not converge");
}

}  // namespace c2trace
