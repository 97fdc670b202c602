#pragma once

#include <Eigen/SparseCore>
#include <utility>
#include <vector>

namespace c2trace {

enum class RowKind { less_equal, equal };
enum class LpStatus { optimal, infeasible, unbounded };

// min c^T x subject to rows; variables are >= 0 unless marked free.
template <class T>
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, T>> coef;
    RowKind kind = RowKind::less_equal;
    T rhs{};
  };

  std::vector<T> cost;
  std::vector<bool> free_var;
  std::vector<Row> rows;

  int add_variable(T c, bool is_free) {
    cost.push_back(c);
    free_var.push_back(is_free);
    return static_cast<int>(cost.size()) - 1;
  }
  void add_row(std::vector<std::pair<int, T>> coef, RowKind kind, T rhs) {
    rows.push_back({std::move(coef), kind, std::move(rhs)});
  }
};

template <class T>
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<T> x;
  T objective{};
  int pivots = 0;
};

// Dense two-phase simplex with Bland's smallest-index rule, so the pivot
// sequence depends only on the input. Instantiated for mpq_class and double.
template <class T>
LpSolution<T> solve_simplex(const LinearProgram<T>& lp);

// min q^T x subject to A x <= b, x free.
struct InequalityLp {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
  Eigen::VectorXd q;
};

struct IpmOptions {
  int max_iterations = 200;
  double gap_tol = 1e-12;        // complementarity
  double objective_tol = 1e-10;  // relative primal-dual objective gap
  double feas_tol = 1e-10;
  // Once the iteration stalls, the best iterate is kept if its scaled
  // residuals and objective gap are below this.
  double stall_tol = 1e-6;
};

struct IpmSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // multipliers of the rows
  double objective = 0.0;
  int iterations = 0;
  bool relaxed = false;  // accepted under stall_tol
};

// Mehrotra predictor-corrector. Throws ConvergenceError when neither the
// strict nor the stall tolerance is met.
IpmSolution solve_ipm(const InequalityLp& lp, const IpmOptions& opts = {});

}  // namespace c2trace
