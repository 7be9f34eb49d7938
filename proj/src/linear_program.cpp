#include "rbmcert/linear_program.hpp"

#include <cmath>
#include <limits>

#include "rbmcert/errors.hpp"

namespace rbmcert {
namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
  Matrix t;                 // row 0: objective, rows 1..m: constraints
  std::vector<int> basis;   // basic column per constraint row
  int num_cols = 0;         // columns excluding rhs

  double& rhs(int row) { return t(row, num_cols); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r < t.rows(); ++r) {
      if (r != row && t(r, col) != 0.0) {
        t.row(r) -= t(r, col) * t.row(row);
      }
    }
    basis[row - 1] = col;
  }

  // Runs simplex iterations on the current objective row over columns with
  // allowed[col] set. Returns false if unbounded.
  bool optimize(const std::vector<bool>& allowed) {
    const int m = static_cast<int>(basis.size());
    const long max_iter = 200L * (m + num_cols + 10);
    for (long iter = 0; iter < max_iter; ++iter) {
      int enter = -1;
      for (int j = 0; j < num_cols; ++j) {
        if (allowed[j] && t(0, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 1; r <= m; ++r) {
        const double a = t(r, enter);
        if (a > kPivotTol) {
          const double ratio = t(r, num_cols) / a;
          if (ratio < best_ratio - 1e-14 ||
              (std::abs(ratio - best_ratio) <= 1e-14 && leave > 0 &&
               basis[r - 1] < basis[leave - 1])) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw NumericalError("simplex: iteration limit reached");
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& p) {
  const int n_orig = static_cast<int>(p.c.size());
  const int m_ub = static_cast<int>(p.a_ub.rows());
  const int m_eq = static_cast<int>(p.a_eq.rows());
  if ((m_ub > 0 && p.a_ub.cols() != n_orig) || p.b_ub.size() != m_ub ||
      (m_eq > 0 && p.a_eq.cols() != n_orig) || p.b_eq.size() != m_eq) {
    throw InputError("linear program: inconsistent dimensions");
  }
  const bool any_free = !p.free_var.empty();
  // Column map: each original variable -> (plus column, minus column or -1).
  std::vector<int> plus_col(n_orig), minus_col(n_orig, -1);
  int n = 0;
  for (int j = 0; j < n_orig; ++j) {
    plus_col[j] = n++;
    if (any_free && p.free_var[j]) minus_col[j] = n++;
  }
  const int m = m_ub + m_eq;
  // Rows needing an artificial variable: negative rhs in <= rows, all = rows.
  std::vector<int> art_col(m, -1);
  int num_art = 0;
  for (int i = 0; i < m_ub; ++i) {
    if (p.b_ub(i) < 0) art_col[i] = num_art++;
  }
  for (int i = 0; i < m_eq; ++i) art_col[m_ub + i] = num_art++;

  const int slack0 = n;
  const int art0 = n + m_ub;
  Tableau tab;
  tab.num_cols = n + m_ub + num_art;
  tab.t = Matrix::Zero(m + 1, tab.num_cols + 1);
  tab.basis.assign(m, -1);

  auto fill_row = [&](int row, const Eigen::RowVectorXd& a, double sign) {
    for (int j = 0; j < n_orig; ++j) {
      tab.t(row, plus_col[j]) = sign * a(j);
      if (minus_col[j] >= 0) tab.t(row, minus_col[j]) = -sign * a(j);
    }
  };
  for (int i = 0; i < m_ub; ++i) {
    const double sign = p.b_ub(i) < 0 ? -1.0 : 1.0;
    fill_row(i + 1, p.a_ub.row(i), sign);
    tab.t(i + 1, slack0 + i) = sign;
    tab.rhs(i + 1) = sign * p.b_ub(i);
    if (art_col[i] >= 0) {
      tab.t(i + 1, art0 + art_col[i]) = 1.0;
      tab.basis[i] = art0 + art_col[i];
    } else {
      tab.basis[i] = slack0 + i;
    }
  }
  for (int i = 0; i < m_eq; ++i) {
    const int row = m_ub + i + 1;
    const double sign = p.b_eq(i) < 0 ? -1.0 : 1.0;
    fill_row(row, p.a_eq.row(i), sign);
    tab.rhs(row) = sign * p.b_eq(i);
    tab.t(row, art0 + art_col[m_ub + i]) = 1.0;
    tab.basis[m_ub + i] = art0 + art_col[m_ub + i];
  }

  std::vector<bool> allowed(tab.num_cols, true);
  if (num_art > 0) {
    // Phase 1: maximize -sum(artificials).
    for (int k = 0; k < num_art; ++k) tab.t(0, art0 + k) = 1.0;
    for (int r = 1; r <= m; ++r) {
      if (tab.basis[r - 1] >= art0) tab.t.row(0) -= tab.t.row(r);
    }
    tab.optimize(allowed);
    const double scale = 1.0 + tab.t.col(tab.num_cols).cwiseAbs().maxCoeff();
    if (tab.t(0, tab.num_cols) < -1e-9 * scale) {
      return LpResult{LpStatus::kInfeasible, Vector(), 0.0};
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 1; r <= m; ++r) {
      if (tab.basis[r - 1] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(tab.t(r, j)) > 1e-9) {
          tab.pivot(r, j);
          break;
        }
      }
    }
    for (int k = 0; k < num_art; ++k) allowed[art0 + k] = false;
  }

  // Phase 2.
  tab.t.row(0).setZero();
  for (int j = 0; j < n_orig; ++j) {
    tab.t(0, plus_col[j]) = -p.c(j);
    if (minus_col[j] >= 0) tab.t(0, minus_col[j]) = p.c(j);
  }
  for (int r = 1; r <= m; ++r) {
    const int b = tab.basis[r - 1];
    if (tab.t(0, b) != 0.0) tab.t.row(0) -= tab.t(0, b) * tab.t.row(r);
  }
  if (!tab.optimize(allowed)) {
    return LpResult{LpStatus::kUnbounded, Vector(), 0.0};
  }

  Vector y = Vector::Zero(tab.num_cols);
  for (int r = 1; r <= m; ++r) y(tab.basis[r - 1]) = tab.rhs(r);
  LpResult out;
  out.status = LpStatus::kOptimal;
  out.x.resize(n_orig);
  for (int j = 0; j < n_orig; ++j) {
    out.x(j) = y(plus_col[j]) - (minus_col[j] >= 0 ? y(minus_col[j]) : 0.0);
  }
  out.objective = p.c.dot(out.x);
  return out;
}

}  // namespace rbmcert
