#include "rbmcert/matrix_classes.hpp"

#include <cmath>
#include <functional>

#include "rbmcert/errors.hpp"
#include "rbmcert/linear_program.hpp"

namespace rbmcert {
namespace {

constexpr double kSMargin = 1e-9;

void require_within_limit(const Matrix& m, int limit, const char* what) {
  if (m.rows() > limit) {
    throw CapabilityError(std::string(what) + ": dimension " +
                              std::to_string(m.rows()) +
                              " exceeds the exhaustive limit " +
                              std::to_string(limit),
                          limit);
  }
}

// Visits nonempty subsets of {0..d-1} in lexicographic order of their sorted
// index lists. Stops when `visit` returns false.
bool for_each_subset_lex(int d, const std::function<bool(const IndexSubset&)>& visit) {
  std::vector<int> stack;
  std::function<bool(int)> extend = [&](int next) -> bool {
    for (int i = next; i < d; ++i) {
      stack.push_back(i);
      if (!visit(IndexSubset(d, stack))) return false;
      if (!extend(i + 1)) return false;
      stack.pop_back();
    }
    return true;
  };
  return extend(0);
}

// Turns an LP solution u (possibly with zero entries) into a strictly
// positive witness that keeps Mu > 0.
Vector strict_witness(const Matrix& m, const Vector& u, double margin) {
  const double row_norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double eps = margin / (2.0 * (1.0 + row_norm));
  return u.array() + eps;
}

}  // namespace

Matrix principal_submatrix(const Matrix& m, const IndexSubset& subset) {
  if (m.rows() != m.cols() || subset.parent_dim() != m.rows()) {
    throw InputError("principal_submatrix: subset parent dimension " +
                     std::to_string(subset.parent_dim()) +
                     " does not match matrix dimension " +
                     std::to_string(m.rows()));
  }
  const int k = subset.size();
  Matrix out(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      out(a, b) = m(subset.indices()[a], subset.indices()[b]);
    }
  }
  return out;
}

SMatrixResult is_s_matrix(const Matrix& m) {
  require_square_finite(m, "is_s_matrix");
  const int d = static_cast<int>(m.rows());
  SMatrixResult res;

  // Cheap witnesses first: u = 1 and u = M^{-1} 1.
  const Vector ones = Vector::Ones(d);
  const Vector m1 = m * ones;
  if (m1.minCoeff() > kSMargin) {
    res.value = true;
    res.witness = ones;
    res.margin = m1.minCoeff();
    return res;
  }
  Eigen::FullPivLU<Matrix> lu(m);
  if (lu.isInvertible()) {
    const Vector u = lu.solve(ones);
    if (u.minCoeff() > 0.0) {
      const Vector scaled = u / u.maxCoeff();
      const double t = (m * scaled).minCoeff();
      if (t > kSMargin) {
        res.value = true;
        res.witness = scaled;
        res.margin = t;
        return res;
      }
    }
  }

  // Variables (u_1..u_d, t); maximize t.
  LpProblem lp;
  lp.c = Vector::Zero(d + 1);
  lp.c(d) = 1.0;
  lp.a_ub = Matrix::Zero(2 * d, d + 1);
  lp.b_ub = Vector::Zero(2 * d);
  lp.a_ub.topLeftCorner(d, d) = -m;
  lp.a_ub.block(0, d, d, 1).setOnes();
  lp.a_ub.bottomLeftCorner(d, d).setIdentity();
  lp.b_ub.tail(d).setOnes();
  lp.a_eq = Matrix(0, d + 1);
  lp.b_eq = Vector(0);
  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw NumericalError("is_s_matrix: linear program did not reach an optimum");
  }
  res.margin = sol.x(d);
  res.value = res.margin > kSMargin;
  if (res.value) {
    res.witness = strict_witness(m, sol.x.head(d), res.margin);
  }
  return res;
}

CompletelySResult is_completely_s(const Matrix& m, int limit) {
  require_square_finite(m, "is_completely_s");
  require_within_limit(m, limit, "is_completely_s");
  CompletelySResult res;
  res.value = for_each_subset_lex(static_cast<int>(m.rows()), [&](const IndexSubset& s) {
    if (is_s_matrix(principal_submatrix(m, s)).value) return true;
    res.failing = s;
    return false;
  });
  return res;
}

ZMatrixResult is_z_matrix(const Matrix& m) {
  require_square_finite(m, "is_z_matrix");
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) > 0.0) return {false, std::make_pair(i, j)};
    }
  }
  return {true, std::nullopt};
}

bool is_reflection_nonsingular_m(const Matrix& m, int limit) {
  require_square_finite(m, "is_reflection_nonsingular_m");
  require_within_limit(m, limit, "is_reflection_nonsingular_m");
  for (int i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 1.0) return false;
  }
  return is_z_matrix(m).value && is_completely_s(m, limit).value;
}

namespace {

// Looks for x >= 0, x != 0 (normalized to sum 1) in the column span of `v`.
std::optional<Vector> nonnegative_in_span(const Matrix& v) {
  const int n = static_cast<int>(v.rows());
  const int k = static_cast<int>(v.cols());
  if (k == 1) {
    Vector col = v.col(0);
    const double scale = col.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    if (col.minCoeff() >= -tol || col.maxCoeff() <= tol) {
      if (col.sum() < 0) col = -col;
      col = col.cwiseMax(0.0);
      return col / col.sum();
    }
    return std::nullopt;
  }
  LpProblem lp;
  lp.c = Vector::Zero(k);
  lp.a_ub = -v;
  lp.b_ub = Vector::Zero(n);
  lp.a_eq = v.colwise().sum();
  lp.b_eq = Vector::Ones(1);
  lp.free_var.assign(k, true);
  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) return std::nullopt;
  Vector x = (v * sol.x).cwiseMax(0.0);
  if (x.sum() <= 0.0) return std::nullopt;
  return x / x.sum();
}

}  // namespace

CopositivityResult is_strictly_copositive(const Matrix& m, int limit) {
  require_square_finite(m, "is_strictly_copositive");
  require_within_limit(m, limit, "is_strictly_copositive");
  const Matrix sym = 0.5 * (m + m.transpose());
  const int d = static_cast<int>(sym.rows());
  CopositivityResult res;

  // Positive definite or entrywise nonnegative with positive diagonal:
  // strictly copositive without enumeration.
  if (Eigen::LLT<Matrix>(sym).info() == Eigen::Success) {
    res.value = true;
    return res;
  }
  if (sym.minCoeff() >= 0.0 && sym.diagonal().minCoeff() > 0.0) {
    res.value = true;
    return res;
  }

  res.value = for_each_subset_lex(d, [&](const IndexSubset& s) {
    const Matrix block = principal_submatrix(sym, s);
    if (Eigen::LLT<Matrix>(block).info() == Eigen::Success) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block);
    const Vector& ev = eig.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    int count = 0;
    while (count < ev.size() && ev(count) <= tol) ++count;
    if (count == 0) return true;
    const auto x = nonnegative_in_span(eig.eigenvectors().leftCols(count));
    if (!x) return true;
    Vector full = Vector::Zero(d);
    for (int a = 0; a < s.size(); ++a) full(s.indices()[a]) = (*x)(a);
    res.violation = full;
    res.subset = s;
    return false;
  });
  return res;
}

bool is_nonnegative(const Matrix& m) {
  require_square_finite(m, "is_nonnegative");
  return m.minCoeff() >= 0.0;
}

ClassificationReport classify(const Matrix& input, const ClassifyOptions& options) {
  require_square_finite(input, "classify");
  Matrix m = input;
  if (options.round_decimals) {
    const double f = std::pow(10.0, *options.round_decimals);
    m = m.unaryExpr([f](double v) { return std::round(v * f) / f; });
  }
  // Check the limit up front so no partial work is done.
  if (m.rows() > options.limit) {
    throw CapabilityError("classify: dimension " + std::to_string(m.rows()) +
                              " exceeds the exhaustive limit " +
                              std::to_string(options.limit) +
                              " (completely-S and copositivity tests)",
                          options.limit);
  }
  ClassificationReport r;
  r.dim = static_cast<int>(m.rows());
  r.s = is_s_matrix(m);
  r.completely_s = is_completely_s(m, options.limit);
  r.z = is_z_matrix(m);
  bool unit_diag = true;
  for (int i = 0; i < m.rows(); ++i) unit_diag = unit_diag && m(i, i) == 1.0;
  r.reflection_m = unit_diag && r.z.value && r.completely_s.value;
  r.copositive = is_strictly_copositive(m, options.limit);
  r.nonnegative = is_nonnegative(m);
  return r;
}

}  // namespace rbmcert
