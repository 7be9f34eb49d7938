#include "rbmcert/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert {

LcpSolution solve_lcp_pgs(const Matrix& m, const Vector& q,
                          const LcpOptions& options) {
  const int n = static_cast<int>(q.size());
  if (m.rows() != n || m.cols() != n) {
    throw InputError("lcp: matrix/vector size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (!(m(i, i) > 0.0)) throw InputError("lcp: diagonal must be positive");
  }
  LcpSolution sol;
  sol.lambda = Vector::Zero(n);
  if (n == 0 || q.minCoeff() >= 0.0) {
    sol.w = q;
    return sol;
  }
  const double scale = 1.0 + q.cwiseAbs().maxCoeff();
  Vector& lam = sol.lambda;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      const double wi = q(i) + m.row(i).dot(lam);
      const double next = std::max(0.0, lam(i) - wi / m(i, i));
      max_change = std::max(max_change, std::abs(next - lam(i)));
      lam(i) = next;
    }
    if (max_change <= options.tol * scale) {
      sol.w = q + m * lam;
      sol.sweeps = sweep;
      return sol;
    }
  }
  std::ostringstream os;
  os << "lcp: projected Gauss-Seidel did not converge in " << options.max_sweeps
     << " sweeps (n=" << n << ")";
  throw NumericalError(os.str());
}

}  // namespace rbmcert
