#pragma once

#include "rbmcert/types.hpp"

namespace rbmcert {

struct LcpOptions {
  int max_sweeps = 10000;
  double tol = 1e-10;
};

struct LcpSolution {
  Vector lambda;  // >= 0
  Vector w;       // q + M lambda, >= 0 up to tolerance
  int sweeps = 0;
};

// Linear complementarity problem: find lambda >= 0 with w = q + M lambda >= 0
// and lambda'w = 0, by projected Gauss-Seidel sweeps. M must have a positive
// diagonal. Throws NumericalError when the sweep limit is reached.
LcpSolution solve_lcp_pgs(const Matrix& m, const Vector& q,
                          const LcpOptions& options = {});

}  // namespace rbmcert
