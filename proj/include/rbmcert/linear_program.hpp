#pragma once

#include <vector>

#include "rbmcert/types.hpp"

namespace rbmcert {

// maximize c'x subject to a_ub x <= b_ub, a_eq x = b_eq, x_j >= 0 unless
// free_var[j] is set. Either constraint block may have zero rows.
struct LpProblem {
  Vector c;
  Matrix a_ub;
  Vector b_ub;
  Matrix a_eq;
  Vector b_eq;
  std::vector<bool> free_var;  // empty means all variables nonnegative
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double objective = 0.0;
};

// Dense two-phase tableau simplex with Bland's anti-cycling rule.
LpResult solve_lp(const LpProblem& problem);

}  // namespace rbmcert
