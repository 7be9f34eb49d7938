#pragma once

#include <optional>
#include <utility>

#include "rbmcert/types.hpp"

namespace rbmcert {

// [M]_I: rows and columns of `m` restricted to `subset`.
Matrix principal_submatrix(const Matrix& m, const IndexSubset& subset);

struct SMatrixResult {
  bool value = false;
  Vector witness;       // u > 0 with M u > 0 when value is true
  double margin = 0.0;  // optimal t of max{t : Mu >= t1, 0 <= u <= 1}
};

// Decided by the linear program max{t : Mu >= t 1, 0 <= u <= 1}; true iff
// the optimum exceeds 1e-9.
SMatrixResult is_s_matrix(const Matrix& m);

struct CompletelySResult {
  bool value = false;
  std::optional<IndexSubset> failing;  // lexicographically smallest
};

CompletelySResult is_completely_s(const Matrix& m,
                                  int limit = kExhaustiveLimit);

struct ZMatrixResult {
  bool value = false;
  std::optional<std::pair<int, int>> violating;  // zero-based (row, col)
};

ZMatrixResult is_z_matrix(const Matrix& m);

bool is_reflection_nonsingular_m(const Matrix& m,
                                 int limit = kExhaustiveLimit);

struct CopositivityResult {
  bool value = false;
  std::optional<Vector> violation;      // x >= 0, x != 0 with x'Mx <= 0
  std::optional<IndexSubset> subset;    // principal block that produced it
};

// Exact test for dim <= limit: the symmetric part of `m` is strictly
// copositive iff no principal submatrix has a nonnegative nonzero vector in
// the span of its eigenvectors with nonpositive eigenvalues.
CopositivityResult is_strictly_copositive(const Matrix& m,
                                          int limit = kExhaustiveLimit);

bool is_nonnegative(const Matrix& m);

struct ClassifyOptions {
  std::optional<int> round_decimals;  // applied before structural tests
  int limit = kExhaustiveLimit;
};

struct ClassificationReport {
  int dim = 0;
  SMatrixResult s;
  CompletelySResult completely_s;
  ZMatrixResult z;
  bool reflection_m = false;
  CopositivityResult copositive;
  bool nonnegative = false;
};

// Runs every test. Throws CapabilityError when dim exceeds options.limit.
ClassificationReport classify(const Matrix& m, const ClassifyOptions& options = {});

}  // namespace rbmcert
