#pragma once

#include <vector>

#include "rbmcert/cone.hpp"
#include "rbmcert/lcp.hpp"

namespace rbmcert {

// Discrete path Z(t_k) = W(t_k) + R L(t_k). Columns are time records.
struct PathSample {
  std::vector<double> times;
  Matrix states;       // d x n
  Matrix local_times;  // m x n, L(0) = 0
  Matrix driving;      // d x n, W(0) = Z(0)
  // false for records inserted between grid times (boundary touches)
  std::vector<char> on_grid;

  int size() const { return static_cast<int>(times.size()); }
};

struct StepSolution {
  Vector z;
  Vector delta_l;
};

// One step of the discrete Skorohod map: Delta L >= 0 with
// z = z_prev + increment + R Delta L in D and (n_i . z) Delta L_i = 0.
// Projected Gauss-Seidel on M = N R (unit diagonal).
StepSolution skorohod_step(const PolyhedralCone& cone, const Matrix& reflection,
                           const Vector& z_prev, const Vector& increment,
                           const LcpOptions& options = {});

// Orthant with a reflection nonsingular M-matrix R = I - P: per step the
// fixed point Delta L = max(0, P Delta L - y) by Picard iteration.
// `x_path` holds X(t_0), X(t_1), ... as columns with X(t_0) >= 0.
PathSample skorohod_solve_orthant(const Matrix& reflection, const Matrix& x_path,
                                  const std::vector<double>& times = {});

// Same driving path through skorohod_step.
PathSample skorohod_solve_cone(const PolyhedralCone& cone, const Matrix& reflection,
                               const Matrix& x_path, const std::vector<double>& times = {});

struct InvariantReport {
  double identity_residual = 0.0;   // max |Z - W - R L| / (1 + |W| + |R L|)
  double min_face_value = 0.0;      // min_i,k n_i . Z(t_k)
  bool monotone = true;             // every Delta L_i >= 0
  double complementarity = 0.0;     // sum of Delta L_i off face i
  long records = 0;

  bool ok() const {
    return identity_residual <= 1e-9 && monotone && complementarity == 0.0 &&
           min_face_value >= -1e-8;
  }
};

// Streaming checker of identity, monotonicity, complementarity and
// containment, fed one record at a time.
class InvariantMonitor {
 public:
  InvariantMonitor(const PolyhedralCone& cone, const Matrix& reflection);
  void observe(const Vector& z, const Vector& w, const Vector& l, const Vector& delta_l);
  const InvariantReport& report() const { return report_; }
  void merge(const InvariantMonitor& other);

 private:
  const PolyhedralCone* cone_;
  const Matrix* reflection_;
  InvariantReport report_;
};

InvariantReport check_path(const PolyhedralCone& cone, const Matrix& reflection,
                           const PathSample& path);

}  // namespace rbmcert
