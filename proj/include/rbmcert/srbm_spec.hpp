#pragma once

#include "rbmcert/cone.hpp"

namespace rbmcert {

// SRBM(D, R, mu, A): reflection matrix R (d x m, columns r_i with
// n_i . r_i = 1), drift mu, covariance A (symmetric positive definite).
// Construction asserts the weak existence condition on maximal face sets.
class SrbmSpec {
 public:
  SrbmSpec(PolyhedralCone cone, Matrix reflection, Vector drift, Matrix covariance,
           bool check_existence = true);

  const PolyhedralCone& cone() const { return cone_; }
  const Matrix& reflection() const { return reflection_; }
  const Vector& drift() const { return drift_; }
  const Matrix& covariance() const { return covariance_; }
  // Lower Cholesky factor L with L L' = A.
  const Matrix& covariance_factor() const { return chol_; }
  int dim() const { return cone_.dim(); }
  int num_faces() const { return cone_.num_faces(); }

 private:
  PolyhedralCone cone_;
  Matrix reflection_;
  Vector drift_;
  Matrix covariance_;
  Matrix chol_;
};

}  // namespace rbmcert
