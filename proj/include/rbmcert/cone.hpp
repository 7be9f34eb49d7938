#pragma once

#include <string>
#include <vector>

#include "rbmcert/types.hpp"

namespace rbmcert {

inline constexpr double kGeometryTol = 1e-10;

// D = {x : n_i . x >= b_i}. Rows of `normals` are the unit inward normals.
// Every operation in this library that needs a cone requires b = 0.
class PolyhedralCone {
 public:
  PolyhedralCone(Matrix normals, Vector offsets);
  explicit PolyhedralCone(Matrix normals);

  static PolyhedralCone orthant(int dim);

  int dim() const { return static_cast<int>(normals_.cols()); }
  int num_faces() const { return static_cast<int>(normals_.rows()); }
  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  Vector normal(int i) const { return normals_.row(i).transpose(); }
  bool is_cone() const { return offsets_.cwiseAbs().maxCoeff() == 0.0; }
  bool is_orthant() const;

 private:
  Matrix normals_;
  Vector offsets_;
};

bool contains(const PolyhedralCone& cone, const Vector& x,
              double tol = kGeometryTol);

// Zero-based indices i with |n_i . x - b_i| <= tol. Throws InputError when x
// lies outside the cone.
std::vector<int> active_faces(const PolyhedralCone& cone, const Vector& x,
                              double tol = kGeometryTol);

// A point with N x > 0 and max |x_j| <= 1, or an empty vector if the
// interior is empty.
Vector interior_point(const PolyhedralCone& cone);

// Maximal face sets, ordered by size then lexicographically. A set I is
// maximal when every strictly larger J cuts D_I further; D_I always contains
// the apex, so nonemptiness is automatic.
std::vector<IndexSubset> enumerate_maximal_sets(const PolyhedralCone& cone,
                                                int limit = kExhaustiveLimit);

struct WeakExistenceFailure {
  IndexSubset subset;
  std::string matrix;  // "N'R" or "R'N"
};

struct WeakExistenceReport {
  bool ok = false;
  std::vector<IndexSubset> maximal_sets;
  std::vector<WeakExistenceFailure> failures;
};

// `reflection` is d x m with columns r_i normalized so n_i . r_i = 1.
WeakExistenceReport weak_existence_check(const PolyhedralCone& cone,
                                         const Matrix& reflection,
                                         int limit = kExhaustiveLimit);

}  // namespace rbmcert
