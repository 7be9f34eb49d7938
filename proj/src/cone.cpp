#include "rbmcert/cone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbmcert/errors.hpp"
#include "rbmcert/linear_program.hpp"
#include "rbmcert/matrix_classes.hpp"

namespace rbmcert {

PolyhedralCone::PolyhedralCone(Matrix normals, Vector offsets)
    : normals_(std::move(normals)), offsets_(std::move(offsets)) {
  if (normals_.rows() < 1 || normals_.cols() < 1) {
    throw InputError("cone: need at least one face and dimension >= 1");
  }
  if (offsets_.size() != normals_.rows()) {
    throw InputError("cone: offsets length must equal number of faces");
  }
  if (!normals_.allFinite() || !offsets_.allFinite()) {
    throw InputError("cone: non-finite normals or offsets");
  }
  for (int i = 0; i < normals_.rows(); ++i) {
    const double norm = normals_.row(i).norm();
    if (std::abs(norm - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "cone: normal " << i + 1 << " has norm " << norm << ", expected 1";
      throw InputError(os.str());
    }
  }
  if (is_cone() && interior_point(*this).size() == 0) {
    throw InputError("cone: interior is empty (no x with N x > 0)");
  }
}

PolyhedralCone::PolyhedralCone(Matrix normals)
    : PolyhedralCone(normals, Vector::Zero(normals.rows())) {}

PolyhedralCone PolyhedralCone::orthant(int dim) {
  if (dim < 1) throw InputError("orthant: dimension must be >= 1");
  return PolyhedralCone(Matrix::Identity(dim, dim));
}

bool PolyhedralCone::is_orthant() const {
  return normals_.rows() == normals_.cols() &&
         normals_.isApprox(Matrix::Identity(dim(), dim()), 0.0) && is_cone();
}

bool contains(const PolyhedralCone& cone, const Vector& x, double tol) {
  if (x.size() != cone.dim()) {
    throw InputError("contains: point has length " + std::to_string(x.size()) +
                     ", cone dimension is " + std::to_string(cone.dim()));
  }
  const Vector slack = cone.normals() * x - cone.offsets();
  return slack.minCoeff() >= -tol;
}

std::vector<int> active_faces(const PolyhedralCone& cone, const Vector& x,
                              double tol) {
  if (!contains(cone, x, tol)) throw InputError("active_faces: x outside cone");
  const Vector slack = cone.normals() * x - cone.offsets();
  std::vector<int> out;
  for (int i = 0; i < slack.size(); ++i) {
    if (std::abs(slack(i)) <= tol) out.push_back(i);
  }
  return out;
}

Vector interior_point(const PolyhedralCone& cone) {
  const int d = cone.dim();
  const int m = cone.num_faces();
  // Variables (x free, t >= 0); maximize t s.t. N x >= t 1, |x_j| <= 1.
  LpProblem lp;
  lp.c = Vector::Zero(d + 1);
  lp.c(d) = 1.0;
  lp.a_ub = Matrix::Zero(m + 2 * d, d + 1);
  lp.b_ub = Vector::Zero(m + 2 * d);
  lp.a_ub.topLeftCorner(m, d) = -cone.normals();
  lp.a_ub.block(0, d, m, 1).setOnes();
  lp.a_ub.block(m, 0, d, d).setIdentity();
  lp.a_ub.block(m + d, 0, d, d) = -Matrix::Identity(d, d);
  lp.b_ub.tail(2 * d).setOnes();
  lp.a_eq = Matrix(0, d + 1);
  lp.b_eq = Vector(0);
  lp.free_var.assign(d + 1, true);
  lp.free_var[d] = false;
  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal || sol.x(d) <= kGeometryTol) return Vector();
  return sol.x.head(d);
}

namespace {

// max n_j . x over {x : n_i . x = 0 (i in I), n_k . x >= 0 (k not in I), |x| <= 1}.
double max_over_face(const PolyhedralCone& cone, unsigned long mask, int j) {
  const int d = cone.dim();
  const int m = cone.num_faces();
  std::vector<int> eq, ub;
  for (int i = 0; i < m; ++i) ((mask >> i) & 1UL ? eq : ub).push_back(i);
  LpProblem lp;
  lp.c = cone.normal(j);
  lp.a_ub = Matrix::Zero(static_cast<int>(ub.size()) + 2 * d, d);
  lp.b_ub = Vector::Zero(lp.a_ub.rows());
  for (std::size_t k = 0; k < ub.size(); ++k) lp.a_ub.row(k) = -cone.normals().row(ub[k]);
  const int off = static_cast<int>(ub.size());
  lp.a_ub.block(off, 0, d, d).setIdentity();
  lp.a_ub.block(off + d, 0, d, d) = -Matrix::Identity(d, d);
  lp.b_ub.tail(2 * d).setOnes();
  lp.a_eq = Matrix(static_cast<int>(eq.size()), d);
  for (std::size_t k = 0; k < eq.size(); ++k) lp.a_eq.row(k) = cone.normals().row(eq[k]);
  lp.b_eq = Vector::Zero(static_cast<int>(eq.size()));
  lp.free_var.assign(d, true);
  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) return 0.0;
  return sol.objective;
}

}  // namespace

std::vector<IndexSubset> enumerate_maximal_sets(const PolyhedralCone& cone, int limit) {
  const int m = cone.num_faces();
  if (m > limit) {
    throw CapabilityError("enumerate_maximal_sets: " + std::to_string(m) +
                              " faces exceeds the limit " + std::to_string(limit),
                          limit);
  }
  if (!cone.is_cone()) {
    throw InputError("enumerate_maximal_sets: only cones (zero offsets) are supported");
  }
  std::vector<IndexSubset> out;
  const unsigned long total = 1UL << m;
  for (unsigned long mask = 1; mask < total; ++mask) {
    bool maximal = true;
    for (int j = 0; j < m && maximal; ++j) {
      if ((mask >> j) & 1UL) continue;
      maximal = max_over_face(cone, mask, j) > kGeometryTol;
    }
    if (maximal) out.push_back(IndexSubset::from_mask(m, mask));
  }
  std::sort(out.begin(), out.end(), [](const IndexSubset& a, const IndexSubset& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

WeakExistenceReport weak_existence_check(const PolyhedralCone& cone,
                                         const Matrix& reflection, int limit) {
  const int d = cone.dim();
  const int m = cone.num_faces();
  if (reflection.rows() != d || reflection.cols() != m) {
    throw InputError("weak_existence_check: reflection matrix must be " +
                     std::to_string(d) + "x" + std::to_string(m));
  }
  if (!reflection.allFinite()) throw InputError("reflection matrix has non-finite entries");
  for (int i = 0; i < m; ++i) {
    const double dot = cone.normals().row(i).dot(reflection.col(i));
    if (std::abs(dot - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "reflection column " << i + 1 << " has n_i . r_i = " << dot << ", expected 1";
      throw InputError(os.str());
    }
  }
  WeakExistenceReport rep;
  rep.maximal_sets = enumerate_maximal_sets(cone, limit);
  const Matrix nr = cone.normals() * reflection;
  const Matrix rn = nr.transpose();
  for (const IndexSubset& s : rep.maximal_sets) {
    if (!is_s_matrix(principal_submatrix(nr, s)).value) {
      rep.failures.push_back({s, "N'R"});
    }
    if (!is_s_matrix(principal_submatrix(rn, s)).value) {
      rep.failures.push_back({s, "R'N"});
    }
  }
  rep.ok = rep.failures.empty();
  return rep;
}

}  // namespace rbmcert
