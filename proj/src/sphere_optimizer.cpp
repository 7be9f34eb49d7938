#include "rbmcert/sphere_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "rbmcert/errors.hpp"
#include "rbmcert/lcp.hpp"
#include "rbmcert/linear_program.hpp"

namespace rbmcert {

struct SphereSection::GridCache {
  std::once_flag once;
  Matrix points;
};

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                           47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
                           107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163,
                           167, 173, 179, 181, 191, 193, 197, 199};

double radical_inverse(long n, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Vector halton_point(long index, int dim) {
  constexpr int kMaxDim = static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0]));
  if (dim > kMaxDim) throw CapabilityError("halton_point: dimension too large", kMaxDim);
  Vector p(dim);
  for (int j = 0; j < dim; ++j) p(j) = radical_inverse(index, kPrimes[j]);
  return p;
}

Matrix quasi_random_directions(int dim, int count, long offset) {
  const int pairs = (dim + 1) / 2;
  Matrix out(dim, count);
  for (int n = 0; n < count; ++n) {
    const Vector h = halton_point(offset + n, 2 * pairs);
    Vector g(2 * pairs);
    for (int p = 0; p < pairs; ++p) {
      const double u1 = std::max(h(2 * p), 1e-300);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double a = 2.0 * M_PI * h(2 * p + 1);
      g(2 * p) = r * std::cos(a);
      g(2 * p + 1) = r * std::sin(a);
    }
    Vector v = g.head(dim);
    const double norm = v.norm();
    if (norm == 0.0) {
      v.setZero();
      v(0) = 1.0;
    } else {
      v /= norm;
    }
    out.col(n) = v;
  }
  return out;
}

SphereSection::SphereSection(const PolyhedralCone& cone,
                             const std::vector<int>& equality_faces)
    : grid_cache_(std::make_shared<GridCache>()) {
  if (!cone.is_cone()) throw InputError("sphere section requires a cone (zero offsets)");
  const int d = cone.dim();
  if (equality_faces.empty()) {
    basis_ = Matrix::Identity(d, d);
  } else {
    Matrix eq(static_cast<int>(equality_faces.size()), d);
    for (std::size_t k = 0; k < equality_faces.size(); ++k) {
      eq.row(k) = cone.normals().row(equality_faces[k]);
    }
    Eigen::JacobiSVD<Matrix> svd(eq, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 ? 1 : 0;
    basis_ = svd.matrixV().rightCols(d - rank);
  }
  const Matrix g = cone.normals() * basis_;
  std::vector<int> keep;
  for (int i = 0; i < g.rows(); ++i) {
    if (g.row(i).norm() > 1e-12) keep.push_back(i);
  }
  constraints_.resize(static_cast<int>(keep.size()), basis_.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) constraints_.row(k) = g.row(keep[k]);
  gram_ = constraints_ * constraints_.transpose();
}

Vector SphereSection::project(const Vector& y) const {
  if (dim() == 0) return Vector();
  Vector p = y;
  if (constraints_.rows() > 0) {
    const Vector q = constraints_ * y;
    if (q.minCoeff() < 0.0) {
      LcpOptions opt;
      opt.tol = 1e-14;
      opt.max_sweeps = 100000;
      const LcpSolution sol = solve_lcp_pgs(gram_, q, opt);
      p = y + constraints_.transpose() * sol.lambda;
    }
  }
  const double norm = p.norm();
  if (norm <= 1e-9 * std::max(1.0, y.norm())) return Vector();
  return p / norm;
}

std::vector<Vector> SphereSection::starts(int count) const {
  std::vector<Vector> out;
  const int k = dim();
  if (k == 0) return out;
  if (k == 1) {
    for (double s : {1.0, -1.0}) {
      Vector y = Vector::Constant(1, s);
      if (constraints_.rows() == 0 || (constraints_ * y).minCoeff() >= -1e-12) {
        out.push_back(y);
      }
    }
    return out;
  }
  // LP probes along +-e_j find feasible points even for thin sections.
  for (int j = 0; j < k && static_cast<int>(out.size()) < count; ++j) {
    for (double s : {1.0, -1.0}) {
      LpProblem lp;
      lp.c = Vector::Zero(k);
      lp.c(j) = s;
      const int m = static_cast<int>(constraints_.rows());
      lp.a_ub = Matrix::Zero(m + 2 * k, k);
      lp.b_ub = Vector::Zero(m + 2 * k);
      lp.a_ub.topRows(m) = -constraints_;
      lp.a_ub.block(m, 0, k, k).setIdentity();
      lp.a_ub.block(m + k, 0, k, k) = -Matrix::Identity(k, k);
      lp.b_ub.tail(2 * k).setOnes();
      lp.a_eq = Matrix(0, k);
      lp.b_eq = Vector(0);
      lp.free_var.assign(k, true);
      const LpResult sol = solve_lp(lp);
      if (sol.status == LpStatus::kOptimal && sol.objective > 1e-9) {
        const Vector p = project(sol.x);
        if (p.size() > 0) out.push_back(p);
      }
    }
  }
  const Matrix dirs = quasi_random_directions(k, 8 * count, 17);
  for (int n = 0; n < dirs.cols() && static_cast<int>(out.size()) < count; ++n) {
    const Vector p = project(dirs.col(n));
    if (p.size() > 0) out.push_back(p);
  }
  return out;
}

const Matrix& SphereSection::grid(int count) const {
  std::call_once(grid_cache_->once, [&] {
    const Matrix dirs = quasi_random_directions(dim(), count, 1);
    Matrix pts(dim(), count);
    int n_ok = 0;
    for (int n = 0; n < count; ++n) {
      const Vector p = project(dirs.col(n));
      if (p.size() > 0) pts.col(n_ok++) = p;
    }
    grid_cache_->points = pts.leftCols(n_ok);
  });
  return grid_cache_->points;
}

namespace {

struct LocalResult {
  Vector y;
  double value;
  bool converged;
};

LocalResult projected_descent(const SphereSection& sec, const Objective& f,
                              const Vector& start, int max_iter) {
  const Matrix& b = sec.basis();
  auto fy = [&](const Vector& y) { return f.value(b * y); };
  auto gy = [&](const Vector& y) -> Vector { return b.transpose() * f.gradient(b * y); };

  Vector y = start;
  double val = fy(y);
  if (sec.dim() == 1) return {y, val, true};
  Vector g = gy(y);
  double alpha = 0.1 / std::max(1.0, g.norm());
  for (int it = 0; it < max_iter; ++it) {
    bool accepted = false;
    Vector y_new;
    double v_new = val;
    for (int bt = 0; bt < 80; ++bt) {
      y_new = sec.project(y - alpha * g);
      if (y_new.size() > 0) {
        v_new = fy(y_new);
        if (v_new <= val - 1e-4 * g.dot(y - y_new) && v_new <= val) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-300) break;
    }
    if (!accepted) return {y, val, true};
    const double step = (y_new - y).norm();
    const double drop = val - v_new;
    y = y_new;
    val = v_new;
    g = gy(y);
    if (step < 1e-13 || drop <= 1e-16 * std::max(1.0, std::abs(val))) {
      return {y, val, true};
    }
    alpha = std::min(alpha * 2.0, 1e6);
  }
  return {y, val, false};
}

}  // namespace

SphereExtremum minimize_on_sphere(const SphereSection& sec, const Objective& f,
                                  const SphereSearchOptions& opt) {
  SphereExtremum res;
  const std::vector<Vector> starts = sec.starts(opt.starts);
  if (starts.empty()) {
    res.empty = true;
    return res;
  }
  bool have = false;
  LocalResult best{};
  for (const Vector& s : starts) {
    const LocalResult r = projected_descent(sec, f, s, opt.max_iter);
    if (!have || r.value < best.value) {
      best = r;
      have = true;
    }
  }
  res.multistart_value = best.value;
  res.value = best.value;
  res.argmin = sec.basis() * best.y;
  res.converged = best.converged;

  if (sec.dim() >= 2 && sec.dim() <= opt.grid_max_dim && opt.grid_points > 0) {
    const Matrix& pts = sec.grid(opt.grid_points);
    if (pts.cols() > 0) {
      std::vector<std::pair<double, int>> vals(pts.cols());
      for (int n = 0; n < pts.cols(); ++n) {
        vals[n] = {f.value(sec.basis() * pts.col(n)), n};
      }
      const int polish = std::min<int>(4, static_cast<int>(vals.size()));
      std::partial_sort(vals.begin(), vals.begin() + polish, vals.end());
      LocalResult gbest{};
      bool ghave = false;
      for (int p = 0; p < polish; ++p) {
        const LocalResult r =
            projected_descent(sec, f, pts.col(vals[p].second), opt.max_iter);
        if (!ghave || r.value < gbest.value) {
          gbest = r;
          ghave = true;
        }
      }
      res.grid_used = true;
      res.grid_value = gbest.value;
      const double scale = std::max(std::abs(gbest.value), std::abs(best.value));
      res.flagged = std::abs(gbest.value - best.value) > opt.agreement_tol * scale + 1e-12;
      if (gbest.value < best.value) {
        res.value = gbest.value;
        res.argmin = sec.basis() * gbest.y;
        res.converged = gbest.converged;
      }
    }
  }
  return res;
}

SphereExtremum maximize_on_sphere(const SphereSection& sec, const Objective& f,
                                  const SphereSearchOptions& opt) {
  Objective neg{[&](const Vector& x) { return -f.value(x); },
                [&](const Vector& x) -> Vector { return -f.gradient(x); }};
  SphereExtremum r = minimize_on_sphere(sec, neg, opt);
  r.value = -r.value;
  r.grid_value = -r.grid_value;
  r.multistart_value = -r.multistart_value;
  return r;
}

}  // namespace rbmcert
