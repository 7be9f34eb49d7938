#include "rbmcert/skorohod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert {

StepSolution skorohod_step(const PolyhedralCone& cone, const Matrix& reflection,
                           const Vector& z_prev, const Vector& increment,
                           const LcpOptions& options) {
  const Vector y = z_prev + increment;
  const Vector q = cone.normals() * y;
  StepSolution s;
  if (q.minCoeff() >= 0.0) {
    s.z = y;
    s.delta_l = Vector::Zero(cone.num_faces());
    return s;
  }
  const Matrix m = cone.normals() * reflection;
  const LcpSolution lcp = solve_lcp_pgs(m, q, options);
  s.delta_l = lcp.lambda;
  s.z = y + reflection * lcp.lambda;
  return s;
}

namespace {

PathSample empty_path(int d, int m, int n, const std::vector<double>& times) {
  if (!times.empty() && static_cast<int>(times.size()) != n) {
    throw InputError("skorohod: times length must equal the number of path columns");
  }
  PathSample p;
  p.times = times;
  if (p.times.empty()) {
    for (int k = 0; k < n; ++k) p.times.push_back(k);
  }
  p.states.resize(d, n);
  p.local_times.resize(m, n);
  p.driving.resize(d, n);
  p.on_grid.assign(n, 1);
  return p;
}

}  // namespace

PathSample skorohod_solve_orthant(const Matrix& reflection, const Matrix& x_path,
                                  const std::vector<double>& times) {
  require_square_finite(reflection, "R");
  const int d = static_cast<int>(reflection.rows());
  const int n = static_cast<int>(x_path.cols());
  if (x_path.rows() != d || n < 1) throw InputError("skorohod: path must be d x n, n >= 1");
  if (x_path.col(0).minCoeff() < 0.0) throw InputError("skorohod: X(0) must lie in the orthant");
  const Matrix p = Matrix::Identity(d, d) - reflection;
  if (!reflection.diagonal().isOnes(0.0) || (p.array() < 0.0).any()) {
    throw InputError("skorohod: orthant solver needs unit diagonal and nonpositive off-diagonal R");
  }
  const double rho = p.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "skorohod: Picard map is not a contraction (spectral radius of I - R = " << rho << ")";
    throw InputError(os.str());
  }

  PathSample out = empty_path(d, d, n, times);
  out.states.col(0) = x_path.col(0);
  out.driving = x_path;
  out.local_times.col(0).setZero();
  Vector dl(d), next(d);
  for (int k = 1; k < n; ++k) {
    const Vector y = out.states.col(k - 1) + (x_path.col(k) - x_path.col(k - 1));
    dl.setZero();
    bool done = false;
    for (int it = 0; it < 10000; ++it) {
      next = (p * dl - y).cwiseMax(0.0);
      const double change = (next - dl).cwiseAbs().maxCoeff();
      dl = next;
      if (change < 1e-12 * (1.0 + dl.cwiseAbs().maxCoeff())) {
        done = true;
        break;
      }
    }
    if (!done) {
      std::ostringstream os;
      os << "skorohod: Picard iteration did not converge at step " << k;
      throw NumericalError(os.str());
    }
    out.local_times.col(k) = out.local_times.col(k - 1) + dl;
    out.states.col(k) = y + reflection * dl;
  }
  return out;
}

PathSample skorohod_solve_cone(const PolyhedralCone& cone, const Matrix& reflection,
                               const Matrix& x_path, const std::vector<double>& times) {
  const int d = cone.dim();
  const int m = cone.num_faces();
  const int n = static_cast<int>(x_path.cols());
  if (x_path.rows() != d || n < 1) throw InputError("skorohod: path must be d x n, n >= 1");
  if (reflection.rows() != d || reflection.cols() != m) {
    throw InputError("skorohod: reflection must be d x m");
  }
  if (!contains(cone, x_path.col(0))) throw InputError("skorohod: X(0) must lie in the cone");
  PathSample out = empty_path(d, m, n, times);
  out.states.col(0) = x_path.col(0);
  out.driving = x_path;
  out.local_times.col(0).setZero();
  for (int k = 1; k < n; ++k) {
    const StepSolution s = skorohod_step(cone, reflection, out.states.col(k - 1),
                                         x_path.col(k) - x_path.col(k - 1));
    out.states.col(k) = s.z;
    out.local_times.col(k) = out.local_times.col(k - 1) + s.delta_l;
  }
  return out;
}

InvariantMonitor::InvariantMonitor(const PolyhedralCone& cone, const Matrix& reflection)
    : cone_(&cone), reflection_(&reflection) {
  report_.min_face_value = std::numeric_limits<double>::infinity();
}

void InvariantMonitor::observe(const Vector& z, const Vector& w, const Vector& l,
                               const Vector& delta_l) {
  const Vector rl = *reflection_ * l;
  const double scale = 1.0 + w.cwiseAbs().maxCoeff() + rl.cwiseAbs().maxCoeff();
  report_.identity_residual =
      std::max(report_.identity_residual, (z - w - rl).cwiseAbs().maxCoeff() / scale);
  const Vector faces = cone_->normals() * z;
  report_.min_face_value = std::min(report_.min_face_value, faces.minCoeff());
  const double delta = 1e-6 * std::max(1.0, z.cwiseAbs().maxCoeff());
  for (int i = 0; i < delta_l.size(); ++i) {
    if (delta_l(i) < 0.0) report_.monotone = false;
    if (faces(i) > delta) report_.complementarity += delta_l(i);
  }
  ++report_.records;
}

void InvariantMonitor::merge(const InvariantMonitor& other) {
  const InvariantReport& o = other.report_;
  report_.identity_residual = std::max(report_.identity_residual, o.identity_residual);
  report_.min_face_value = std::min(report_.min_face_value, o.min_face_value);
  report_.monotone = report_.monotone && o.monotone;
  report_.complementarity += o.complementarity;
  report_.records += o.records;
}

InvariantReport check_path(const PolyhedralCone& cone, const Matrix& reflection,
                           const PathSample& path) {
  InvariantMonitor mon(cone, reflection);
  for (int k = 0; k < path.size(); ++k) {
    const Vector dl = k == 0 ? Vector(path.local_times.col(0))
                             : Vector(path.local_times.col(k) - path.local_times.col(k - 1));
    mon.observe(path.states.col(k), path.driving.col(k), path.local_times.col(k), dl);
  }
  return mon.report();
}

}  // namespace rbmcert
