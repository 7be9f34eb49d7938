#include "rbmcert/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "rbmcert/errors.hpp"
#include "rbmcert/matrix_classes.hpp"

namespace rbmcert {

SmoothBridge::SmoothBridge(double s1, double s2) : s1_(s1), s2_(s2) {
  if (!(s1 > 0.0) || !(s2 > s1) || !std::isfinite(s2)) {
    throw InputError("bridge: need 0 < s1 < s2");
  }
  const double w = s2 - s1;
  Eigen::Matrix3d m;
  m << 1, 1, 1, 3, 4, 5, 6, 12, 20;
  const Eigen::Vector3d c = m.partialPivLu().solve(Eigen::Vector3d(s2 / w, 1.0, 0.0));
  c3_ = c(0);
  c4_ = c(1);
  c5_ = c(2);
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    if (3 * c3_ * t * t + 4 * c4_ * t * t * t + 5 * c5_ * t * t * t * t < -1e-12) {
      std::ostringstream os;
      os << "bridge: quintic on [" << s1 << ", " << s2 << "] is not monotone";
      throw InputError(os.str());
    }
  }
}

double SmoothBridge::eval(double s, int order) const {
  if (order < 0 || order > 2) throw InputError("bridge: order must be 0, 1 or 2");
  if (s <= s1_) return 0.0;
  if (s >= s2_) return order == 0 ? s : (order == 1 ? 1.0 : 0.0);
  const double w = s2_ - s1_;
  const double t = (s - s1_) / w;
  switch (order) {
    case 0:
      return w * t * t * t * (c3_ + t * (c4_ + t * c5_));
    case 1:
      return t * t * (3 * c3_ + t * (4 * c4_ + t * 5 * c5_));
    default:
      return t * (6 * c3_ + t * (12 * c4_ + t * 20 * c5_)) / w;
  }
}

ValueGradHess u_eval(const Matrix& q, const Vector& x) {
  const Vector qx = q * x;
  const double xqx = x.dot(qx);
  if (!(xqx > 0.0)) {
    std::ostringstream os;
    os << "U undefined: x'Qx = " << xqx << " <= 0";
    throw DomainError(os.str());
  }
  ValueGradHess r;
  const double u = std::sqrt(xqx);
  r.value = u;
  r.gradient = qx / u;
  r.hessian = (q * xqx - qx * qx.transpose()) / (u * u * u);
  return r;
}

ValueGradHess v_eval(const Matrix& q, const SmoothBridge& bridge, double lambda,
                     const Vector& x) {
  const int d = static_cast<int>(x.size());
  ValueGradHess r;
  r.value = 1.0;
  r.gradient = Vector::Zero(d);
  r.hessian = Matrix::Zero(d, d);
  if (x.isZero(0.0)) return r;
  const ValueGradHess u = u_eval(q, x);
  if (u.value <= bridge.s1()) return r;
  const double p0 = bridge.eval(u.value, 0);
  const double p1 = bridge.eval(u.value, 1);
  const double p2 = bridge.eval(u.value, 2);
  const double v = std::exp(lambda * p0);
  r.value = v;
  r.gradient = lambda * v * p1 * u.gradient;
  r.hessian = lambda * v *
              ((lambda * p1 * p1 + p2) * u.gradient * u.gradient.transpose() +
               p1 * u.hessian);
  return r;
}

bool ConditionReport::all() const {
  if (!positivity.holds || !drift.holds) return false;
  return std::all_of(faces.begin(), faces.end(),
                     [](const ConditionCheck& c) { return c.holds; });
}

std::string ConditionReport::first_failure() const {
  if (!positivity.holds) return "(i)";
  for (std::size_t j = 0; j < faces.size(); ++j) {
    if (!faces[j].holds) return "(ii) face " + std::to_string(j + 1);
  }
  if (!drift.holds) return "(iii)";
  return "";
}

namespace {

void validate_q(const Matrix& q, int d) {
  if (q.rows() != d || q.cols() != d) throw InputError("Q must be d x d");
  if (!q.allFinite()) throw InputError("Q has non-finite entries");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (!is_symmetric(q, 1e-12 * scale)) throw InputError("Q must be symmetric");
  Eigen::JacobiSVD<Matrix> svd(q);
  const Vector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-14 * std::max(1.0, sv(0))) {
    throw InputError("Q must be nonsingular");
  }
}

void require_converged(const SphereExtremum& e, const std::string& what) {
  if (!e.converged) {
    std::ostringstream os;
    os << what << ": sphere search did not converge; best value " << e.value
       << " at x = [" << e.argmin.transpose() << "]";
    throw NumericalError(os.str());
  }
}

ConditionCheck to_check(const SphereExtremum& e, bool holds) {
  ConditionCheck c;
  c.vacuous = e.empty;
  c.holds = e.empty || holds;
  c.extremum = e.value;
  c.argument = e.argmin;
  c.flagged = e.flagged;
  return c;
}

SphereOptimum lambda_max_on(const SphereSection& sec, const Matrix& q, const Vector& mu,
                            const Matrix& a, const SphereSearchOptions& opt) {
  const Vector qmu = q * mu;
  const Matrix s = q * a * q;
  Objective f;
  f.value = [&](const Vector& x) {
    return 2.0 * std::abs(qmu.dot(x)) * std::sqrt(x.dot(q * x)) / x.dot(s * x);
  };
  f.gradient = [&](const Vector& x) -> Vector {
    const double p = qmu.dot(x);
    const double ap = std::abs(p);
    const Vector qx = q * x;
    const double u = std::sqrt(x.dot(qx));
    const Vector sx = s * x;
    const double w = x.dot(sx);
    const Vector dp = (p >= 0.0 ? 1.0 : -1.0) * qmu;
    return 2.0 * ((dp * u + ap * qx / u) / w - ap * u * 2.0 * sx / (w * w));
  };
  const SphereExtremum e = minimize_on_sphere(sec, f, opt);
  if (e.empty) throw InputError("Lambda: sphere section is empty");
  require_converged(e, "Lambda");
  if (!(e.value > 0.0)) {
    std::ostringstream os;
    os << "Lambda = " << e.value << " is not positive; conditions (i)-(iii) do not hold";
    throw VerificationError(os.str());
  }
  return {e.value, e.argmin, e.flagged};
}

SphereOptimum k_const_on(const SphereSection& sec, const Matrix& q,
                         const SphereSearchOptions& opt) {
  Objective f{[&](const Vector& x) { return x.dot(q * x); },
              [&](const Vector& x) -> Vector { return 2.0 * (q * x); }};
  const SphereExtremum e = minimize_on_sphere(sec, f, opt);
  if (e.empty) throw InputError("K: sphere section is empty");
  require_converged(e, "K");
  if (!(e.value > 0.0)) throw VerificationError("K: x'Qx is not positive on D");
  return {std::sqrt(e.value), e.argmin, e.flagged};
}

ConditionReport conditions_on(const SrbmSpec& spec, const SphereSection& full,
                              const Matrix& q, const SphereSearchOptions& opt) {
  validate_q(q, spec.dim());
  ConditionReport rep;
  {
    Objective f{[&](const Vector& x) { return x.dot(q * x); },
                [&](const Vector& x) -> Vector { return 2.0 * (q * x); }};
    const SphereExtremum e = minimize_on_sphere(full, f, opt);
    if (e.empty) throw InputError("condition (i): the cone has no unit vectors");
    require_converged(e, "condition (i)");
    rep.positivity = to_check(e, e.value > kConditionTol);
  }
  for (int j = 0; j < spec.num_faces(); ++j) {
    const Vector g = q * spec.reflection().col(j);
    Objective f{[g](const Vector& x) { return g.dot(x); },
                [g](const Vector&) -> Vector { return g; }};
    const SphereSection face(spec.cone(), {j});
    const SphereExtremum e = maximize_on_sphere(face, f, opt);
    if (!e.empty) require_converged(e, "condition (ii) face " + std::to_string(j + 1));
    rep.faces.push_back(to_check(e, e.value <= kConditionTol));
  }
  {
    const Vector g = q * spec.drift();
    Objective f{[g](const Vector& x) { return g.dot(x); },
                [g](const Vector&) -> Vector { return g; }};
    const SphereExtremum e = maximize_on_sphere(full, f, opt);
    require_converged(e, "condition (iii)");
    rep.drift = to_check(e, e.value < -kConditionTol);
  }
  return rep;
}

}  // namespace

ConditionReport check_conditions(const SrbmSpec& spec, const Matrix& q,
                                 const SphereSearchOptions& options) {
  const SphereSection full(spec.cone());
  return conditions_on(spec, full, q, options);
}

OrthantSufficientReport orthant_sufficient_check(const Matrix& r, const Vector& mu,
                                                 const Matrix& q) {
  require_square_finite(r, "R");
  require_square_finite(q, "Q");
  if (r.rows() != q.rows() || mu.size() != r.rows()) {
    throw InputError("orthant check: dimension mismatch");
  }
  OrthantSufficientReport rep;
  rep.qr = q * r;
  rep.q_mu = q * mu;
  rep.copositive = is_strictly_copositive(q).value;
  rep.nonsingular = Eigen::FullPivLU<Matrix>(q).isInvertible();
  rep.qr_is_z = is_z_matrix(rep.qr).value;
  rep.q_mu_negative = (rep.q_mu.array() < 0.0).all();
  rep.holds = rep.copositive && rep.nonsingular && rep.qr_is_z && rep.q_mu_negative;
  return rep;
}

Symmetrizer find_symmetrizer(const Matrix& r, double tol) {
  require_square_finite(r, "R");
  const int n = static_cast<int>(r.rows());
  Symmetrizer out;
  out.c = Vector::Zero(n);
  std::vector<bool> seen(n, false);
  for (int root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    out.c(root) = 1.0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop_front();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double rij = r(i, j);
        const double rji = r(j, i);
        if (rij == 0.0 && rji == 0.0) continue;
        if (rij == 0.0 || rji == 0.0 || rij * rji < 0.0) {
          out.inconsistent = std::make_pair(std::min(i, j), std::max(i, j));
          return out;
        }
        if (!seen[j]) {
          seen[j] = true;
          out.c(j) = out.c(i) * rji / rij;
          queue.push_back(j);
        } else {
          const double lhs = rij * out.c(j);
          const double rhs = rji * out.c(i);
          if (std::abs(lhs - rhs) > tol * std::max(std::abs(lhs), std::abs(rhs))) {
            out.inconsistent = std::make_pair(std::min(i, j), std::max(i, j));
            return out;
          }
        }
      }
    }
  }
  out.found = true;
  return out;
}

MMatrixCertificate m_matrix_certificate(const Matrix& r, const Vector& mu, int limit) {
  require_square_finite(r, "R");
  if (mu.size() != r.rows()) throw InputError("mu length must match R");
  MMatrixCertificate out;
  if (!is_reflection_nonsingular_m(r, limit)) {
    out.reason = "R is not a reflection nonsingular M-matrix";
    return out;
  }
  out.symmetrizer = find_symmetrizer(r);
  if (!out.symmetrizer.found) {
    const auto [i, j] = *out.symmetrizer.inconsistent;
    std::ostringstream os;
    os << "no diagonal symmetrizer: entries (" << i + 1 << "," << j + 1 << ") and ("
       << j + 1 << "," << i + 1 << ") are inconsistent";
    out.reason = os.str();
    return out;
  }
  out.r_inv_mu = r.partialPivLu().solve(mu);
  const Matrix rc = r * out.symmetrizer.c.asDiagonal();
  const Matrix q = rc.partialPivLu().inverse();
  out.q = 0.5 * (q + q.transpose());
  if (!(out.r_inv_mu.array() < 0.0).all()) {
    out.reason = "unstable: R^{-1} mu has a nonnegative component";
    return out;
  }
  out.accepted = true;
  return out;
}

SphereOptimum compute_lambda_max(const PolyhedralCone& cone, const Matrix& q,
                                 const Vector& mu, const Matrix& a,
                                 const SphereSearchOptions& options) {
  return lambda_max_on(SphereSection(cone), q, mu, a, options);
}

SphereOptimum compute_k_const(const PolyhedralCone& cone, const Matrix& q,
                              const SphereSearchOptions& options) {
  return k_const_on(SphereSection(cone), q, options);
}

CertifyResult certify(const SrbmSpec& spec, const Matrix& q,
                      const CertifyOptions& options) {
  if (!(options.lambda_fraction > 0.0 && options.lambda_fraction < 1.0)) {
    throw InputError("lambda fraction must lie in (0, 1)");
  }
  const SphereSection full(spec.cone());
  CertifyResult res;
  res.conditions = conditions_on(spec, full, q, options.search);
  if (!res.conditions.all()) {
    res.failure = "condition " + res.conditions.first_failure() + " fails";
    return res;
  }
  LyapunovCertificate cert;
  cert.q = q;
  cert.bridge = options.bridge;
  const SphereOptimum lam =
      lambda_max_on(full, q, spec.drift(), spec.covariance(), options.search);
  const SphereOptimum k = k_const_on(full, q, options.search);
  cert.lambda_max = lam.value;
  cert.lambda_argmin = lam.argmin;
  cert.k_const = k.value;
  cert.k_argmin = k.argmin;
  cert.rho_max = lam.value * k.value;
  cert.lambda = options.lambda_fraction * lam.value;
  cert.conditions = res.conditions;
  cert.flagged = lam.flagged || k.flagged || res.conditions.positivity.flagged ||
                 res.conditions.drift.flagged;
  for (const auto& f : res.conditions.faces) cert.flagged = cert.flagged || f.flagged;
  res.certificate = std::move(cert);
  return res;
}

DriftDecomposition drift_at(const LyapunovCertificate& cert, const Matrix& a,
                            const Vector& mu, const Vector& x, double lambda) {
  const ValueGradHess u = u_eval(cert.q, x);
  if (u.value < cert.bridge.s2()) {
    std::ostringstream os;
    os << "drift decomposition needs U(x) >= s2 = " << cert.bridge.s2() << ", got "
       << u.value;
    throw DomainError(os.str());
  }
  DriftDecomposition d;
  d.a_val = u.gradient.dot(a * u.gradient);
  d.theta_val = 0.5 * (a.cwiseProduct(u.hessian)).sum();
  d.b_val = -d.theta_val - u.gradient.dot(mu);
  d.beta_val = 0.5 * d.a_val * lambda * lambda - d.b_val * lambda;
  d.lambda_threshold = 2.0 * d.b_val / d.a_val;
  return d;
}

Matrix sample_section_directions(const PolyhedralCone& cone, int count,
                                 const Matrix& extra) {
  const SphereSection sec(cone);
  const Matrix dirs = quasi_random_directions(sec.dim(), count, 101);
  const int n_extra = static_cast<int>(extra.cols());
  Matrix out(cone.dim(), count + n_extra);
  int n = 0;
  for (int k = 0; k < count; ++k) {
    const Vector p = sec.project(dirs.col(k));
    if (p.size() > 0) out.col(n++) = sec.basis() * p;
  }
  for (int k = 0; k < n_extra; ++k) out.col(n++) = extra.col(k).normalized();
  return out.leftCols(n);
}

TailBound negative_drift_region(const LyapunovCertificate& cert, const SrbmSpec& spec,
                                double lambda, const DriftRegionOptions& options) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  if (options.radii < 2 || options.directions < 1) {
    throw InputError("drift region: need at least 2 radii and 1 direction");
  }
  const double r0 = cert.bridge.s2() / cert.k_const * (1.0 + 1e-6);
  const double cap = std::max(options.radius_cap_factor * cert.bridge.s2(), 2.0 * r0);
  Matrix extra(spec.dim(), 2);
  extra.col(0) = cert.lambda_argmin;
  extra.col(1) = cert.k_argmin;
  const Matrix dirs = sample_section_directions(spec.cone(), options.directions, extra);

  TailBound tb;
  for (int i = 0; i < options.radii; ++i) {
    const double r = r0 * std::pow(cap / r0, static_cast<double>(i) / (options.radii - 1));
    double sup = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < dirs.cols(); ++k) {
      const Vector x = r * dirs.col(k);
      sup = std::max(sup, drift_at(cert, spec.covariance(), spec.drift(), x, lambda).beta_val);
    }
    tb.radii.push_back(r);
    tb.sup_beta.push_back(sup);
  }
  int first = options.radii;
  while (first > 0 && tb.sup_beta[first - 1] < 0.0) --first;
  if (first == options.radii) {
    std::ostringstream os;
    os << "no radius up to " << cap << " has negative sampled drift at lambda = " << lambda
       << " (sup beta at cap = " << tb.sup_beta.back() << ")";
    throw VerificationError(os.str());
  }
  double margin = std::numeric_limits<double>::infinity();
  for (int i = first; i < options.radii; ++i) margin = std::min(margin, -tb.sup_beta[i]);
  tb.found = true;
  tb.threshold_radius = tb.radii[first];
  // Half the smallest sampled margin, leaving room for unsampled directions.
  tb.drift_margin = 0.5 * margin;
  return tb;
}

TailExponentReport tail_exponent(const LyapunovCertificate& cert,
                                 const std::vector<double>& rhos) {
  TailExponentReport rep;
  rep.rho_max = cert.lambda_max * cert.k_const;
  for (double r : rhos) rep.requested.emplace_back(r, r > 0.0 && r < rep.rho_max);
  return rep;
}

}  // namespace rbmcert
