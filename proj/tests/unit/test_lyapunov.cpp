#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rbmcert/errors.hpp"
#include "rbmcert/lyapunov.hpp"

using namespace rbmcert;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

SrbmSpec example_system() {
  return SrbmSpec(PolyhedralCone::orthant(2), m2(1, 0.5, 0.5, 1), Eigen::Vector2d(-1, -1),
                  Matrix::Identity(2, 2));
}

SrbmSpec one_dim(double mu, double a) {
  return SrbmSpec(PolyhedralCone::orthant(1), Matrix::Ones(1, 1), Vector::Constant(1, mu),
                  Matrix::Constant(1, 1, a));
}

double rel_err(const Matrix& fd, const Matrix& an) {
  return (fd - an).norm() / std::max(an.norm(), 1e-12);
}

}  // namespace

TEST_CASE("bridge") {
  const SmoothBridge b(1, 2);
  CHECK(b.eval(0.5) == 0.0);
  CHECK(b.eval(3, 1) == 1.0);
  CHECK(b.eval(3) == 3.0);
  double prev = -1;
  for (int k = 0; k <= 1000; ++k) {
    const double s = 1 + k / 1000.0;
    const double v = b.eval(s);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(b.eval(1.5) > 0.0);
  CHECK(b.eval(1.5) < 1.5);
  // C^2 matching at both ends
  CHECK(std::abs(b.eval(1 + 1e-9, 1)) < 1e-12);
  CHECK(std::abs(b.eval(2 - 1e-9) - 2) < 1e-8);
  CHECK(std::abs(b.eval(2 - 1e-9, 1) - 1) < 1e-7);
  CHECK(std::abs(b.eval(2 - 1e-9, 2)) < 1e-6);
  CHECK_THROWS_AS(SmoothBridge(2, 1), InputError);
}

TEST_CASE("U and V values") {
  const ValueGradHess u = u_eval(Matrix::Identity(2, 2), Eigen::Vector2d(3, 4));
  CHECK(u.value == doctest::Approx(5));
  CHECK(u.gradient(0) == doctest::Approx(0.6));
  CHECK(u.gradient(1) == doctest::Approx(0.8));
  const ValueGradHess h = u_eval(Matrix::Identity(2, 2), Eigen::Vector2d(1, 0));
  CHECK(h.hessian.isApprox(m2(0, 0, 0, 1)));
  CHECK(u_eval(m2(1, -0.6, -0.6, 1), Eigen::Vector2d(1, 1)).value ==
        doctest::Approx(std::sqrt(0.8)));
  CHECK_THROWS_AS(u_eval(m2(0, 1, 1, 0), Eigen::Vector2d(1, -1)), DomainError);

  const SmoothBridge b(1, 2);
  CHECK(v_eval(Matrix::Identity(2, 2), b, 1.0, Vector::Zero(2)).value == 1.0);
  CHECK(v_eval(Matrix::Identity(2, 2), b, 1.0, Eigen::Vector2d(3, 4)).value ==
        doctest::Approx(std::exp(5.0)));
}

TEST_CASE("U and V derivatives match central differences") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unif(0, 1);
  const SmoothBridge bridge(1, 2);
  for (int cert = 0; cert < 5; ++cert) {
    const int d = 2 + cert % 3;
    Matrix b(d, d);
    for (int i = 0; i < d * d; ++i) b.data()[i] = g(rng);
    const Matrix q = b * b.transpose() + 0.5 * Matrix::Identity(d, d);
    const double lambda = 0.2 + unif(rng);
    int n = 0;
    while (n < 100) {
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = g(rng);
      x *= 3.0 * unif(rng) / std::sqrt(x.dot(q * x));  // U uniform in [0, 3]
      const double uval = std::sqrt(x.dot(q * x));
      if (std::abs(uval - 1) < 1e-3 || std::abs(uval - 2) < 1e-3 || uval < 1e-2) continue;
      ++n;
      const double h = 1e-6 * (1 + x.norm());
      const ValueGradHess u = u_eval(q, x);
      const ValueGradHess v = v_eval(q, bridge, lambda, x);
      Vector gu(d), gv(d);
      Matrix hu(d, d), hv(d, d);
      for (int i = 0; i < d; ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        gu(i) = (u_eval(q, xp).value - u_eval(q, xm).value) / (2 * h);
        gv(i) = (v_eval(q, bridge, lambda, xp).value - v_eval(q, bridge, lambda, xm).value) /
                (2 * h);
        hu.col(i) = (u_eval(q, xp).gradient - u_eval(q, xm).gradient) / (2 * h);
        hv.col(i) = (v_eval(q, bridge, lambda, xp).gradient -
                     v_eval(q, bridge, lambda, xm).gradient) / (2 * h);
      }
      CHECK(rel_err(gu, u.gradient) <= 1e-5);
      CHECK(rel_err(hu, u.hessian) <= 1e-5);
      if (uval > bridge.s1()) {
        CHECK(rel_err(gv, v.gradient) <= 1e-5);
        CHECK(rel_err(hv, v.hessian) <= 1e-5);
      } else {
        CHECK(v.gradient.isZero(0.0));
      }
    }
  }
}

TEST_CASE("conditions on the 2x2 example") {
  const ConditionReport rep = check_conditions(example_system(), m2(1, -0.6, -0.6, 1));
  CHECK(rep.positivity.holds);
  REQUIRE(rep.faces.size() == 2);
  CHECK(rep.faces[0].holds);
  CHECK(rep.faces[1].holds);
  CHECK(rep.drift.holds);
  CHECK(rep.all());
  CHECK(rep.positivity.extremum == doctest::Approx(0.4));

  const SrbmSpec normal(PolyhedralCone::orthant(2), Matrix::Identity(2, 2),
                        Eigen::Vector2d(-1, -1), Matrix::Identity(2, 2));
  CHECK(check_conditions(normal, Matrix::Identity(2, 2)).all());
  const SrbmSpec pushed(PolyhedralCone::orthant(2), Matrix::Identity(2, 2),
                        Eigen::Vector2d(1, 0), Matrix::Identity(2, 2));
  const ConditionReport bad = check_conditions(pushed, Matrix::Identity(2, 2));
  CHECK(!bad.drift.holds);
  CHECK(bad.first_failure() == "(iii)");
  CHECK_THROWS_AS(check_conditions(normal, m2(1, 0, 1, 1)), InputError);
  CHECK_THROWS_AS(check_conditions(normal, m2(1, 1, 1, 1)), InputError);
}

TEST_CASE("orthant sufficient check") {
  const OrthantSufficientReport ex =
      orthant_sufficient_check(m2(1, 0.5, 0.5, 1), Eigen::Vector2d(-1, -1), m2(1, -0.6, -0.6, 1));
  CHECK(ex.holds);
  CHECK(ex.qr.isApprox(m2(0.7, -0.1, -0.1, 0.7), 1e-15));
  CHECK(orthant_sufficient_check(Matrix::Identity(2, 2), Eigen::Vector2d(-1, -1),
                                 Matrix::Identity(2, 2)).holds);
  const OrthantSufficientReport notz = orthant_sufficient_check(
      m2(1, 0.5, 0.5, 1), Eigen::Vector2d(-1, -1), Matrix::Identity(2, 2));
  CHECK(!notz.holds);
  CHECK(!notz.qr_is_z);
}

TEST_CASE("orthant sufficient check implies the conditions") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  int tested = 0;
  for (int trial = 0; trial < 400 && tested < 20; ++trial) {
    Matrix q(2, 2), r(2, 2);
    q << 1, u(rng), 0, 1;
    q(1, 0) = q(0, 1);
    r << 1, u(rng), u(rng), 1;
    const Eigen::Vector2d mu(u(rng), u(rng));
    if (!orthant_sufficient_check(r, mu, q).holds) continue;
    if (!weak_existence_check(PolyhedralCone::orthant(2), r).ok) continue;
    ++tested;
    const SrbmSpec s(PolyhedralCone::orthant(2), r, mu, Matrix::Identity(2, 2));
    CHECK(check_conditions(s, q).all());
  }
  CHECK(tested > 5);
}

TEST_CASE("symmetrizer and M-matrix certificate") {
  const Symmetrizer id = find_symmetrizer(m2(1, -0.5, -0.5, 1));
  CHECK(id.found);
  CHECK(id.c.isApprox(Eigen::Vector2d(1, 1)));
  const Symmetrizer asym = find_symmetrizer(m2(1, -0.7, -0.3, 1));
  REQUIRE(asym.found);
  CHECK(asym.c(1) == doctest::Approx(3.0 / 7.0));
  const Matrix rc = m2(1, -0.7, -0.3, 1) * asym.c.asDiagonal();
  CHECK(rc.isApprox(m2(1, -0.3, -0.3, 3.0 / 7.0), 1e-14));
  CHECK(!find_symmetrizer(m2(1, -0.5, 0, 1)).found);

  Matrix r3(3, 3);
  r3 << 1, -0.2, -0.3, -0.4, 1, -0.1, -0.1, -0.3, 1;  // cycle ratios inconsistent
  CHECK(!find_symmetrizer(r3).found);

  const MMatrixCertificate ok = m_matrix_certificate(m2(1, -0.5, -0.5, 1), Eigen::Vector2d(-1, 0));
  CHECK(ok.accepted);
  CHECK(ok.q.isApprox(m2(1, -0.5, -0.5, 1).inverse()));
  CHECK(!m_matrix_certificate(m2(1, -0.5, -0.5, 1), Eigen::Vector2d(1, 0)).accepted);
  CHECK(!m_matrix_certificate(m2(1, 0.5, 0.5, 1), Eigen::Vector2d(-1, -1)).accepted);
}

TEST_CASE("Lambda and K") {
  const PolyhedralCone o2 = PolyhedralCone::orthant(2);
  const PolyhedralCone o1 = PolyhedralCone::orthant(1);
  const SphereOptimum l1 = compute_lambda_max(o1, Matrix::Ones(1, 1), Vector::Constant(1, -1.5),
                                              Matrix::Constant(1, 1, 2.0));
  CHECK(l1.value == doctest::Approx(1.5).epsilon(1e-12));
  const SphereOptimum l2 = compute_lambda_max(o2, Matrix::Identity(2, 2), Eigen::Vector2d(-1, -1),
                                              Matrix::Identity(2, 2));
  CHECK(l2.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(compute_k_const(o2, Matrix::Identity(2, 2)).value == doctest::Approx(1.0));
  CHECK(compute_k_const(o1, Matrix::Constant(1, 1, 4.0)).value == doctest::Approx(2.0));
  const SphereOptimum k = compute_k_const(o2, m2(1, -0.6, -0.6, 1));
  CHECK(k.value == doctest::Approx(std::sqrt(0.4)).epsilon(1e-10));
  CHECK(std::abs(k.argmin(0) - M_SQRT1_2) < 1e-5);
}

TEST_CASE("Lambda minimizer is validated against a dense sample") {
  const SrbmSpec s = example_system();
  const Matrix q = m2(1, -0.6, -0.6, 1);
  const SphereOptimum l = compute_lambda_max(s.cone(), q, s.drift(), s.covariance());
  const Vector qmu = q * s.drift();
  auto ratio = [&](const Vector& x) {
    return 2 * std::abs(qmu.dot(x)) * std::sqrt(x.dot(q * x)) / x.dot(q * q * x);
  };
  CHECK(l.value <= ratio(l.argmin) + 1e-10);
  const Matrix pts = sample_section_directions(s.cone(), 100000);
  double best = 1e300;
  for (int k = 0; k < pts.cols(); ++k) best = std::min(best, ratio(pts.col(k)));
  CHECK(l.value >= -1e-6);
  CHECK(l.value <= best + 1e-12);
  CHECK(best - l.value <= 1e-6);
  // degree-0 homogeneity
  CHECK(std::abs(ratio(7.3 * l.argmin) - ratio(l.argmin)) <= 1e-10 * ratio(l.argmin));
}

TEST_CASE("certificate, drift decomposition and tail bound in d = 1") {
  const double mu = -1.0, a = 2.0;
  const SrbmSpec s = one_dim(mu, a);
  const CertifyResult res = certify(s, Matrix::Ones(1, 1));
  REQUIRE(res.certificate.has_value());
  const LyapunovCertificate& c = *res.certificate;
  CHECK(c.lambda_max == doctest::Approx(2 * std::abs(mu) / a).epsilon(1e-12));
  CHECK(c.k_const == doctest::Approx(1.0));
  CHECK(tail_exponent(c).rho_max == doctest::Approx(1.0).epsilon(1e-12));

  const double lam = 0.3;
  const DriftDecomposition d = drift_at(c, s.covariance(), s.drift(), Vector::Constant(1, 5.0), lam);
  CHECK(d.theta_val == doctest::Approx(0.0));
  CHECK(d.b_val == doctest::Approx(std::abs(mu)));
  CHECK(d.a_val == doctest::Approx(a));
  CHECK(d.beta_val == doctest::Approx(0.5 * a * lam * lam - std::abs(mu) * lam));
  CHECK(d.lambda_threshold == doctest::Approx(2 * std::abs(mu) / a));
  CHECK_THROWS_AS(drift_at(c, s.covariance(), s.drift(), Vector::Constant(1, 1.5), lam),
                  DomainError);

  const double half = std::abs(mu) / a;  // Lambda / 2
  const TailBound tb = negative_drift_region(c, s, half);
  CHECK(tb.found);
  CHECK(tb.threshold_radius == doctest::Approx(c.bridge.s2() * (1 + 1e-6)));
  for (double sb : tb.sup_beta) CHECK(sb == doctest::Approx(-mu * mu / (2 * a)));
  const TailBound quarter = negative_drift_region(c, s, std::abs(mu) / (2 * a));
  for (double sb : quarter.sup_beta) CHECK(sb == doctest::Approx(-3 * mu * mu / (8 * a)));
  CHECK_THROWS_AS(negative_drift_region(c, s, 1.5 * c.lambda_max), VerificationError);
}

TEST_CASE("drift decomposition on the 2x2 example") {
  const SrbmSpec s = example_system();
  const CertifyResult res = certify(s, m2(1, -0.6, -0.6, 1));
  REQUIRE(res.certificate.has_value());
  const LyapunovCertificate& c = *res.certificate;
  CHECK(c.lambda_max > 0);
  CHECK(c.rho_max == doctest::Approx(c.lambda_max * c.k_const));
  // theta decays like 1/|x| along rays
  const Vector dir = Eigen::Vector2d(0.3, 0.9).normalized();
  const double t10 = drift_at(c, s.covariance(), s.drift(), 10 * dir, c.lambda).theta_val;
  const double t1000 = drift_at(c, s.covariance(), s.drift(), 1000 * dir, c.lambda).theta_val;
  CHECK(std::abs(t1000) <= std::abs(t10) / 99.0);
  // beta < 0 at lambda = Lambda / 2 at the minimizing direction
  const Vector x = 10 * c.bridge.s2() * c.lambda_argmin.normalized();
  CHECK(drift_at(c, s.covariance(), s.drift(), x, c.lambda_max / 2).beta_val < 0);
  const TailBound tb = negative_drift_region(c, s, c.lambda_max / 2);
  CHECK(tb.found);
  CHECK(tb.drift_margin > 0);
  // V >= exp(lambda K |x|) beyond s2 / K
  for (int k = 0; k < 20; ++k) {
    const Vector y = (c.bridge.s2() / c.k_const * (1 + 1e-6) * (1 + k)) *
                     Eigen::Vector2d(1 + k, 20 - k).normalized();
    CHECK(v_eval(c.q, c.bridge, c.lambda, y).value >=
          std::exp(c.lambda * c.k_const * y.norm()) * (1 - 1e-12));
  }
}

TEST_CASE("certify rejects failing conditions") {
  const SrbmSpec zero(PolyhedralCone::orthant(2), Matrix::Identity(2, 2), Vector::Zero(2),
                      Matrix::Identity(2, 2));
  const CertifyResult r = certify(zero, Matrix::Identity(2, 2));
  CHECK(!r.certificate.has_value());
  CHECK(r.failure == "condition (iii) fails");
}
