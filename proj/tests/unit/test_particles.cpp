#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rbmcert/errors.hpp"
#include "rbmcert/matrix_classes.hpp"
#include "rbmcert/particles.hpp"

using namespace rbmcert;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(v.size());
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

}  // namespace

TEST_CASE("ranking permutation") {
  CHECK(ranking_permutation(vec({0.5, 0.2, 0.5})) == std::vector<int>{1, 0, 2});
  CHECK(ranking_permutation(vec({1, 2, 3})) == std::vector<int>{0, 1, 2});
  CHECK(ranking_permutation(vec({3, 2, 1})) == std::vector<int>{2, 1, 0});
}

TEST_CASE("gap SRBM") {
  const ParticleSystemSpec p(vec({2, 1, 0}), vec({1, 1, 1}));
  const SrbmSpec s = build_gap_srbm(p);
  Matrix r(2, 2), a(2, 2);
  r << 1, -0.5, -0.5, 1;
  a << 2, -1, -1, 2;
  CHECK(s.reflection() == r);
  CHECK(s.covariance() == a);
  CHECK(s.drift() == vec({-1, -1}));
  const Matrix sm = gap_noise_map(p);
  CHECK((sm * sm.transpose() - a).norm() < 1e-15);

  const ParticleSystemSpec q(vec({2, 1, 0}), vec({1, 1, 1}), vec({0.5, 0.3, 0.3}));
  Matrix rq(2, 2);
  rq << 1, -0.7, -0.3, 1;
  CHECK(gap_reflection(q).isApprox(rq, 1e-15));
  CHECK(!q.symmetric());
  CHECK_THROWS_AS(ParticleSystemSpec(vec({1, 0}), vec({1, 1}), vec({0.5, 1.0})), InputError);
}

TEST_CASE("stability") {
  const GapStability s = stability_check(ParticleSystemSpec(vec({2, 1, 0}), vec({1, 1, 1})));
  CHECK(s.g_bar(2) == doctest::Approx(1));
  CHECK(s.b_vec.isApprox(vec({1, 1})));
  CHECK(s.stable);
  CHECK(s.a_norm == doctest::Approx(3));
  CHECK(s.rho0 == doctest::Approx(2.0 / (27 * M_PI * M_PI)).epsilon(1e-14));
  const GapStability u = stability_check(ParticleSystemSpec(vec({0, 0, 1}), vec({1, 1, 1})));
  CHECK(!u.stable);
  CHECK(u.rho0 == 0.0);
}

TEST_CASE("b two ways and the M-matrix certificate agree on random drifts") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    Vector drift(n);
    for (int k = 0; k < n; ++k) drift(k) = g(rng);
    const ParticleSystemSpec p(drift, Vector::Ones(n));
    const GapStability s = stability_check(p);
    CHECK((s.b_vec - s.b_from_r).cwiseAbs().maxCoeff() <= 1e-10);
    const MMatrixCertificate m = m_matrix_certificate(gap_reflection(p), gap_drift(p));
    CHECK(m.accepted == s.stable);
  }
}

TEST_CASE("asymmetric symmetrizer matches the product formula") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 4;
    Vector qp(n);
    for (int k = 0; k < n; ++k) qp(k) = u(rng);
    const ParticleSystemSpec p(Vector::LinSpaced(n, 1, 0), Vector::Ones(n), qp);
    const Matrix r = gap_reflection(p);
    const Symmetrizer sym = find_symmetrizer(r);
    REQUIRE(sym.found);
    double c = 1.0;
    for (int k = 0; k < n - 1; ++k) {
      CHECK(sym.c(k) == doctest::Approx(c).epsilon(1e-12));
      if (k + 1 < n) c *= p.q_plus()(k + 1) / p.q_minus()(k + 1);
    }
    const Matrix rc = r * sym.c.asDiagonal();
    CHECK((rc - rc.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("spectrum of the symmetric gap reflection") {
  REQUIRE(r_spectrum(2).eigenvalues.size() == 1);
  CHECK(r_spectrum(2).eigenvalues[0] == doctest::Approx(1.0));
  const RSpectrum s3 = r_spectrum(3);
  CHECK(s3.eigenvalues[0] == doctest::Approx(0.5));
  CHECK(s3.eigenvalues[1] == doctest::Approx(1.5));
  const RSpectrum s4 = r_spectrum(4);
  CHECK(s4.eigenvalues[0] == doctest::Approx(1 - M_SQRT1_2));
  CHECK(s4.eigenvalues[2] == doctest::Approx(1 + M_SQRT1_2));
  for (int n = 3; n <= 50; ++n) {
    const Vector ev =
        Eigen::SelfAdjointEigenSolver<Matrix>(symmetric_gap_reflection(n)).eigenvalues();
    const RSpectrum s = r_spectrum(n);
    for (int k = 0; k < n - 1; ++k) CHECK(std::abs(ev(k) - s.eigenvalues[k]) <= 1e-10);
    const double inv = 1.0 / ev(0);
    CHECK(std::abs(inv - s.inverse_norm) <= 1e-8 * s.inverse_norm);
  }
}

TEST_CASE("simplex projection and quadratic minimum") {
  const Vector p = project_to_simplex(vec({0.2, 2.0, -1.0}));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() >= 0);
  CHECK(p.isApprox(vec({0, 1, 0})));
  for (int n = 3; n <= 10; ++n) {
    const SimplexMinimum m = minimize_quadratic_on_simplex(symmetric_gap_reflection(n).inverse());
    CHECK(std::abs(m.value - 1.0) <= 1e-6);
  }
}

TEST_CASE("lemma on many particles") {
  for (int n = 3; n <= 6; ++n) {
    const ParticleSystemSpec p(Vector::LinSpaced(n, n - 1, 0), Vector::Ones(n));
    const LemmaReport rep = verify_lemma_many(p, 2000);
    CHECK(rep.all());
    CHECK(rep.rho0 <= rep.rho_max);
    CHECK(rep.items[3].worst_slack > 0);
  }
}

TEST_CASE("ranked simulation reuses the gap SRBM noise exactly") {
  const ParticleSystemSpec p(vec({2, 1, 0}), vec({1, 2, 1.5}));
  SimConfig c;
  c.horizon_steps = 5000;
  c.thinning = 1;
  const ParticlePaths ranked = simulate_ranked(p, c);
  const PathSample direct = simulate_path(build_gap_srbm(p), c, gap_noise_map(p));
  int col = 0;
  for (int k = 0; k < direct.size(); ++k) {
    if (!direct.on_grid[k]) continue;
    CHECK((ranked.gaps.col(col) - direct.states.col(k)).cwiseAbs().maxCoeff() <= 1e-9);
    ++col;
  }
  CHECK(col == ranked.gaps.cols());
  CHECK(ranked.invariants.ok());
  CHECK(ranked.min_order_gap >= -1e-9);
  for (int k = 0; k < ranked.positions.cols(); ++k) {
    for (int i = 0; i + 1 < 3; ++i)
      CHECK(ranked.positions(i + 1, k) - ranked.positions(i, k) >= -1e-9);
  }
}

TEST_CASE("two particles: collision local time grows only at contact") {
  const ParticleSystemSpec p(vec({1, 0}), vec({1, 1}));
  SimConfig c;
  c.horizon_steps = 20000;
  c.thinning = 1;
  c.scheme = Scheme::kEuler;
  const ParticlePaths r = simulate_ranked(p, c);
  for (int k = 1; k < r.gaps.cols(); ++k) {
    if (r.local_times(0, k) > r.local_times(0, k - 1)) CHECK(r.gaps(0, k) < 1e-6);
  }
}

TEST_CASE("named simulation") {
  const ParticleSystemSpec p(vec({1, 0}), vec({1, 1}));
  SimConfig c;
  c.horizon_steps = 300000;
  const ParticlePaths a = simulate_named(p, c);
  const ParticlePaths b = simulate_named(p, c);
  CHECK(a.positions == b.positions);
  const double mean = stationary_gaps(a, c).samples.mean();
  CHECK(std::abs(mean - 1.0) < 0.1);
  const ParticleSystemSpec q(vec({1, 0}), vec({1, 1}), vec({0.4, 0.4}));
  CHECK_THROWS_AS(simulate_named(q, c), InputError);
}

namespace {

// Batch-means estimate of the mean of each row and of its square.
struct Moments {
  Vector m1, m2, se1, se2;
};

Moments batch_moments(const Matrix& s, int batches = 50) {
  const int d = static_cast<int>(s.rows());
  const long per = s.cols() / batches;
  Matrix b1(d, batches), b2(d, batches);
  for (int b = 0; b < batches; ++b) {
    const Matrix blk = s.middleCols(b * per, per);
    b1.col(b) = blk.rowwise().mean();
    b2.col(b) = blk.array().square().matrix().rowwise().mean();
  }
  auto se = [&](const Matrix& m) {
    const Vector mean = m.rowwise().mean();
    return Vector(((m.colwise() - mean).array().square().rowwise().sum() / (batches - 1.0) / batches).sqrt());
  };
  return {b1.rowwise().mean(), b2.rowwise().mean(), se(b1), se(b2)};
}

}  // namespace

TEST_CASE("named and ranked gap moments agree for three particles") {
  const ParticleSystemSpec p(vec({2, 1, 0}), vec({1, 1, 1}));
  SimConfig c;
  c.horizon_steps = 1000000;
  const Moments named = batch_moments(stationary_gaps(simulate_named(p, c), c).samples);
  const Moments ranked = batch_moments(stationary_gaps(simulate_ranked(p, c), c).samples);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(named.m1(k) - ranked.m1(k)) <= 3 * std::hypot(named.se1(k), ranked.se1(k)));
    CHECK(std::abs(named.m2(k) - ranked.m2(k)) <= 3 * std::hypot(named.se2(k), ranked.se2(k)));
    // stationary gaps are Exp(2)
    CHECK(std::abs(ranked.m1(k) - 0.5) <= 0.05);
  }
}

TEST_CASE("equal drifts: named and ranked gaps match reflected Brownian motion at t = 1") {
  const ParticleSystemSpec p(vec({0.3, 0.3}), vec({1, 1}));
  SimConfig c;
  c.horizon_steps = 100;
  c.thinning = 100;
  const int reps = 4000;
  double sn = 0, sr = 0, sn2 = 0, sr2 = 0;
  for (int r = 0; r < reps; ++r) {
    const double gn = simulate_named(p, c, r).gaps(0, 1);
    const double gr = simulate_ranked(p, c, r).gaps(0, 1);
    sn += gn;
    sr += gr;
    sn2 += gn * gn;
    sr2 += gr * gr;
  }
  const double mn = sn / reps, mr = sr / reps;
  // |N(0, 2)|: mean sqrt(4 / pi), second moment 2
  const double exact = std::sqrt(4.0 / M_PI);
  const double se = std::sqrt((2.0 - exact * exact) / reps);
  CHECK(std::abs(mr - exact) <= 3 * se);
  // the named Euler scheme carries an O(sqrt h) boundary bias
  CHECK(std::abs(mn - exact) <= 3 * se + 0.05);
  CHECK(std::abs(sr2 / reps - 2.0) <= 0.15);
  CHECK(std::abs(sn2 / reps - 2.0) <= 0.15);
}
