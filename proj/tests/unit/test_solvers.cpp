#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rbmcert/errors.hpp"
#include "rbmcert/lcp.hpp"
#include "rbmcert/linear_program.hpp"

using namespace rbmcert;

TEST_CASE("LP: small bounded problem") {
  // max x + y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (1.6, 1.2)
  LpProblem lp;
  lp.c = Eigen::Vector2d(1, 1);
  lp.a_ub.resize(2, 2);
  lp.a_ub << 1, 2, 3, 1;
  lp.b_ub = Eigen::Vector2d(4, 6);
  lp.a_eq = Matrix(0, 2);
  lp.b_eq = Vector(0);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(2.8));
  CHECK(r.x(0) == doctest::Approx(1.6));
  CHECK(r.x(1) == doctest::Approx(1.2));
}

TEST_CASE("LP: infeasible, unbounded, equality and free variables") {
  LpProblem lp;
  lp.c = Eigen::Vector2d(1, 0);
  lp.a_ub.resize(1, 2);
  lp.a_ub << 1, 1;
  lp.b_ub = Vector::Constant(1, -1);  // x + y <= -1 with x, y >= 0
  lp.a_eq = Matrix(0, 2);
  lp.b_eq = Vector(0);
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);

  lp.a_ub << -1, 0;
  lp.b_ub(0) = 0;
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);

  // max -x - y s.t. x - y = -2, x free, y >= 0, y <= 5 -> x = -2, y = 0
  LpProblem eq;
  eq.c = Eigen::Vector2d(-1, -1);
  eq.a_ub.resize(1, 2);
  eq.a_ub << 0, 1;
  eq.b_ub = Vector::Constant(1, 5);
  eq.a_eq.resize(1, 2);
  eq.a_eq << 1, -1;
  eq.b_eq = Vector::Constant(1, -2);
  eq.free_var = {true, false};
  const LpResult r = solve_lp(eq);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x(0) == doctest::Approx(-2));
  CHECK(r.x(1) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("LCP: projected Gauss-Seidel matches complementarity") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix b(4, 4);
    for (int i = 0; i < 16; ++i) b.data()[i] = g(rng);
    const Matrix m = b * b.transpose() + Matrix::Identity(4, 4);
    Vector q(4);
    for (int i = 0; i < 4; ++i) q(i) = g(rng);
    const LcpSolution s = solve_lcp_pgs(m, q);
    CHECK(s.lambda.minCoeff() >= 0);
    CHECK(s.w.minCoeff() >= -1e-9);
    CHECK(std::abs(s.lambda.dot(s.w)) <= 1e-8);
    CHECK((s.w - (m * s.lambda + q)).norm() <= 1e-12);
  }
}

TEST_CASE("LCP: nonpositive diagonal rejected") {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = 0;
  CHECK_THROWS_AS(solve_lcp_pgs(m, Eigen::Vector2d(-1, -1)), InputError);
}
