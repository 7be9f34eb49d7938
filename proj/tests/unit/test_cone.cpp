#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rbmcert/cone.hpp"
#include "rbmcert/errors.hpp"
#include "rbmcert/matrix_classes.hpp"
#include "rbmcert/sphere_optimizer.hpp"

using namespace rbmcert;

TEST_CASE("cone construction") {
  const PolyhedralCone o = PolyhedralCone::orthant(2);
  CHECK(o.is_cone());
  CHECK(o.is_orthant());
  Matrix n(1, 2);
  n << 2, 0;
  CHECK_THROWS_AS(PolyhedralCone{n}, InputError);
  Matrix opp(2, 1);
  opp << 1, -1;  // {x >= 0} and {x <= 0}: no interior
  CHECK_THROWS_AS(PolyhedralCone{opp}, InputError);
}

TEST_CASE("contains and active faces") {
  const PolyhedralCone o = PolyhedralCone::orthant(2);
  CHECK(contains(o, Eigen::Vector2d(1, 1)));
  CHECK(!contains(o, Eigen::Vector2d(-0.1, 1)));
  CHECK(contains(o, Eigen::Vector2d(0, 0)));
  CHECK_THROWS_AS(contains(o, Eigen::Vector3d(0, 0, 0)), InputError);
  CHECK(active_faces(o, Eigen::Vector2d(0, 1)) == std::vector<int>{0});
  CHECK(active_faces(o, Eigen::Vector2d(0, 0)) == std::vector<int>{0, 1});
  CHECK(active_faces(o, Eigen::Vector2d(1, 1)).empty());
  CHECK_THROWS_AS(active_faces(o, Eigen::Vector2d(-1, 1)), InputError);
}

TEST_CASE("maximal sets") {
  for (int d = 2; d <= 4; ++d) {
    const auto sets = enumerate_maximal_sets(PolyhedralCone::orthant(d));
    CHECK(sets.size() == (1u << d) - 1);
  }
  const auto s2 = enumerate_maximal_sets(PolyhedralCone::orthant(2));
  CHECK(s2[0].to_string() == "{1}");
  CHECK(s2[1].to_string() == "{2}");
  CHECK(s2[2].to_string() == "{1,2}");
  Matrix h(1, 2);
  h << 0, 1;
  const auto half = enumerate_maximal_sets(PolyhedralCone(h));
  REQUIRE(half.size() == 1);
  CHECK(half[0].to_string() == "{1}");

  // Three faces in the plane, one of them redundant: x >= 0, y >= 0 and
  // (x + y)/sqrt2 >= 0. Only the apex lies on the third face, so {3} is not
  // maximal, while {1,2,3} (the apex) is.
  Matrix n3(3, 2);
  n3 << 1, 0, 0, 1, M_SQRT1_2, M_SQRT1_2;
  std::vector<std::string> names;
  for (const auto& s : enumerate_maximal_sets(PolyhedralCone(n3))) names.push_back(s.to_string());
  CHECK(names == std::vector<std::string>{"{1}", "{2}", "{1,2,3}"});
}

TEST_CASE("weak existence") {
  Matrix r(2, 2);
  r << 1, 0.5, 0.5, 1;
  CHECK(weak_existence_check(PolyhedralCone::orthant(2), r).ok);
  r << 1, -2, -2, 1;
  const WeakExistenceReport bad = weak_existence_check(PolyhedralCone::orthant(2), r);
  CHECK(!bad.ok);
  REQUIRE(!bad.failures.empty());
  CHECK(bad.failures.front().subset.to_string() == "{1,2}");
  r << 2, 0, 0, 1;
  CHECK_THROWS_AS(weak_existence_check(PolyhedralCone::orthant(2), r), InputError);
}

TEST_CASE("weak existence on the orthant equals completely-S") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix r(3, 3);
    for (int i = 0; i < 9; ++i) r.data()[i] = u(rng);
    r.diagonal().setOnes();
    CHECK(weak_existence_check(PolyhedralCone::orthant(3), r).ok ==
          is_completely_s(r).value);
  }
}

TEST_CASE("sphere optimizer on the quarter circle") {
  const PolyhedralCone o = PolyhedralCone::orthant(2);
  const SphereSection sec(o);
  // min of x'Qx with Q = [[1,-0.6],[-0.6,1]] is 0.4 at 45 degrees.
  Matrix q(2, 2);
  q << 1, -0.6, -0.6, 1;
  Objective f{[&](const Vector& x) { return x.dot(q * x); },
              [&](const Vector& x) -> Vector { return 2.0 * q * x; }};
  const SphereExtremum e = minimize_on_sphere(sec, f);
  CHECK(e.converged);
  CHECK(!e.flagged);
  CHECK(e.grid_used);
  CHECK(e.value == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(std::abs(e.argmin(0) - M_SQRT1_2) < 1e-5);
  // linear objective: max of x1 - x2 is at e1.
  Objective lin{[](const Vector& x) { return x(0) - x(1); },
                [](const Vector&) -> Vector { return Eigen::Vector2d(1, -1); }};
  const SphereExtremum m = maximize_on_sphere(sec, lin);
  CHECK(m.value == doctest::Approx(1.0));
  // the face {x1 = 0} section is the single point e2.
  const SphereSection face(o, {0});
  CHECK(face.dim() == 1);
  const SphereExtremum fm = maximize_on_sphere(face, lin);
  CHECK(fm.value == doctest::Approx(-1.0));
  // a 1-d cone has an empty face section.
  const SphereSection apex(PolyhedralCone::orthant(1), {0});
  CHECK(apex.empty());
}
