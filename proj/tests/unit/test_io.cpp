#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rbmcert/commands.hpp"

using namespace rbmcert;
using io::Json;

namespace {

Json example() {
  return Json::parse(R"({
    "cone": {"orthant": 2},
    "R": [[1, 0.5], [0.5, 1]],
    "mu": [-1, -1],
    "A": [[1, 0], [0, 1]],
    "Q": [[1, -0.6], [-0.6, 1]]
  })");
}

}  // namespace

TEST_CASE("strict parsing") {
  Json j = example();
  const io::Problem p = io::parse_problem(j);
  CHECK(p.cone->is_orthant());
  CHECK((*p.q)(0, 1) == -0.6);
  CHECK(p.sim.step_h == 0.01);

  j["bogus"] = 1;
  CHECK_THROWS_AS(io::parse_problem(j), InputError);
  j = example();
  j["simulation"] = {{"h", 0.01}, {"stepz", 10}};
  CHECK_THROWS_AS(io::parse_problem(j), InputError);
  j = example();
  j["R"] = Json::parse("[[1, 0.5], [0.5]]");
  CHECK_THROWS_AS(io::parse_problem(j), InputError);
  j = example();
  j["auto_m_matrix"] = true;
  CHECK_THROWS_AS(io::parse_problem(j), InputError);
  j = example();
  j["particles"] = {{"g", {1, 0}}, {"sigma2", {1, 1}}};
  CHECK_THROWS_AS(io::parse_problem(j), InputError);
  CHECK_THROWS_AS(io::parse_problem(Json::parse(R"({"particles": {"N": 3, "g": [1, 0], "sigma2": [1, 1]}})")),
                  InputError);
  CHECK_THROWS_AS(io::parse_problem(Json::parse(R"({"simulation": {"scheme": "milstein"}})")), InputError);
  CHECK_THROWS_AS(io::parse_problem(Json::parse(R"({"settings": {"tail_bound": "best"}})")), InputError);
}

TEST_CASE("overrides") {
  Json j = example();
  io::apply_override(j, "simulation.steps=5000");
  io::apply_override(j, "simulation.scheme=euler");
  io::apply_override(j, "mu=[-2,-1]");
  CHECK(j["simulation"]["steps"] == 5000);
  CHECK(j["simulation"]["scheme"] == "euler");
  const io::Problem p = io::parse_problem(j);
  CHECK(p.sim.horizon_steps == 5000);
  CHECK(p.sim.scheme == Scheme::kEuler);
  CHECK((*p.mu)(0) == -2);
  CHECK_THROWS_AS(io::apply_override(j, "novalue"), InputError);
  CHECK_THROWS_AS(io::apply_override(j, "mu.x=1"), InputError);
}

TEST_CASE("csv matrices") {
  const Matrix m = io::parse_csv_matrix("# comment\n1,2\n\n3, 4\r\n");
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 4);
  CHECK_THROWS_AS(io::parse_csv_matrix("1,2\n3\n"), InputError);
  CHECK_THROWS_AS(io::parse_csv_matrix("1,x\n"), InputError);
  CHECK_THROWS_AS(io::parse_csv_matrix(""), InputError);
}

TEST_CASE("classify command") {
  Json j;
  j["matrix"] = example()["R"];
  CommandResult r = run_command("classify", j);
  CHECK(r.code == ExitCode::kOk);
  CHECK(r.result["classification"]["completely_s"]["value"] == true);
  CHECK(r.result["classification"]["reflection_nonsingular_m"] == false);
  CHECK(r.result["classification"]["z"]["violating_entry"] == Json::parse("[1, 2]"));

  j["matrix"] = io::to_json(Matrix(Matrix::Identity(3, 3)));
  r = run_command("classify", j);
  for (const char* k : {"s", "completely_s", "z", "strictly_copositive"})
    CHECK(r.result["classification"][k]["value"] == true);
  CHECK(r.result["classification"]["reflection_nonsingular_m"] == true);
  CHECK(r.result["classification"]["nonnegative"] == true);

  j["matrix"] = io::to_json(Matrix(Matrix::Identity(25, 25)));
  try {
    run_command("classify", j);
    FAIL("expected a capability error");
  } catch (const Error& e) {
    CHECK(e.code() == ExitCode::kCapability);
  }
  CHECK_THROWS_AS(run_command("nonsense", j), InputError);
}

TEST_CASE("certify command") {
  CommandResult r = run_command("certify", example());
  CHECK(r.code == ExitCode::kOk);
  CHECK(r.result["certificate"]["Lambda"].get<double>() > 0);
  CHECK(r.result["drift_region"]["found"] == true);
  CHECK(r.result["orthant_sufficient"]["holds"] == true);

  Json z = example();
  z["mu"] = {0, 0};
  r = run_command("certify", z);
  CHECK(r.code == ExitCode::kVerification);
  CHECK(r.result["failure"].get<std::string>().find("(iii)") != std::string::npos);

  const Json atlas = Json::parse(R"({"particles": {"N": 3, "g": [2, 1, 0], "sigma2": [1, 1, 1]}})");
  r = run_command("certify", atlas);
  CHECK(r.code == ExitCode::kOk);
  const Matrix q = io::matrix_from_json(r.result["certificate"]["Q"], "Q");
  CHECK((q - symmetric_gap_reflection(3).inverse()).cwiseAbs().maxCoeff() < 1e-12);

  Json no_q = example();
  no_q.erase("Q");
  CHECK_THROWS_AS(run_command("certify", no_q), InputError);
}

TEST_CASE("tailcheck stops before simulating an unstable system") {
  const Json j = Json::parse(R"({"particles": {"g": [0, 1, 2], "sigma2": [1, 1, 1]}})");
  const CommandResult r = run_command("tailcheck", j);
  CHECK(r.code == ExitCode::kVerification);
  CHECK(!r.result.contains("simulation"));
}

TEST_CASE("simulate is deterministic and writes tables") {
  Json j = example();
  j["simulation"] = {{"steps", 20000}, {"replicas", 2}, {"seed", 9}};
  j["settings"] = {{"write_path", true}, {"min_tail_samples", 100}};
  const CommandResult a = run_command("simulate", j);
  const CommandResult b = run_command("simulate", j);
  CHECK(a.result.dump() == b.result.dump());
  CHECK(a.code == ExitCode::kOk);
  REQUIRE(a.tables.size() == 3);
  CHECK(a.tables[0].name == "samples");
  CHECK(a.tables[0].rows.cols() == 2);
  CHECK(a.tables[2].name == "path");
  CHECK(a.tables[2].header.front() == "t");
}
