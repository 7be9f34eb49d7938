#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbmcert/empirics.hpp"
#include "rbmcert/lyapunov.hpp"
#include "rbmcert/matrix_classes.hpp"
#include "rbmcert/particles.hpp"
#include "rbmcert/simulator.hpp"

namespace rbmcert::io {

using Json = nlohmann::json;

// Every default tolerance and sampling size used by the commands, in one
// place. Each field maps to a key of the "settings" object.
struct Settings {
  std::optional<int> round_decimals;
  int subset_limit = kExhaustiveLimit;
  SphereSearchOptions search{};
  DriftRegionOptions drift{};
  TailWindow tail{};
  int lemma_samples = 10000;
  std::string tail_bound = "auto";  // "auto", "rho_max" or "rho0"
  std::vector<double> rhos;         // extra exponents to test in `lambda`
  bool write_path = false;          // path.csv from replica 0 in `simulate`
};

// A parsed problem file. Which fields are required depends on the command.
struct Problem {
  std::optional<Matrix> matrix;
  std::optional<PolyhedralCone> cone;
  std::optional<Matrix> r, a, q;
  std::optional<Vector> mu;
  bool auto_m_matrix = false;
  SmoothBridge bridge{};
  double lambda_fraction = 0.5;
  std::optional<ParticleSystemSpec> particles;
  SimConfig sim{};
  bool has_simulation = false;  // a "simulation" object was given
  Settings settings{};
};

Matrix matrix_from_json(const Json& j, const std::string& name);
Vector vector_from_json(const Json& j, const std::string& name);
Json to_json(const Matrix& m);
Json to_json(const Vector& v);

// Strict parse: unknown keys and wrong types raise InputError.
Problem parse_problem(const Json& doc);

Json load_json_file(const std::string& path);
// Comma separated decimals, one row per line; blank lines and lines
// starting with '#' are skipped.
Matrix read_csv_matrix(const std::string& path);
Matrix parse_csv_matrix(const std::string& text);

// "a.b.c=value": value is parsed as JSON when possible, else kept as a
// string. Intermediate objects are created.
void apply_override(Json& doc, const std::string& assignment);

// Rows of `rows` become lines; `header` names the columns.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows);

Json to_json(const ClassificationReport& r);
Json to_json(const WeakExistenceReport& r);
Json to_json(const ConditionReport& r);
Json to_json(const LyapunovCertificate& c);
Json to_json(const TailBound& t);
Json to_json(const TailFit& f);
Json to_json(const InvariantReport& r);
Json to_json(const GapStability& s);
Json to_json(const LemmaReport& r);
Json to_json(const ProbeReport& r);
Json to_json(const SimConfig& c);
Json to_json(const MMatrixCertificate& m);
Json to_json(const OrthantSufficientReport& r);

}  // namespace rbmcert::io
