#include "rbmcert/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert::io {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

double get_double(const Json& j, const std::string& name) {
  if (!j.is_number()) throw InputError(name + ": expected a number");
  return j.get<double>();
}

long get_long(const Json& j, const std::string& name) {
  if (!j.is_number_integer()) throw InputError(name + ": expected an integer");
  return j.get<long>();
}

int get_int(const Json& j, const std::string& name) {
  const long v = get_long(j, name);
  if (v < -2147483647L || v > 2147483647L) throw InputError(name + ": out of range");
  return static_cast<int>(v);
}

bool get_bool(const Json& j, const std::string& name) {
  if (!j.is_boolean()) throw InputError(name + ": expected true or false");
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& name) {
  if (!j.is_string()) throw InputError(name + ": expected a string");
  return j.get<std::string>();
}

Json one_based(const IndexSubset& s) { return s.one_based(); }

Json optional_vector(const std::optional<Vector>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

PolyhedralCone parse_cone(const Json& j) {
  check_keys(j, {"orthant", "normals", "offsets"}, "cone");
  if (j.contains("orthant")) {
    if (j.contains("normals") || j.contains("offsets"))
      throw InputError("cone: give either 'orthant' or 'normals', not both");
    const int d = get_int(j["orthant"], "cone.orthant");
    if (d < 1) throw InputError("cone.orthant: dimension must be positive");
    return PolyhedralCone::orthant(d);
  }
  if (!j.contains("normals")) throw InputError("cone: needs 'orthant' or 'normals'");
  Matrix n = matrix_from_json(j["normals"], "cone.normals");
  if (j.contains("offsets")) return PolyhedralCone(n, vector_from_json(j["offsets"], "cone.offsets"));
  return PolyhedralCone(n);
}

SimConfig parse_simulation(const Json& j) {
  check_keys(j, {"h", "steps", "burn_in", "thinning", "seed", "replicas", "scheme", "initial_state"},
             "simulation");
  SimConfig c;
  if (j.contains("h")) c.step_h = get_double(j["h"], "simulation.h");
  if (j.contains("steps")) c.horizon_steps = get_long(j["steps"], "simulation.steps");
  if (j.contains("burn_in")) c.burn_in_steps = get_long(j["burn_in"], "simulation.burn_in");
  if (j.contains("thinning")) c.thinning = get_int(j["thinning"], "simulation.thinning");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long>() >= 0))
      throw InputError("simulation.seed: expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("replicas")) c.replicas = get_int(j["replicas"], "simulation.replicas");
  if (j.contains("scheme")) c.scheme = scheme_from_string(get_string(j["scheme"], "simulation.scheme"));
  if (j.contains("initial_state"))
    c.initial_state = vector_from_json(j["initial_state"], "simulation.initial_state");
  c.validate();
  return c;
}

Settings parse_settings(const Json& j) {
  check_keys(j,
             {"round_decimals", "subset_limit", "sphere_starts", "grid_points", "grid_max_dim",
              "agreement_tol", "max_iter", "drift_radii", "drift_directions", "radius_cap_factor",
              "tail_quantile_lo", "tail_quantile_hi", "tail_points", "min_tail_samples",
              "lemma_samples", "tail_bound", "rhos", "write_path"},
             "settings");
  Settings s;
  auto gi = [&](const char* k, int& out) {
    if (j.contains(k)) out = get_int(j[k], std::string("settings.") + k);
  };
  auto gd = [&](const char* k, double& out) {
    if (j.contains(k)) out = get_double(j[k], std::string("settings.") + k);
  };
  if (j.contains("round_decimals")) s.round_decimals = get_int(j["round_decimals"], "settings.round_decimals");
  gi("subset_limit", s.subset_limit);
  gi("sphere_starts", s.search.starts);
  gi("grid_points", s.search.grid_points);
  gi("grid_max_dim", s.search.grid_max_dim);
  gd("agreement_tol", s.search.agreement_tol);
  gi("max_iter", s.search.max_iter);
  gi("drift_radii", s.drift.radii);
  gi("drift_directions", s.drift.directions);
  gd("radius_cap_factor", s.drift.radius_cap_factor);
  gd("tail_quantile_lo", s.tail.quantile_lo);
  gd("tail_quantile_hi", s.tail.quantile_hi);
  gi("tail_points", s.tail.points);
  gi("min_tail_samples", s.tail.min_tail_samples);
  gi("lemma_samples", s.lemma_samples);
  if (j.contains("tail_bound")) {
    s.tail_bound = get_string(j["tail_bound"], "settings.tail_bound");
    if (s.tail_bound != "auto" && s.tail_bound != "rho_max" && s.tail_bound != "rho0")
      throw InputError("settings.tail_bound: expected auto, rho_max or rho0");
  }
  if (j.contains("rhos")) {
    const Vector r = vector_from_json(j["rhos"], "settings.rhos");
    s.rhos.assign(r.data(), r.data() + r.size());
  }
  if (j.contains("write_path")) s.write_path = get_bool(j["write_path"], "settings.write_path");

  if (s.subset_limit < 1) throw InputError("settings.subset_limit: must be positive");
  if (s.search.starts < 1 || s.search.grid_points < 0 || s.search.max_iter < 1)
    throw InputError("settings: sphere search sizes must be positive");
  if (!(s.search.agreement_tol > 0)) throw InputError("settings.agreement_tol: must be positive");
  if (s.drift.radii < 1 || s.drift.directions < 1 || !(s.drift.radius_cap_factor > 1))
    throw InputError("settings: drift region sizes must be positive");
  if (!(0 <= s.tail.quantile_lo && s.tail.quantile_lo < s.tail.quantile_hi && s.tail.quantile_hi < 1))
    throw InputError("settings: need 0 <= tail_quantile_lo < tail_quantile_hi < 1");
  if (s.tail.points < 2 || s.tail.min_tail_samples < 2)
    throw InputError("settings: tail_points and min_tail_samples must be at least 2");
  if (s.lemma_samples < 1) throw InputError("settings.lemma_samples: must be positive");
  return s;
}

ParticleSystemSpec parse_particles(const Json& j) {
  check_keys(j, {"N", "g", "sigma2", "q_plus"}, "particles");
  if (!j.contains("g") || !j.contains("sigma2")) throw InputError("particles: needs 'g' and 'sigma2'");
  Vector g = vector_from_json(j["g"], "particles.g");
  Vector s2 = vector_from_json(j["sigma2"], "particles.sigma2");
  if (j.contains("N") && get_int(j["N"], "particles.N") != g.size())
    throw InputError("particles.N: does not match the length of g");
  std::optional<Vector> qp;
  if (j.contains("q_plus")) qp = vector_from_json(j["q_plus"], "particles.q_plus");
  return ParticleSystemSpec(std::move(g), std::move(s2), std::move(qp));
}

}  // namespace

Matrix matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw InputError(name + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError(name + ": rows must be nonempty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError(name + ": ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = get_double(row[k], name);
  }
  if (!m.allFinite()) throw InputError(name + ": non-finite entry");
  return m;
}

Vector vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(name + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_double(j[i], name);
  if (!v.allFinite()) throw InputError(name + ": non-finite entry");
  return v;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Problem parse_problem(const Json& doc) {
  check_keys(doc,
             {"matrix", "cone", "R", "mu", "A", "Q", "auto_m_matrix", "bridge", "lambda_fraction",
              "particles", "simulation", "settings", "description"},
             "problem");
  Problem p;
  if (doc.contains("matrix")) p.matrix = matrix_from_json(doc["matrix"], "matrix");
  if (doc.contains("R")) p.r = matrix_from_json(doc["R"], "R");
  if (doc.contains("A")) p.a = matrix_from_json(doc["A"], "A");
  if (doc.contains("Q")) p.q = matrix_from_json(doc["Q"], "Q");
  if (doc.contains("mu")) p.mu = vector_from_json(doc["mu"], "mu");
  if (doc.contains("cone")) p.cone = parse_cone(doc["cone"]);
  else if (p.r) p.cone = PolyhedralCone::orthant(static_cast<int>(p.r->rows()));
  if (doc.contains("auto_m_matrix")) p.auto_m_matrix = get_bool(doc["auto_m_matrix"], "auto_m_matrix");
  if (p.auto_m_matrix && p.q) throw InputError("give either 'Q' or 'auto_m_matrix', not both");
  if (doc.contains("bridge")) {
    const Json& b = doc["bridge"];
    check_keys(b, {"s1", "s2"}, "bridge");
    const double s1 = b.contains("s1") ? get_double(b["s1"], "bridge.s1") : 1.0;
    const double s2 = b.contains("s2") ? get_double(b["s2"], "bridge.s2") : 2.0;
    p.bridge = SmoothBridge(s1, s2);
  }
  if (doc.contains("lambda_fraction")) {
    p.lambda_fraction = get_double(doc["lambda_fraction"], "lambda_fraction");
    if (!(p.lambda_fraction > 0 && p.lambda_fraction < 1))
      throw InputError("lambda_fraction: must lie in (0, 1)");
  }
  if (doc.contains("particles")) {
    if (doc.contains("R") || doc.contains("mu") || doc.contains("A") || doc.contains("cone"))
      throw InputError("'particles' replaces cone, R, mu and A; give one or the other");
    p.particles = parse_particles(doc["particles"]);
  }
  if (doc.contains("simulation")) {
    p.sim = parse_simulation(doc["simulation"]);
    p.has_simulation = true;
  }
  if (doc.contains("settings")) p.settings = parse_settings(doc["settings"]);
  if (doc.contains("description") && !doc["description"].is_string())
    throw InputError("description: expected a string");
  return p;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Matrix parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError("csv line " + std::to_string(lineno) + ": cannot parse '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw InputError("csv line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("csv: no data rows");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
  if (!m.allFinite()) throw InputError("csv: non-finite entry");
  return m;
}

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv_matrix(buf.str());
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InputError("--set: empty key component in '" + key + "'");
    if (!node->is_object()) throw InputError("--set: '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index k = 0; k < rows.cols(); ++k) out << (k ? "," : "") << rows(i, k);
    out << '\n';
  }
}

Json to_json(const ClassificationReport& r) {
  Json j;
  j["dim"] = r.dim;
  j["s"] = {{"value", r.s.value}, {"margin", r.s.margin},
            {"witness", r.s.value ? to_json(r.s.witness) : Json(nullptr)}};
  j["completely_s"] = {{"value", r.completely_s.value},
                       {"failing_subset", r.completely_s.failing ? one_based(*r.completely_s.failing)
                                                                 : Json(nullptr)}};
  Json viol = nullptr;
  if (r.z.violating) viol = {r.z.violating->first + 1, r.z.violating->second + 1};
  j["z"] = {{"value", r.z.value}, {"violating_entry", viol}};
  j["reflection_nonsingular_m"] = r.reflection_m;
  j["strictly_copositive"] = {
      {"value", r.copositive.value},
      {"violation", optional_vector(r.copositive.violation)},
      {"subset", r.copositive.subset ? one_based(*r.copositive.subset) : Json(nullptr)}};
  j["nonnegative"] = r.nonnegative;
  return j;
}

Json to_json(const WeakExistenceReport& r) {
  Json j;
  j["ok"] = r.ok;
  j["maximal_sets"] = Json::array();
  for (const auto& s : r.maximal_sets) j["maximal_sets"].push_back(one_based(s));
  j["failures"] = Json::array();
  for (const auto& f : r.failures)
    j["failures"].push_back({{"subset", one_based(f.subset)}, {"matrix", f.matrix}});
  return j;
}

namespace {

Json check_json(const ConditionCheck& c) {
  return {{"holds", c.holds},       {"vacuous", c.vacuous}, {"extremum", c.extremum},
          {"argument", to_json(c.argument)}, {"flagged", c.flagged}};
}

}  // namespace

Json to_json(const ConditionReport& r) {
  Json j;
  j["all_hold"] = r.all();
  j["first_failure"] = r.first_failure().empty() ? Json(nullptr) : Json(r.first_failure());
  j["positivity"] = check_json(r.positivity);
  j["faces"] = Json::array();
  for (const auto& f : r.faces) j["faces"].push_back(check_json(f));
  j["drift"] = check_json(r.drift);
  return j;
}

Json to_json(const LyapunovCertificate& c) {
  Json j;
  j["Q"] = to_json(c.q);
  j["s1"] = c.bridge.s1();
  j["s2"] = c.bridge.s2();
  j["lambda"] = c.lambda;
  j["Lambda"] = c.lambda_max;
  j["K"] = c.k_const;
  j["rho_max"] = c.rho_max;
  j["Lambda_argmin"] = to_json(c.lambda_argmin);
  j["K_argmin"] = to_json(c.k_argmin);
  j["conditions"] = to_json(c.conditions);
  j["flagged"] = c.flagged;
  return j;
}

Json to_json(const TailBound& t) {
  return {{"found", t.found},
          {"threshold_radius", t.threshold_radius},
          {"drift_margin", t.drift_margin},
          {"radii", t.radii},
          {"sup_beta", t.sup_beta}};
}

Json to_json(const TailFit& f) {
  return {{"rate", f.rate},
          {"stderr", f.stderr},
          {"intercept", f.intercept},
          {"tail_samples", f.tail_samples},
          {"points", f.thresholds.size()},
          {"window",
           {{"quantile_lo", f.window.quantile_lo},
            {"quantile_hi", f.window.quantile_hi},
            {"a_lo", f.thresholds.empty() ? 0.0 : f.thresholds.front()},
            {"a_hi", f.thresholds.empty() ? 0.0 : f.thresholds.back()}}}};
}

Json to_json(const InvariantReport& r) {
  return {{"ok", r.ok()},
          {"identity_residual", r.identity_residual},
          {"min_face_value", r.min_face_value},
          {"monotone", r.monotone},
          {"complementarity", r.complementarity},
          {"records", r.records}};
}

Json to_json(const GapStability& s) {
  return {{"g_bar", to_json(s.g_bar)},
          {"b", to_json(s.b_vec)},
          {"b_from_R", to_json(s.b_from_r)},
          {"stable", s.stable},
          {"rho0_applicable", s.rho0_applicable},
          {"rho0", s.rho0},
          {"A_norm", s.a_norm}};
}

Json to_json(const LemmaReport& r) {
  Json j;
  j["all_hold"] = r.all();
  j["items"] = Json::array();
  for (const auto& it : r.items)
    j["items"].push_back({{"name", it.name},
                          {"holds", it.holds},
                          {"worst_slack", it.worst_slack},
                          {"worst_point", to_json(it.worst_point)}});
  j["simplex_min"] = {{"value", r.simplex_min.value},
                      {"argmin", to_json(r.simplex_min.argmin)},
                      {"iterations", r.simplex_min.iterations}};
  j["Lambda"] = r.lambda_max;
  j["K"] = r.k_const;
  j["rho_max"] = r.rho_max;
  j["rho0"] = r.rho0;
  return j;
}

Json to_json(const ProbeReport& r) {
  return {{"times", r.times},       {"mean", r.mean},          {"stderr", r.stderr},
          {"pass", r.pass},         {"k_rate", r.k_rate},      {"b_const", r.b_const},
          {"radius", r.radius},     {"start", to_json(r.start)}, {"replicas", r.replicas}};
}

Json to_json(const SimConfig& c) {
  return {{"h", c.step_h},
          {"steps", c.horizon_steps},
          {"burn_in", c.burn_in()},
          {"thinning", c.thinning},
          {"seed", c.seed},
          {"replicas", c.replicas},
          {"scheme", to_string(c.scheme)},
          {"initial_state", optional_vector(c.initial_state)}};
}

Json to_json(const MMatrixCertificate& m) {
  return {{"accepted", m.accepted},
          {"reason", m.reason.empty() ? Json(nullptr) : Json(m.reason)},
          {"C", m.symmetrizer.found ? to_json(m.symmetrizer.c) : Json(nullptr)},
          {"R_inv_mu", to_json(m.r_inv_mu)},
          {"Q", m.q.size() ? to_json(m.q) : Json(nullptr)}};
}

Json to_json(const OrthantSufficientReport& r) {
  return {{"holds", r.holds},
          {"Q_strictly_copositive", r.copositive},
          {"Q_nonsingular", r.nonsingular},
          {"QR_is_Z", r.qr_is_z},
          {"Q_mu_negative", r.q_mu_negative},
          {"QR", to_json(r.qr)},
          {"Q_mu", to_json(r.q_mu)}};
}

}  // namespace rbmcert::io
