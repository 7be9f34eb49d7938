#include "rbmcert/commands.hpp"

#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace rbmcert {

using io::Json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string row(const std::string& label, const std::string& value) {
  std::ostringstream os;
  os << "  " << std::left << std::setw(30) << label << value;
  return os.str();
}

SrbmSpec make_spec(const io::Problem& p) {
  if (p.particles) return build_gap_srbm(*p.particles);
  if (!p.cone || !p.r || !p.mu || !p.a)
    throw InputError("problem needs cone, R, mu and A (or a 'particles' block)");
  return SrbmSpec(*p.cone, *p.r, *p.mu, *p.a);
}

// Q from the file, or (RC)^{-1} when auto_m_matrix is set or the problem is a
// particle system without Q. Leaves `q` empty and fills `reason` on rejection.
struct QChoice {
  Matrix q;
  std::string reason;
  std::optional<MMatrixCertificate> m_matrix;
};

QChoice choose_q(const io::Problem& p, const SrbmSpec& spec) {
  QChoice out;
  if (p.q) {
    out.q = *p.q;
    return out;
  }
  if (!p.auto_m_matrix && !p.particles)
    throw InputError("problem needs 'Q' or \"auto_m_matrix\": true");
  if (!spec.cone().is_orthant())
    throw InputError("auto_m_matrix: the M-matrix construction needs the orthant");
  out.m_matrix = m_matrix_certificate(spec.reflection(), spec.drift(), p.settings.subset_limit);
  if (out.m_matrix->accepted) out.q = out.m_matrix->q;
  else out.reason = out.m_matrix->reason;
  return out;
}

CertifyOptions certify_options(const io::Problem& p) {
  CertifyOptions o;
  o.bridge = p.bridge;
  o.lambda_fraction = p.lambda_fraction;
  o.search = p.settings.search;
  return o;
}

void add_condition_lines(const ConditionReport& c, std::vector<std::string>& s) {
  s.push_back(row("(i)   min x'Qx on the sphere", fmt(c.positivity.extremum) +
                                                     (c.positivity.holds ? "  ok" : "  FAILS")));
  for (std::size_t j = 0; j < c.faces.size(); ++j) {
    const auto& f = c.faces[j];
    s.push_back(row("(ii)  face " + std::to_string(j + 1) + " max (R'Qx)_j",
                    f.vacuous ? "vacuous" : fmt(f.extremum) + (f.holds ? "  ok" : "  FAILS")));
  }
  s.push_back(row("(iii) max x'Q mu", fmt(c.drift.extremum) + (c.drift.holds ? "  ok" : "  FAILS")));
}

// Shared by certify and tailcheck: Q selection, the three conditions, the
// certificate and its drift region. Returns the certificate when all pass.
std::optional<LyapunovCertificate> certify_into(const io::Problem& p, const SrbmSpec& spec,
                                                CommandResult& out) {
  const QChoice qc = choose_q(p, spec);
  if (qc.m_matrix) out.result["m_matrix"] = io::to_json(*qc.m_matrix);
  if (qc.q.size() == 0) {
    out.code = ExitCode::kVerification;
    out.result["failure"] = qc.reason;
    out.summary.push_back(row("M-matrix construction", "rejected: " + qc.reason));
    return std::nullopt;
  }
  const CertifyResult cr = certify(spec, qc.q, certify_options(p));
  out.result["conditions"] = io::to_json(cr.conditions);
  add_condition_lines(cr.conditions, out.summary);
  if (!cr.certificate) {
    out.code = ExitCode::kVerification;
    out.result["failure"] = cr.failure;
    out.summary.push_back(row("certificate", "none: " + cr.failure));
    return std::nullopt;
  }
  const LyapunovCertificate& cert = *cr.certificate;
  out.result["certificate"] = io::to_json(cert);
  out.summary.push_back(row("Lambda", fmt(cert.lambda_max)));
  out.summary.push_back(row("K", fmt(cert.k_const)));
  out.summary.push_back(row("rho_max = Lambda K", fmt(cert.rho_max)));
  out.summary.push_back(row("lambda", fmt(cert.lambda)));
  if (cert.flagged) {
    out.result["warnings"].push_back("sphere optimizer: multi-start and grid disagree");
    out.summary.push_back("  warning: sphere optimizer flagged a disagreement");
  }
  if (spec.cone().is_orthant())
    out.result["orthant_sufficient"] =
        io::to_json(orthant_sufficient_check(spec.reflection(), spec.drift(), cert.q));
  try {
    const TailBound tb = negative_drift_region(cert, spec, cert.lambda, p.settings.drift);
    out.result["drift_region"] = io::to_json(tb);
    out.summary.push_back(row("drift region r(lambda)", fmt(tb.threshold_radius)));
    out.summary.push_back(row("drift margin k(lambda)", fmt(tb.drift_margin)));
  } catch (const VerificationError& e) {
    out.code = ExitCode::kVerification;
    out.result["failure"] = e.what();
    out.summary.push_back(row("drift region", std::string("FAILS: ") + e.what()));
    return std::nullopt;
  }
  return cert;
}

struct SimulationOutput {
  StationaryResult stationary;
  std::optional<TailFit> fit;
};

SimulationOutput simulate_into(const io::Problem& p, const SrbmSpec& spec, CommandResult& out,
                               const std::string& samples_name, const std::string& prefix) {
  SimulationOutput so{sample_stationary(spec, p.sim), std::nullopt};
  const StationaryResult& st = so.stationary;
  Json& j = out.result["simulation"];
  j["config"] = io::to_json(p.sim);
  j["samples"] = st.dist.size();
  j["invariants"] = io::to_json(st.invariants);
  j["transient"] = st.transient;
  j["warnings"] = st.warnings;
  j["mean_norm_second_quarter"] = st.mean_norm_second_quarter;
  j["mean_norm_last_quarter"] = st.mean_norm_last_quarter;
  j["lag1_autocorrelation"] = st.dist.lag1_autocorrelation;
  j["mean"] = io::to_json(Vector(st.dist.samples.rowwise().mean()));
  j["mean_norm"] = st.dist.samples.colwise().norm().mean();
  j["discretization"] = to_string(p.sim.scheme) + " scheme, step " + fmt(p.sim.step_h);

  out.summary.push_back(row("samples", std::to_string(st.dist.size())));
  out.summary.push_back(row("mean |Z|", fmt(j["mean_norm"].get<double>())));
  out.summary.push_back(row("path invariants", st.invariants.ok() ? "ok" : "VIOLATED"));
  for (const auto& w : st.warnings) out.summary.push_back("  warning: " + w);
  if (!st.invariants.ok()) out.code = ExitCode::kNumerical;

  std::vector<std::string> header;
  for (int i = 0; i < spec.dim(); ++i) header.push_back(prefix + std::to_string(i + 1));
  out.tables.push_back({samples_name, header, st.dist.samples.transpose()});

  try {
    so.fit = fit_tail_rate(st.dist, p.settings.tail);
    j["tail_fit"] = io::to_json(*so.fit);
    Matrix t(so.fit->thresholds.size(), 2);
    for (std::size_t k = 0; k < so.fit->thresholds.size(); ++k) {
      t(k, 0) = so.fit->thresholds[k];
      t(k, 1) = so.fit->log_ccdf[k];
    }
    out.tables.push_back({"tail", {"a", "log_ccdf"}, t});
    out.summary.push_back(row("fitted tail rate", fmt(so.fit->rate) + " +- " + fmt(so.fit->stderr)));
  } catch (const InputError& e) {
    j["tail_fit"] = nullptr;
    j["tail_fit_error"] = e.what();
    out.summary.push_back(row("fitted tail rate", std::string("unavailable: ") + e.what()));
  }
  return so;
}

CommandResult cmd_classify(const io::Problem& p) {
  CommandResult out;
  const Matrix* m = p.matrix ? &*p.matrix : (p.r ? &*p.r : nullptr);
  if (!m) throw InputError("classify needs 'matrix' (or 'R')");
  ClassifyOptions o;
  o.round_decimals = p.settings.round_decimals;
  o.limit = p.settings.subset_limit;
  const ClassificationReport r = classify(*m, o);
  out.result["classification"] = io::to_json(r);
  out.summary.push_back("matrix classes (dim " + std::to_string(r.dim) + ")");
  out.summary.push_back(row("S", yes_no(r.s.value)));
  out.summary.push_back(row("completely-S", yes_no(r.completely_s.value) +
                                                (r.completely_s.failing
                                                     ? "  failing subset " + r.completely_s.failing->to_string()
                                                     : "")));
  out.summary.push_back(row("Z", yes_no(r.z.value)));
  out.summary.push_back(row("reflection nonsingular M", yes_no(r.reflection_m)));
  out.summary.push_back(row("strictly copositive", yes_no(r.copositive.value)));
  out.summary.push_back(row("nonnegative", yes_no(r.nonnegative)));
  return out;
}

CommandResult cmd_existence(const io::Problem& p) {
  CommandResult out;
  PolyhedralCone cone = PolyhedralCone::orthant(1);
  Matrix r;
  if (p.particles) {
    r = gap_reflection(*p.particles);
    cone = PolyhedralCone::orthant(static_cast<int>(r.rows()));
  } else {
    if (!p.cone || !p.r) throw InputError("existence needs cone and R");
    cone = *p.cone;
    r = *p.r;
  }
  const WeakExistenceReport w = weak_existence_check(cone, r, p.settings.subset_limit);
  out.result["weak_existence"] = io::to_json(w);
  out.summary.push_back(row("maximal face sets", std::to_string(w.maximal_sets.size())));
  for (const auto& f : w.failures)
    out.summary.push_back(row("  not S: " + f.matrix, f.subset.to_string()));
  out.summary.push_back(row("weak existence", w.ok ? "holds" : "FAILS"));
  if (cone.is_orthant()) {
    const CompletelySResult cs = is_completely_s(r, p.settings.subset_limit);
    out.result["R_completely_s"] = cs.value;
    out.summary.push_back(row("R completely-S", yes_no(cs.value)));
  }
  if (!w.ok) out.code = ExitCode::kVerification;
  return out;
}

CommandResult cmd_certify(const io::Problem& p) {
  CommandResult out;
  const SrbmSpec spec = make_spec(p);
  certify_into(p, spec, out);
  return out;
}

CommandResult cmd_lambda(const io::Problem& p) {
  CommandResult out;
  const SrbmSpec spec = make_spec(p);
  const QChoice qc = choose_q(p, spec);
  Matrix q = qc.q;
  if (q.size() == 0 && qc.m_matrix && qc.m_matrix->q.size()) q = qc.m_matrix->q;
  if (q.size() == 0) throw InputError("lambda: no Q available: " + qc.reason);
  if (!is_symmetric(q, 1e-12) || q.rows() != spec.dim()) throw InputError("Q must be symmetric d x d");
  const SphereOptimum lam = compute_lambda_max(spec.cone(), q, spec.drift(), spec.covariance(), p.settings.search);
  const SphereOptimum k = compute_k_const(spec.cone(), q, p.settings.search);
  const double rho_max = lam.value * k.value;
  out.result["Q"] = io::to_json(q);
  out.result["Lambda"] = lam.value;
  out.result["Lambda_argmin"] = io::to_json(lam.argmin);
  out.result["K"] = k.value;
  out.result["K_argmin"] = io::to_json(k.argmin);
  out.result["rho_max"] = rho_max;
  out.result["flagged"] = lam.flagged || k.flagged;
  out.result["rhos"] = Json::array();
  for (double r : p.settings.rhos)
    out.result["rhos"].push_back({{"rho", r}, {"below_rho_max", r > 0.0 && r < rho_max}});
  out.summary.push_back(row("Lambda", fmt(lam.value)));
  out.summary.push_back(row("K", fmt(k.value)));
  out.summary.push_back(row("rho_max = Lambda K", fmt(rho_max)));
  return out;
}

CommandResult cmd_simulate(const io::Problem& p) {
  CommandResult out;
  const SrbmSpec spec = make_spec(p);
  simulate_into(p, spec, out, "samples", p.particles ? "gap_" : "z_");
  if (p.settings.write_path) {
    const PathSample path = p.particles ? simulate_path(spec, p.sim, gap_noise_map(*p.particles))
                                        : simulate_path(spec, p.sim);
    const int d = spec.dim(), m = spec.num_faces();
    Matrix t(path.size(), 2 + d + m);
    std::vector<std::string> header{"t"};
    for (int i = 0; i < d; ++i) header.push_back("z_" + std::to_string(i + 1));
    for (int i = 0; i < m; ++i) header.push_back("l_" + std::to_string(i + 1));
    header.push_back("on_grid");
    for (int k = 0; k < path.size(); ++k) {
      t(k, 0) = path.times[k];
      t.block(k, 1, 1, d) = path.states.col(k).transpose();
      t.block(k, 1 + d, 1, m) = path.local_times.col(k).transpose();
      t(k, 1 + d + m) = path.on_grid[k] ? 1.0 : 0.0;
    }
    out.tables.push_back({"path", header, t});
  }
  return out;
}

CommandResult cmd_particles(const io::Problem& p) {
  CommandResult out;
  if (!p.particles) throw InputError("particles needs a 'particles' block");
  const ParticleSystemSpec& ps = *p.particles;
  const GapStability st = stability_check(ps);
  out.result["N"] = ps.n();
  out.result["symmetric"] = ps.symmetric();
  out.result["q_minus"] = io::to_json(ps.q_minus());
  out.result["stability"] = io::to_json(st);
  out.result["gap_system"] = {{"R", io::to_json(gap_reflection(ps))},
                              {"mu", io::to_json(gap_drift(ps))},
                              {"A", io::to_json(gap_covariance(ps))}};
  out.summary.push_back(row("particles", std::to_string(ps.n()) +
                                             (ps.symmetric() ? ", symmetric collisions" : ", asymmetric collisions")));
  out.summary.push_back(row("stable", yes_no(st.stable)));
  if (ps.symmetric()) {
    const RSpectrum sp = r_spectrum(ps.n());
    out.result["R_spectrum"] = {{"eigenvalues", sp.eigenvalues}, {"inverse_norm", sp.inverse_norm}};
  }
  if (!st.stable) {
    out.code = ExitCode::kVerification;
    out.result["failure"] = "unstable: the gap process is not positive recurrent";
    return out;
  }
  if (st.rho0_applicable) out.summary.push_back(row("rho0", fmt(st.rho0)));
  const SrbmSpec spec = build_gap_srbm(ps);
  const MMatrixCertificate mm = m_matrix_certificate(spec.reflection(), spec.drift(), p.settings.subset_limit);
  out.result["m_matrix"] = io::to_json(mm);
  if (mm.accepted) {
    const CertifyResult cr = certify(spec, mm.q, certify_options(p));
    out.result["conditions"] = io::to_json(cr.conditions);
    if (cr.certificate) {
      out.result["Lambda"] = cr.certificate->lambda_max;
      out.result["K"] = cr.certificate->k_const;
      out.result["rho_max"] = cr.certificate->rho_max;
      out.summary.push_back(row("Lambda", fmt(cr.certificate->lambda_max)));
      out.summary.push_back(row("K", fmt(cr.certificate->k_const)));
      out.summary.push_back(row("rho_max = Lambda K", fmt(cr.certificate->rho_max)));
    } else {
      out.code = ExitCode::kVerification;
      out.result["failure"] = cr.failure;
    }
  } else {
    out.code = ExitCode::kVerification;
    out.result["failure"] = mm.reason;
  }
  if (ps.symmetric()) {
    try {
      const LemmaReport lr = verify_lemma_many(ps, p.settings.lemma_samples, p.sim.seed);
      out.result["lemma"] = io::to_json(lr);
      out.summary.push_back(row("lemma inequalities", lr.all() ? "hold" : "FAIL"));
      out.summary.push_back(row("min x'R^-1 x on the simplex", fmt(lr.simplex_min.value)));
    } catch (const VerificationError& e) {
      out.code = ExitCode::kVerification;
      out.result["lemma_failure"] = e.what();
      out.summary.push_back(row("lemma inequalities", std::string("FAIL: ") + e.what()));
    }
  }
  if (p.has_simulation) simulate_into(p, spec, out, "gaps", "gap_");
  return out;
}

CommandResult cmd_tailcheck(const io::Problem& p) {
  CommandResult out;
  const SrbmSpec spec = make_spec(p);
  std::optional<GapStability> st;
  if (p.particles) {
    st = stability_check(*p.particles);
    out.result["stability"] = io::to_json(*st);
    if (!st->stable) {
      out.code = ExitCode::kVerification;
      out.result["failure"] = "unstable: the gap process is not positive recurrent";
      out.summary.push_back(row("stable", "no; not simulating"));
      return out;
    }
  }
  const auto cert = certify_into(p, spec, out);
  if (!cert) {
    out.summary.push_back("  not simulating");
    return out;
  }
  std::string which = p.settings.tail_bound;
  if (which == "auto") which = (st && st->rho0_applicable) ? "rho0" : "rho_max";
  if (which == "rho0" && !(st && st->rho0_applicable))
    throw InputError("tail_bound rho0 needs a particle system with symmetric collisions");
  const double bound = which == "rho0" ? st->rho0 : cert->rho_max;
  out.result["Lambda"] = cert->lambda_max;
  out.result["K"] = cert->k_const;
  out.result["rho_max"] = cert->rho_max;
  if (st && st->rho0_applicable) out.result["rho0"] = st->rho0;
  out.result["bound_used"] = which;

  const SimulationOutput so = simulate_into(p, spec, out, "samples", p.particles ? "gap_" : "z_");
  if (!so.fit) {
    out.code = ExitCode::kNumerical;
    out.result["verdict"] = "FAIL";
    return out;
  }
  const BoundVerdict v = compare_bound(*so.fit, bound);
  out.result["rho_hat"] = so.fit->rate;
  out.result["stderr"] = so.fit->stderr;
  out.result["slack"] = v.slack;
  out.result["verdict"] = v.pass ? "PASS" : "FAIL";
  out.summary.push_back(row("bound (" + which + ")", fmt(bound)));
  out.summary.push_back(row("verdict", v.pass ? "PASS" : "FAIL"));
  if (!v.pass && out.code == ExitCode::kOk) out.code = ExitCode::kVerification;
  return out;
}

const std::map<std::string, std::function<CommandResult(const io::Problem&)>>& table() {
  static const std::map<std::string, std::function<CommandResult(const io::Problem&)>> t{
      {"classify", cmd_classify}, {"existence", cmd_existence}, {"certify", cmd_certify},
      {"lambda", cmd_lambda},     {"simulate", cmd_simulate},   {"particles", cmd_particles},
      {"tailcheck", cmd_tailcheck}};
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "existence", "certify", "lambda",
                                              "simulate", "particles", "tailcheck"};
  return names;
}

CommandResult run_command(const std::string& name, const Json& problem) {
  const auto it = table().find(name);
  if (it == table().end()) throw InputError("unknown command '" + name + "'");
  const io::Problem p = io::parse_problem(problem);
  CommandResult out = it->second(p);
  if (out.result.is_null()) out.result = Json::object();
  return out;
}

}  // namespace rbmcert
