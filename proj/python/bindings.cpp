#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rbmcert/commands.hpp"

namespace py = pybind11;
using namespace rbmcert;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string dump(const io::Json& j) { return j.dump(); }

SimConfig make_config(double h, long steps, std::optional<long> burn_in, int thinning,
                      std::uint64_t seed, int replicas, const std::string& scheme) {
  SimConfig c;
  c.step_h = h;
  c.horizon_steps = steps;
  c.burn_in_steps = burn_in;
  c.thinning = thinning;
  c.seed = seed;
  c.replicas = replicas;
  c.scheme = scheme_from_string(scheme);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stability certificates for reflected Brownian motion in polyhedral cones";

  auto& base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<CapabilityError>(m, "CapabilityError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  auto& ver = py::register_exception<VerificationError>(m, "VerificationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", ver.ptr());

  // matrix classes
  m.def("is_s_matrix", [](const Matrix& a) { return is_s_matrix(a).value; });
  m.def("is_completely_s", [](const Matrix& a) { return is_completely_s(a).value; });
  m.def("is_z_matrix", [](const Matrix& a) { return is_z_matrix(a).value; });
  m.def("is_reflection_nonsingular_m", [](const Matrix& a) { return is_reflection_nonsingular_m(a); });
  m.def("is_strictly_copositive", [](const Matrix& a) { return is_strictly_copositive(a).value; });
  m.def("classify_json", [](const Matrix& a) { return dump(io::to_json(classify(a))); });

  py::class_<PolyhedralCone>(m, "PolyhedralCone")
      .def(py::init<Matrix>(), py::arg("normals"))
      .def_static("orthant", &PolyhedralCone::orthant)
      .def_property_readonly("dim", &PolyhedralCone::dim)
      .def_property_readonly("num_faces", &PolyhedralCone::num_faces)
      .def_property_readonly("normals", &PolyhedralCone::normals)
      .def("contains", [](const PolyhedralCone& c, const Vector& x) { return contains(c, x); })
      .def("maximal_sets", [](const PolyhedralCone& c) {
        std::vector<std::vector<int>> out;
        for (const auto& s : enumerate_maximal_sets(c)) out.push_back(s.one_based());
        return out;
      });

  py::class_<SrbmSpec>(m, "SrbmSpec")
      .def(py::init<PolyhedralCone, Matrix, Vector, Matrix>(), py::arg("cone"), py::arg("R"),
           py::arg("mu"), py::arg("A"))
      .def_property_readonly("dim", &SrbmSpec::dim)
      .def_property_readonly("R", &SrbmSpec::reflection)
      .def_property_readonly("mu", &SrbmSpec::drift)
      .def_property_readonly("A", &SrbmSpec::covariance);

  // certificate
  m.def("u_eval", [](const Matrix& q, const Vector& x) {
    const auto r = u_eval(q, x);
    return py::make_tuple(r.value, r.gradient, r.hessian);
  });
  m.def(
      "v_eval",
      [](const Matrix& q, double lambda, const Vector& x, double s1, double s2) {
        const auto r = v_eval(q, SmoothBridge(s1, s2), lambda, x);
        return py::make_tuple(r.value, r.gradient, r.hessian);
      },
      py::arg("Q"), py::arg("lam"), py::arg("x"), py::arg("s1") = 1.0, py::arg("s2") = 2.0);
  m.def("check_conditions_json",
        [](const SrbmSpec& s, const Matrix& q) { return dump(io::to_json(check_conditions(s, q))); });
  m.def("compute_lambda_max", [](const SrbmSpec& s, const Matrix& q) {
    const auto r = compute_lambda_max(s.cone(), q, s.drift(), s.covariance());
    return py::make_tuple(r.value, r.argmin);
  });
  m.def("compute_k_const", [](const PolyhedralCone& c, const Matrix& q) {
    const auto r = compute_k_const(c, q);
    return py::make_tuple(r.value, r.argmin);
  });
  m.def(
      "certify_json",
      [](const SrbmSpec& s, const Matrix& q, double fraction) {
        CertifyOptions o;
        o.lambda_fraction = fraction;
        const CertifyResult r = certify(s, q, o);
        io::Json j;
        j["conditions"] = io::to_json(r.conditions);
        j["certificate"] = r.certificate ? io::to_json(*r.certificate) : io::Json(nullptr);
        j["failure"] = r.failure;
        return dump(j);
      },
      py::arg("spec"), py::arg("Q"), py::arg("lambda_fraction") = 0.5);
  m.def("m_matrix_certificate_json",
        [](const Matrix& r, const Vector& mu) { return dump(io::to_json(m_matrix_certificate(r, mu))); });

  // Skorohod map and simulation
  m.def("skorohod_solve_orthant", [](const Matrix& r, const Matrix& x) {
    const PathSample p = skorohod_solve_orthant(r, x);
    return py::make_tuple(p.states, p.local_times);
  });
  m.def(
      "sample_stationary",
      [](const SrbmSpec& s, double h, long steps, std::optional<long> burn_in, int thinning,
         std::uint64_t seed, int replicas, const std::string& scheme) {
        StationaryResult r;
        const SimConfig c = make_config(h, steps, burn_in, thinning, seed, replicas, scheme);
        {
          py::gil_scoped_release release;
          r = sample_stationary(s, c);
        }
        return py::make_tuple(r.dist.samples, r.invariants.ok(), r.warnings);
      },
      py::arg("spec"), py::arg("h") = 0.01, py::arg("steps") = 100000, py::arg("burn_in") = py::none(),
      py::arg("thinning") = 10, py::arg("seed") = 1, py::arg("replicas") = 1,
      py::arg("scheme") = "bridge");
  m.def(
      "fit_tail_rate",
      [](const std::vector<double>& norms, int min_tail_samples) {
        TailWindow w;
        w.min_tail_samples = min_tail_samples;
        const TailFit f = fit_tail_rate(from_norms(norms), w);
        return py::make_tuple(f.rate, f.stderr);
      },
      py::arg("norms"), py::arg("min_tail_samples") = 1000);
  m.def("philox4x32", &philox4x32);

  // particle systems
  m.def(
      "stability_check_json",
      [](const Vector& g, const Vector& s2, std::optional<Vector> qp) {
        return dump(io::to_json(stability_check(ParticleSystemSpec(g, s2, qp))));
      },
      py::arg("g"), py::arg("sigma2"), py::arg("q_plus") = py::none());
  m.def(
      "gap_system",
      [](const Vector& g, const Vector& s2, std::optional<Vector> qp) {
        const ParticleSystemSpec p(g, s2, qp);
        return py::make_tuple(gap_reflection(p), gap_drift(p), gap_covariance(p));
      },
      py::arg("g"), py::arg("sigma2"), py::arg("q_plus") = py::none());
  m.def("r_spectrum", [](int n) {
    const RSpectrum s = r_spectrum(n);
    return py::make_tuple(s.eigenvalues, s.inverse_norm);
  });
  m.def("minimize_quadratic_on_simplex", [](const Matrix& p) {
    const SimplexMinimum s = minimize_quadratic_on_simplex(p);
    return py::make_tuple(s.value, s.argmin);
  });

  // the command layer used by the CLI
  m.def("command_names", &command_names);
  m.def("run_command_json", [](const std::string& name, const std::string& problem) {
    io::Json doc;
    try {
      doc = io::Json::parse(problem);
    } catch (const io::Json::parse_error& e) {
      throw InputError(e.what());
    }
    CommandResult r;
    {
      py::gil_scoped_release release;
      r = run_command(name, doc);
    }
    return py::make_tuple(static_cast<int>(r.code), dump(r.result), r.summary);
  });
}
