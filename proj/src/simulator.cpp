#include "rbmcert/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "rbmcert/errors.hpp"

namespace rbmcert {

std::string to_string(Scheme s) { return s == Scheme::kBridge ? "bridge" : "euler"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "bridge") return Scheme::kBridge;
  if (s == "euler") return Scheme::kEuler;
  throw InputError("unknown scheme '" + s + "' (expected bridge or euler)");
}

long SimConfig::burn_in() const {
  return burn_in_steps ? *burn_in_steps : horizon_steps / 5;
}

void SimConfig::validate() const {
  if (!(step_h > 0.0 && step_h <= 0.1)) throw InputError("sim: step_h must lie in (0, 0.1]");
  if (horizon_steps < 1) throw InputError("sim: horizon_steps must be positive");
  if (burn_in() < 0 || burn_in() >= horizon_steps) {
    throw InputError("sim: burn_in_steps must lie in [0, horizon_steps)");
  }
  if (thinning < 1) throw InputError("sim: thinning must be positive");
  if (replicas < 1) throw InputError("sim: replicas must be positive");
  if (initial_state && !initial_state->allFinite()) throw InputError("sim: non-finite initial state");
}

std::string SimConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "h=" << step_h << ";horizon=" << horizon_steps << ";burn_in=" << burn_in()
     << ";thinning=" << thinning << ";seed=" << seed << ";replicas=" << replicas
     << ";scheme=" << to_string(scheme);
  if (initial_state) os << ";z0=" << initial_state->transpose();
  return os.str();
}

ReflectedStepper::ReflectedStepper(const PolyhedralCone& cone, Matrix reflection, Vector drift,
                                   Matrix noise_map, double h, Scheme scheme)
    : cone_(cone),
      reflection_(std::move(reflection)),
      drift_(std::move(drift)),
      noise_map_(std::move(noise_map)),
      h_(h),
      scheme_(scheme) {
  if (noise_map_.rows() != cone_.dim()) throw InputError("stepper: noise map must have d rows");
  if (noise_map_.cols() > 2000) throw CapabilityError("stepper: noise dimension above 2000", 2000);
  face_noise_ = cone_.normals() * noise_map_;
  face_var_ = face_noise_.rowwise().squaredNorm();
  face_drift_ = cone_.normals() * drift_;
}

namespace {

constexpr std::uint16_t kAuxChoice = 1000;
constexpr std::uint16_t kAuxNormal = 1001;
constexpr std::uint16_t kAuxBridge = 1002;

// Inverse Gaussian draw (Michael, Schucany and Haas 1976).
double inverse_gaussian(double mean, double shape, double normal, double uniform) {
  const double r = mean * normal * normal / (2.0 * shape);
  const double x = mean / (1.0 + r + std::sqrt(r * (r + 2.0)));
  return uniform <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace

ReflectedStepper::Outcome ReflectedStepper::step(const Vector& z, std::uint64_t seed,
                                                 std::uint32_t replica,
                                                 std::uint64_t step) const {
  const int p = noise_dim();
  const int m = cone_.num_faces();
  const CounterRng main(seed, replica, 0);
  Outcome out;
  out.noise.resize(p);
  main.normals(step, out.noise.data(), p);
  out.noise *= std::sqrt(h_);
  out.x = drift_ * h_ + noise_map_ * out.noise;

  if (scheme_ == Scheme::kBridge) {
    const Vector y0 = (cone_.normals() * z).cwiseMax(0.0);
    const Vector y1 = y0 + cone_.normals() * out.x;
    // Face i is crossed with probability exp(-2 y0 y1 / (v h)) when y1 > 0.
    bool any = false;
    for (int i = 0; i < m && !any; ++i) {
      if (face_var_(i) <= 0.0) continue;
      any = y1(i) <= 0.0 || -2.0 * y0(i) * y1(i) / (face_var_(i) * h_) > -745.0;
    }
    int best = -1;
    double best_min = 0.0;
    if (any) {
      const CounterRng aux(seed, replica, 1);
      Vector u(m);
      aux.uniforms(step, u.data(), m);
      for (int i = 0; i < m; ++i) {
        const double v = face_var_(i);
        if (v <= 0.0) continue;
        const double dy = y1(i) - y0(i);
        const double mn =
            0.5 * (y0(i) + y1(i) - std::sqrt(dy * dy - 2.0 * v * h_ * std::log(u(i))));
        if (mn < best_min) {
          best_min = mn;
          best = i;
        }
      }
      if (best >= 0) {
        const double v = face_var_(best);
        const double a = y0(best) - best_min;
        const double b = y1(best) - best_min;
        const double floor = 1e-14 * std::sqrt(v * h_);
        if (a > floor && b > floor) {
          const double alpha = a * a / (2.0 * v * h_);
          const double beta = b * b / (2.0 * v * h_);
          const auto choice = aux.uniform_pair(step, kAuxChoice);
          double nu[2];
          aux.normals(step, nu, 1, kAuxNormal);
          // tau / (h - tau) has density proportional to
          // (1 + u) u^{-3/2} exp(-alpha / u - beta u): a two-term mixture.
          double ratio;
          if (choice[0] < b / (a + b)) {
            ratio = inverse_gaussian(std::sqrt(alpha / beta), 2.0 * alpha, nu[0], choice[1]);
          } else {
            ratio = 1.0 / inverse_gaussian(std::sqrt(beta / alpha), 2.0 * beta, nu[0], choice[1]);
          }
          double tau = h_ * ratio / (1.0 + ratio);
          tau = std::clamp(tau, 1e-12 * h_, (1.0 - 1e-12) * h_);
          // Noise at tau given the endpoint and the face value at tau.
          const Vector w = face_noise_.row(best).transpose();
          const Vector base = (tau / h_) * out.noise;
          const double target = best_min - y0(best) - face_drift_(best) * tau;
          Vector g(p);
          aux.normals(step, g.data(), p, kAuxBridge);
          g -= w * (w.dot(g) / v);
          const double kappa = tau * (h_ - tau) / h_;
          out.noise_tau = base + w * ((target - w.dot(base)) / v) + std::sqrt(kappa) * g;
          out.x_tau = drift_ * tau + noise_map_ * out.noise_tau;
          out.tau = tau;
          out.touched = true;
          out.touch = skorohod_step(cone_, reflection_, z, out.x_tau);
          out.end = skorohod_step(cone_, reflection_, out.touch.z, out.x - out.x_tau);
          return out;
        }
      }
    }
  }
  out.end = skorohod_step(cone_, reflection_, z, out.x);
  return out;
}

namespace {

void check_noise_map(const SrbmSpec& spec, const Matrix& s) {
  if (s.rows() != spec.dim()) throw InputError("noise map must have d rows");
  const double scale = std::max(1.0, spec.covariance().cwiseAbs().maxCoeff());
  if (((s * s.transpose()) - spec.covariance()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError("noise map S must satisfy S S' = A");
  }
}

Vector initial_state(const SrbmSpec& spec, const SimConfig& c) {
  const Vector z0 = c.initial_state ? *c.initial_state : Vector::Zero(spec.dim());
  if (z0.size() != spec.dim()) throw InputError("sim: initial state has wrong length");
  if (!contains(spec.cone(), z0)) throw InputError("sim: initial state outside the cone");
  return z0;
}

// Runs body(r) for r in [0, n) on up to hardware_concurrency threads.
template <class F>
void for_each_replica(int n, F body) {
  const int workers =
      std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int r = 0; r < n; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = w; r < n; r += workers) body(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << hash;
  return os.str();
}

}  // namespace

PathSample simulate_path(const SrbmSpec& spec, const SimConfig& config,
                         std::uint32_t replica) {
  return simulate_path(spec, config, spec.covariance_factor(), replica);
}

PathSample simulate_path(const SrbmSpec& spec, const SimConfig& config, const Matrix& noise_map,
                         std::uint32_t replica) {
  config.validate();
  check_noise_map(spec, noise_map);
  const ReflectedStepper stepper(spec.cone(), spec.reflection(), spec.drift(), noise_map,
                                 config.step_h, config.scheme);
  const int d = spec.dim();
  const int m = spec.num_faces();
  const long n = config.horizon_steps;

  std::vector<double> times{0.0};
  std::vector<Vector> zs, ws, ls;
  std::vector<char> grid{1};
  Vector z = initial_state(spec, config);
  Vector w = z;
  Vector l = Vector::Zero(m);
  zs.push_back(z);
  ws.push_back(w);
  ls.push_back(l);
  for (long k = 0; k < n; ++k) {
    const ReflectedStepper::Outcome o = stepper.step(z, config.seed, replica, k);
    const double t0 = k * config.step_h;
    if (o.touched) {
      times.push_back(t0 + o.tau);
      zs.push_back(o.touch.z);
      ws.push_back(w + o.x_tau);
      ls.push_back(l + o.touch.delta_l);
      grid.push_back(0);
      l += o.touch.delta_l;
    }
    z = o.end.z;
    w += o.x;
    l += o.end.delta_l;
    times.push_back((k + 1) * config.step_h);
    zs.push_back(z);
    ws.push_back(w);
    ls.push_back(l);
    grid.push_back(1);
  }
  PathSample out;
  const int cols = static_cast<int>(times.size());
  out.times = std::move(times);
  out.on_grid = std::move(grid);
  out.states.resize(d, cols);
  out.driving.resize(d, cols);
  out.local_times.resize(m, cols);
  for (int k = 0; k < cols; ++k) {
    out.states.col(k) = zs[k];
    out.driving.col(k) = ws[k];
    out.local_times.col(k) = ls[k];
  }
  return out;
}

StationaryResult sample_stationary(const SrbmSpec& spec, const SimConfig& config) {
  config.validate();
  const ReflectedStepper stepper(spec.cone(), spec.reflection(), spec.drift(),
                                 spec.covariance_factor(), config.step_h, config.scheme);
  const int d = spec.dim();
  const int m = spec.num_faces();
  const long n = config.horizon_steps;
  const long burn = config.burn_in();
  const Vector z0 = initial_state(spec, config);

  struct ReplicaOut {
    std::vector<Vector> samples;
    InvariantMonitor monitor;
    double q2_sum = 0.0, q4_sum = 0.0;
    long q2_n = 0, q4_n = 0;
  };
  std::vector<ReplicaOut> outs;
  outs.reserve(config.replicas);
  for (int r = 0; r < config.replicas; ++r) {
    outs.push_back(ReplicaOut{{}, InvariantMonitor(spec.cone(), spec.reflection())});
  }

  for_each_replica(config.replicas, [&](int r) {
    ReplicaOut& ro = outs[r];
    Vector z = z0, w = z0, l = Vector::Zero(m);
    ro.monitor.observe(z, w, l, l);
    for (long k = 0; k < n; ++k) {
      const ReflectedStepper::Outcome o = stepper.step(z, config.seed, r, k);
      if (o.touched) {
        ro.monitor.observe(o.touch.z, w + o.x_tau, l + o.touch.delta_l, o.touch.delta_l);
        l += o.touch.delta_l;
      }
      z = o.end.z;
      w += o.x;
      l += o.end.delta_l;
      ro.monitor.observe(z, w, l, o.end.delta_l);
      const long idx = k + 1;
      const double norm = z.norm();
      if (idx >= n / 4 && idx < n / 2) {
        ro.q2_sum += norm;
        ++ro.q2_n;
      } else if (idx >= 3 * n / 4) {
        ro.q4_sum += norm;
        ++ro.q4_n;
      }
      if (idx > burn && (idx - burn) % config.thinning == 0) ro.samples.push_back(z);
    }
  });

  StationaryResult res;
  InvariantMonitor total(spec.cone(), spec.reflection());
  long count = 0;
  double q2 = 0, q4 = 0;
  long n2 = 0, n4 = 0;
  for (const auto& ro : outs) {
    count += static_cast<long>(ro.samples.size());
    total.merge(ro.monitor);
    q2 += ro.q2_sum;
    q4 += ro.q4_sum;
    n2 += ro.q2_n;
    n4 += ro.q4_n;
  }
  res.invariants = total.report();
  res.dist.samples.resize(d, count);
  long c = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  long pairs = 0;
  for (const auto& ro : outs) {
    for (std::size_t k = 0; k < ro.samples.size(); ++k) {
      res.dist.samples.col(c++) = ro.samples[k];
      if (k > 0) {
        const double x = ro.samples[k - 1].norm(), y = ro.samples[k].norm();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++pairs;
      }
    }
  }
  if (pairs > 1) {
    const double cov = sxy / pairs - (sx / pairs) * (sy / pairs);
    const double vx = sxx / pairs - (sx / pairs) * (sx / pairs);
    const double vy = syy / pairs - (sy / pairs) * (sy / pairs);
    if (vx > 0 && vy > 0) res.dist.lag1_autocorrelation = cov / std::sqrt(vx * vy);
  }
  std::ostringstream meta;
  meta.precision(17);
  meta << "R=" << spec.reflection() << ";mu=" << spec.drift().transpose()
       << ";A=" << spec.covariance() << ";N=" << spec.cone().normals() << ";"
       << config.describe();
  res.dist.meta = fnv1a_hex(meta.str());
  res.mean_norm_second_quarter = n2 > 0 ? q2 / n2 : 0.0;
  res.mean_norm_last_quarter = n4 > 0 ? q4 / n4 : 0.0;
  if (n2 > 0 && n4 > 0 && res.mean_norm_last_quarter > 2.0 * res.mean_norm_second_quarter) {
    res.transient = true;
    std::ostringstream os;
    os << "possible transience: mean |Z| over the last quarter (" << res.mean_norm_last_quarter
       << ") exceeds twice the second-quarter mean (" << res.mean_norm_second_quarter << ")";
    res.warnings.push_back(os.str());
  }
  return res;
}

double generator_v(const SrbmSpec& spec, const LyapunovCertificate& cert, const Vector& x) {
  const ValueGradHess v = v_eval(cert.q, cert.bridge, cert.lambda, x);
  return v.gradient.dot(spec.drift()) + 0.5 * spec.covariance().cwiseProduct(v.hessian).sum();
}

ProbeReport supermartingale_probe(const SrbmSpec& spec, const LyapunovCertificate& cert,
                                  const SimConfig& config, const std::vector<double>& t_grid,
                                  const TailBound& region, const std::optional<Vector>& start) {
  config.validate();
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() <= 0.0) {
    throw InputError("probe: time grid must be increasing and positive");
  }
  if (!region.found) throw InputError("probe: drift region not established");
  ProbeReport rep;
  rep.radius = region.threshold_radius;
  rep.k_rate = cert.lambda * region.drift_margin;
  rep.replicas = config.replicas;

  // b = sampled max over C of (L V + k V)^+.
  Matrix extra(spec.dim(), 2);
  extra.col(0) = cert.lambda_argmin;
  extra.col(1) = cert.k_argmin;
  const Matrix dirs = sample_section_directions(spec.cone(), 1000, extra);
  double b = rep.k_rate;  // value at the apex, where V = 1 and L V = 0
  for (int i = 1; i <= 200; ++i) {
    const double rr = rep.radius * i / 200.0;
    for (int k = 0; k < dirs.cols(); ++k) {
      const Vector x = rr * dirs.col(k);
      const double vx = v_eval(cert.q, cert.bridge, cert.lambda, x).value;
      b = std::max(b, generator_v(spec, cert, x) + rep.k_rate * vx);
    }
  }
  rep.b_const = b;

  rep.start = start ? *start : Vector(1.5 * rep.radius * cert.lambda_argmin.normalized());
  if (!contains(spec.cone(), rep.start)) throw InputError("probe: start outside the cone");
  const double h = config.step_h;
  std::vector<long> idx;
  for (double t : t_grid) idx.push_back(std::max(1L, std::lround(t / h)));
  const long n_steps = idx.back();
  for (long i : idx) rep.times.push_back(i * h);

  const ReflectedStepper stepper(spec.cone(), spec.reflection(), spec.drift(),
                                 spec.covariance_factor(), h, config.scheme);
  const double v0 = v_eval(cert.q, cert.bridge, cert.lambda, rep.start).value;
  const int nt = static_cast<int>(idx.size());
  Matrix values(nt, config.replicas);
  for_each_replica(config.replicas, [&](int r) {
    Vector z = rep.start;
    double integral = 0.0;
    int next = 0;
    for (long k = 0; k < n_steps; ++k) {
      const double vz = v_eval(cert.q, cert.bridge, cert.lambda, z).value;
      integral += (-rep.k_rate * vz + (z.norm() <= rep.radius ? b : 0.0)) * h;
      z = stepper.step(z, config.seed, r, k).end.z;
      while (next < nt && idx[next] == k + 1) {
        values(next++, r) =
            v_eval(cert.q, cert.bridge, cert.lambda, z).value - v0 - integral;
      }
    }
  });
  rep.pass = true;
  for (int j = 0; j < nt; ++j) {
    const double mean = values.row(j).mean();
    const double var = (values.row(j).array() - mean).square().sum() /
                       std::max(1, config.replicas - 1);
    const double se = std::sqrt(var / config.replicas);
    rep.mean.push_back(mean);
    rep.stderr.push_back(se);
    if (mean > 3.0 * se + 1e-12 * std::abs(v0)) rep.pass = false;
  }
  return rep;
}

}  // namespace rbmcert
