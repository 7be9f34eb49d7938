#include "rbmcert/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert {

ParticleSystemSpec::ParticleSystemSpec(Vector g, Vector sigma2, std::optional<Vector> q_plus)
    : g_(std::move(g)), sigma2_(std::move(sigma2)) {
  const int n = static_cast<int>(g_.size());
  if (n < 2) throw InputError("particles: need N >= 2");
  if (sigma2_.size() != n) throw InputError("particles: sigma2 must have length N");
  require_finite(g_, "g");
  require_finite(sigma2_, "sigma2");
  if ((sigma2_.array() <= 0.0).any()) throw InputError("particles: sigma2 must be positive");
  q_plus_ = q_plus ? *q_plus : Vector::Constant(n, 0.5);
  if (q_plus_.size() != n) throw InputError("particles: q_plus must have length N");
  require_finite(q_plus_, "q_plus");
  if ((q_plus_.array() <= 0.0).any() || (q_plus_.array() >= 1.0).any()) {
    throw InputError("particles: q_plus entries must lie in (0, 1)");
  }
  q_minus_.resize(n);
  for (int k = 0; k + 1 < n; ++k) q_minus_(k) = 1.0 - q_plus_(k + 1);
  q_minus_(n - 1) = 1.0 - q_plus_(0);
}

bool ParticleSystemSpec::symmetric() const {
  return (q_plus_.array() == 0.5).all();
}

std::vector<int> ranking_permutation(const Vector& x) {
  std::vector<int> p(x.size());
  std::iota(p.begin(), p.end(), 0);
  std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return x(a) < x(b); });
  return p;
}

Matrix symmetric_gap_reflection(int n) {
  if (n < 2) throw InputError("gap reflection: need N >= 2");
  Matrix r = Matrix::Identity(n - 1, n - 1);
  for (int k = 0; k + 1 < n - 1; ++k) r(k, k + 1) = r(k + 1, k) = -0.5;
  return r;
}

Matrix gap_reflection(const ParticleSystemSpec& spec) {
  const int n = spec.n();
  Matrix r = Matrix::Identity(n - 1, n - 1);
  for (int k = 0; k + 1 < n - 1; ++k) {
    r(k, k + 1) = -spec.q_minus()(k + 1);
    r(k + 1, k) = -spec.q_plus()(k + 1);
  }
  return r;
}

Vector gap_drift(const ParticleSystemSpec& spec) {
  const int n = spec.n();
  Vector mu(n - 1);
  for (int k = 0; k + 1 < n; ++k) mu(k) = spec.g()(k + 1) - spec.g()(k);
  return mu;
}

Matrix gap_noise_map(const ParticleSystemSpec& spec) {
  const int n = spec.n();
  Matrix s = Matrix::Zero(n - 1, n);
  for (int k = 0; k + 1 < n; ++k) {
    s(k, k) = -std::sqrt(spec.sigma2()(k));
    s(k, k + 1) = std::sqrt(spec.sigma2()(k + 1));
  }
  return s;
}

Matrix gap_covariance(const ParticleSystemSpec& spec) {
  const int n = spec.n();
  Matrix a = Matrix::Zero(n - 1, n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    a(k, k) = spec.sigma2()(k) + spec.sigma2()(k + 1);
    if (k + 2 < n) a(k, k + 1) = a(k + 1, k) = -spec.sigma2()(k + 1);
  }
  return a;
}

SrbmSpec build_gap_srbm(const ParticleSystemSpec& spec) {
  return SrbmSpec(PolyhedralCone::orthant(spec.n() - 1), gap_reflection(spec), gap_drift(spec),
                  gap_covariance(spec));
}

GapStability stability_check(const ParticleSystemSpec& spec) {
  const int n = spec.n();
  const Vector& g = spec.g();
  GapStability s;
  s.g_bar.resize(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += g(k);
    s.g_bar(k) = sum / (k + 1);
  }
  const Matrix r = gap_reflection(spec);
  s.b_from_r = -0.5 * r.partialPivLu().solve(gap_drift(spec));
  const Matrix a = gap_covariance(spec);
  s.a_norm = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff();
  if (!spec.symmetric()) {
    s.b_vec = s.b_from_r;
    s.stable = s.b_vec.minCoeff() > 0.0;
    return s;
  }
  s.b_vec.resize(n - 1);
  double partial = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    partial += g(i);
    s.b_vec(i) = partial - (i + 1) * s.g_bar(n - 1);
  }
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff()) * n;
  const double diff = (s.b_vec - s.b_from_r).cwiseAbs().maxCoeff();
  if (diff > 1e-10 * scale) {
    std::ostringstream os;
    os << "stability: b computed two ways differs by " << diff;
    throw NumericalError(os.str());
  }
  s.stable = s.b_vec.minCoeff() > 0.0;
  bool by_mean = true;
  for (int k = 0; k + 1 < n; ++k) by_mean = by_mean && s.g_bar(k) > s.g_bar(n - 1);
  if (by_mean != s.stable && s.b_vec.cwiseAbs().minCoeff() > 1e-12 * scale) {
    throw NumericalError("stability: running-mean test and b test disagree");
  }
  s.rho0_applicable = true;
  if (s.stable) {
    s.rho0 = 2.0 / (M_PI * M_PI) * s.b_vec.minCoeff() / s.a_norm / (static_cast<double>(n) * n);
  }
  return s;
}

RSpectrum r_spectrum(int n) {
  if (n < 2) throw InputError("r_spectrum: need N >= 2");
  RSpectrum s;
  for (int k = 1; k < n; ++k) s.eigenvalues.push_back(1.0 - std::cos(k * M_PI / n));
  s.inverse_norm = 1.0 / (1.0 - std::cos(M_PI / n));
  return s;
}

Vector project_to_simplex(const Vector& y) {
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    css += u[k];
    const double t = (css - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (y.array() - theta).cwiseMax(0.0);
}

SimplexMinimum minimize_quadratic_on_simplex(const Matrix& p) {
  require_square_finite(p, "P");
  const int n = static_cast<int>(p.rows());
  const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (p + p.transpose()))
                               .eigenvalues()
                               .cwiseAbs()
                               .maxCoeff();
  // Accelerated projected gradient from the barycenter.
  Vector x = Vector::Constant(n, 1.0 / n);
  Vector yk = x;
  double t = 1.0;
  SimplexMinimum res;
  for (int it = 1; it <= 200000; ++it) {
    const Vector x_new = project_to_simplex(yk - (2.0 / lip) * (p * yk));
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double change = (x_new - x).cwiseAbs().maxCoeff();
    yk = x_new + ((t - 1.0) / t_new) * (x_new - x);
    x = x_new;
    t = t_new;
    res.iterations = it;
    if (change < 1e-15) break;
  }
  res.argmin = x;
  res.value = x.dot(p * x);
  return res;
}

bool LemmaReport::all() const {
  return std::all_of(items.begin(), items.end(), [](const LemmaItem& i) { return i.holds; });
}

LemmaReport verify_lemma_many(const ParticleSystemSpec& spec, int samples, std::uint64_t seed) {
  if (!spec.symmetric()) throw InputError("lemma check: symmetric collisions only");
  const GapStability st = stability_check(spec);
  if (!st.stable) throw InputError("lemma check: the system is not stable");
  const int n = spec.n();
  const int d = n - 1;
  const Matrix r = symmetric_gap_reflection(n);
  const Matrix r_inv = r.inverse();
  const Matrix a = gap_covariance(spec);
  const Vector r_inv_mu = r_inv * gap_drift(spec);
  const Matrix r_inv_a_r_inv = r_inv * a * r_inv;
  const double r_inv_norm =
      Eigen::SelfAdjointEigenSolver<Matrix>(r_inv).eigenvalues().cwiseAbs().maxCoeff();
  const double b_min = st.b_vec.minCoeff();

  LemmaReport rep;
  rep.rho0 = st.rho0;
  LemmaItem i1;
  i1.name = "(i) |R^-1| = (1 - cos(pi/N))^-1";
  i1.worst_slack = -std::abs(r_inv_norm - r_spectrum(n).inverse_norm);
  i1.holds = -i1.worst_slack <= 1e-8 * r_inv_norm;
  LemmaItem i2;
  i2.name = "(ii) U(x) >= 1 on the simplex";
  LemmaItem i3;
  i3.name = "(iii) |R^-1 mu . x| >= 2 min b on the simplex";
  LemmaItem i4;
  i4.name = "(iv) x'R^-1 A R^-1 x <= |R^-1|^2 |A| on the simplex";
  i2.worst_slack = i3.worst_slack = i4.worst_slack = std::numeric_limits<double>::infinity();

  auto check = [&](const Vector& x) {
    auto upd = [&](LemmaItem& it, double slack) {
      if (slack < it.worst_slack) {
        it.worst_slack = slack;
        it.worst_point = x;
      }
    };
    upd(i2, std::sqrt(x.dot(r_inv * x)) - 1.0);
    upd(i3, std::abs(r_inv_mu.dot(x)) - 2.0 * b_min);
    upd(i4, r_inv_norm * r_inv_norm * st.a_norm - x.dot(r_inv_a_r_inv * x));
  };
  for (int k = 0; k < d; ++k) check(Vector::Unit(d, k));
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  for (int s = 0; s < samples; ++s) {
    Vector x(d);
    for (int k = 0; k < d; ++k) x(k) = e(rng);
    check(x / x.sum());
  }
  rep.simplex_min = minimize_quadratic_on_simplex(r_inv);
  check(rep.simplex_min.argmin);
  for (LemmaItem* it : {&i2, &i3, &i4}) it->holds = it->worst_slack >= -1e-8;
  rep.items = {i1, i2, i3, i4};

  const CertifyResult cert = certify(build_gap_srbm(spec), 0.5 * (r_inv + r_inv.transpose()));
  if (cert.certificate) {
    rep.lambda_max = cert.certificate->lambda_max;
    rep.k_const = cert.certificate->k_const;
    rep.rho_max = cert.certificate->rho_max;
  }
  for (const auto& it : rep.items) {
    if (!it.holds) {
      std::ostringstream os;
      os << "lemma item " << it.name << " fails: slack " << it.worst_slack;
      if (it.worst_point.size() > 0) os << " at x = [" << it.worst_point.transpose() << "]";
      throw VerificationError(os.str());
    }
  }
  return rep;
}

namespace {

Vector initial_positions(const ParticleSystemSpec& spec, const SimConfig& config) {
  Vector y = Vector::Zero(spec.n());
  if (config.initial_state) {
    const Vector& z = *config.initial_state;
    if (z.size() != spec.n() - 1) throw InputError("particles: initial state must be N-1 gaps");
    if ((z.array() < 0.0).any()) throw InputError("particles: initial gaps must be >= 0");
    for (int k = 1; k < spec.n(); ++k) y(k) = y(k - 1) + z(k - 1);
  }
  return y;
}

Vector sorted_gaps(const Vector& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  Vector g(v.size() - 1);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) g(k) = v[k + 1] - v[k];
  return g;
}

}  // namespace

ParticlePaths simulate_named(const ParticleSystemSpec& spec, const SimConfig& config,
                             std::uint32_t replica) {
  config.validate();
  if (!spec.symmetric()) throw InputError("named particles: symmetric collisions only");
  const int n = spec.n();
  const double h = config.step_h;
  const Vector sigma = spec.sigma2().cwiseSqrt();
  const CounterRng rng(config.seed, replica, 2);
  Vector x = initial_positions(spec, config);
  const long records = config.horizon_steps / config.thinning + 1;
  ParticlePaths out;
  out.positions.resize(n, records);
  out.gaps.resize(n - 1, records);
  long col = 0;
  auto record = [&](long step) {
    out.times.push_back(step * h);
    out.positions.col(col) = x;
    out.gaps.col(col) = sorted_gaps(x);
    ++col;
  };
  record(0);
  Vector xi(n);
  for (long k = 0; k < config.horizon_steps; ++k) {
    const std::vector<int> perm = ranking_permutation(x);
    rng.normals(k, xi.data(), n);
    for (int rank = 0; rank < n; ++rank) {
      const int i = perm[rank];
      x(i) += spec.g()(rank) * h + sigma(rank) * std::sqrt(h) * xi(i);
    }
    if ((k + 1) % config.thinning == 0) record(k + 1);
  }
  out.positions.conservativeResize(n, col);
  out.gaps.conservativeResize(n - 1, col);
  return out;
}

ParticlePaths simulate_ranked(const ParticleSystemSpec& spec, const SimConfig& config,
                              std::uint32_t replica) {
  config.validate();
  const int n = spec.n();
  const double h = config.step_h;
  const SrbmSpec gap = build_gap_srbm(spec);
  const ReflectedStepper stepper(gap.cone(), gap.reflection(), gap.drift(), gap_noise_map(spec),
                                 h, config.scheme);
  const double s1 = std::sqrt(spec.sigma2()(0));
  const double q1 = spec.q_minus()(0);
  const Vector y0 = initial_positions(spec, config);
  double y1 = y0(0);
  Vector z = y0.tail(n - 1) - y0.head(n - 1);
  Vector w = z;
  Vector l = Vector::Zero(n - 1);
  InvariantMonitor monitor(gap.cone(), gap.reflection());
  monitor.observe(z, w, l, l);

  const long records = config.horizon_steps / config.thinning + 1;
  ParticlePaths out;
  out.positions.resize(n, records);
  out.gaps.resize(n - 1, records);
  out.local_times.resize(n - 1, records);
  out.min_order_gap = std::numeric_limits<double>::infinity();
  long col = 0;
  auto record = [&](long step) {
    out.times.push_back(step * h);
    Vector y(n);
    y(0) = y1;
    for (int k = 1; k < n; ++k) y(k) = y(k - 1) + z(k - 1);
    out.positions.col(col) = y;
    out.gaps.col(col) = z;
    out.local_times.col(col) = l;
    ++col;
  };
  record(0);
  for (long k = 0; k < config.horizon_steps; ++k) {
    const ReflectedStepper::Outcome o = stepper.step(z, config.seed, replica, k);
    Vector dl = o.end.delta_l;
    if (o.touched) {
      monitor.observe(o.touch.z, w + o.x_tau, l + o.touch.delta_l, o.touch.delta_l);
      out.min_order_gap = std::min(out.min_order_gap, o.touch.z.minCoeff());
      dl += o.touch.delta_l;
      l += o.touch.delta_l;
    }
    z = o.end.z;
    w += o.x;
    l += o.end.delta_l;
    y1 += spec.g()(0) * h + s1 * o.noise(0) - q1 * dl(0);
    monitor.observe(z, w, l, o.end.delta_l);
    out.min_order_gap = std::min(out.min_order_gap, z.minCoeff());
    if ((k + 1) % config.thinning == 0) record(k + 1);
  }
  out.positions.conservativeResize(n, col);
  out.gaps.conservativeResize(n - 1, col);
  out.local_times.conservativeResize(n - 1, col);
  out.invariants = monitor.report();
  return out;
}

EmpiricalDistribution stationary_gaps(const ParticlePaths& paths, const SimConfig& config) {
  const double t_burn = config.burn_in() * config.step_h;
  std::vector<int> keep;
  for (int k = 0; k < static_cast<int>(paths.times.size()); ++k) {
    if (paths.times[k] > t_burn * (1.0 + 1e-12)) keep.push_back(k);
  }
  EmpiricalDistribution dist;
  dist.samples.resize(paths.gaps.rows(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) dist.samples.col(k) = paths.gaps.col(keep[k]);
  if (keep.size() > 2) {
    Vector norms(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) norms(k) = dist.samples.col(k).norm();
    const Vector x = norms.head(norms.size() - 1), y = norms.tail(norms.size() - 1);
    const double mx = x.mean(), my = y.mean();
    const double cov = ((x.array() - mx) * (y.array() - my)).mean();
    const double vx = (x.array() - mx).square().mean(), vy = (y.array() - my).square().mean();
    if (vx > 0 && vy > 0) dist.lag1_autocorrelation = cov / std::sqrt(vx * vy);
  }
  return dist;
}

}  // namespace rbmcert
