#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rbmcert/lyapunov.hpp"
#include "rbmcert/simulator.hpp"

namespace rbmcert {

// Competing Brownian particles. Rank k (1 = lowest) moves with drift g_k and
// diffusion sigma2_k. A collision between ranks k and k+1 pushes the upper
// particle by q+_{k+1} and the lower by q-_k of the collision local time,
// q+_{k+1} + q-_k = 1. q- is derived from q+; q+_1 is not used by the
// dynamics.
class ParticleSystemSpec {
 public:
  ParticleSystemSpec(Vector g, Vector sigma2, std::optional<Vector> q_plus = std::nullopt);

  int n() const { return static_cast<int>(g_.size()); }
  const Vector& g() const { return g_; }
  const Vector& sigma2() const { return sigma2_; }
  const Vector& q_plus() const { return q_plus_; }
  const Vector& q_minus() const { return q_minus_; }
  bool symmetric() const;

 private:
  Vector g_, sigma2_, q_plus_, q_minus_;
};

// rank -> name, zero-based; ties go to the lower name first.
std::vector<int> ranking_permutation(const Vector& x);

// (R12): unit diagonal, -1/2 off the diagonal, size n - 1.
Matrix symmetric_gap_reflection(int n);
Matrix gap_reflection(const ParticleSystemSpec& spec);
Vector gap_drift(const ParticleSystemSpec& spec);
Matrix gap_covariance(const ParticleSystemSpec& spec);
// S with gap noise S dB, B the ranked driving motions: S S' = A.
Matrix gap_noise_map(const ParticleSystemSpec& spec);

SrbmSpec build_gap_srbm(const ParticleSystemSpec& spec);

struct GapStability {
  Vector g_bar;          // running means g_1..g_k / k
  Vector b_vec;          // g_1 + ... + g_i - i g_bar_N (symmetric) or -R^{-1} mu / 2
  Vector b_from_r;       // -R^{-1} mu / 2
  bool stable = false;
  bool rho0_applicable = false;  // symmetric collisions only
  double rho0 = 0.0;
  double a_norm = 0.0;   // spectral norm of the gap covariance
};

// Throws NumericalError when the two b computations disagree beyond 1e-10.
GapStability stability_check(const ParticleSystemSpec& spec);

struct RSpectrum {
  std::vector<double> eigenvalues;  // 1 - cos(k pi / n), k = 1..n-1
  double inverse_norm = 0.0;        // (1 - cos(pi / n))^{-1}
};

RSpectrum r_spectrum(int n);

// Projection onto {x >= 0, sum x = 1}.
Vector project_to_simplex(const Vector& y);

struct SimplexMinimum {
  double value = 0.0;
  Vector argmin;
  int iterations = 0;
};

// min x'Px over the probability simplex, P symmetric positive semidefinite.
SimplexMinimum minimize_quadratic_on_simplex(const Matrix& p);

struct LemmaItem {
  std::string name;
  bool holds = true;
  double worst_slack = 0.0;  // min over samples of (rhs - lhs), >= -1e-8 when holding
  Vector worst_point;
};

struct LemmaReport {
  std::vector<LemmaItem> items;  // (i) .. (iv)
  SimplexMinimum simplex_min;     // of x' R^{-1} x, expected 1
  double lambda_max = 0.0;        // from the certificate with Q = R^{-1}
  double k_const = 0.0;
  double rho_max = 0.0;
  double rho0 = 0.0;
  bool all() const;
};

// Samples the simplex (10^4 points by default plus the vertices) and checks
// the four inequalities. Throws VerificationError naming the first violated
// item.
LemmaReport verify_lemma_many(const ParticleSystemSpec& spec, int samples = 10000,
                              std::uint64_t seed = 1);

struct ParticlePaths {
  std::vector<double> times;  // every `thinning` steps from t = 0
  Matrix positions;           // n x records: named X_i or ranked Y_k
  Matrix gaps;                // (n-1) x records
  Matrix local_times;         // (n-1) x records, ranked only
  InvariantReport invariants; // gap process, ranked only
  double min_order_gap = 0.0; // min_k,t Y_{k+1} - Y_k, ranked only
};

// Euler scheme on named particles, re-ranked once per step; symmetric
// collisions only. Starts from config.initial_state read as gaps (default 0).
ParticlePaths simulate_named(const ParticleSystemSpec& spec, const SimConfig& config,
                             std::uint32_t replica = 0);

// Gap SRBM simulated with the gap noise map; Y_1 integrated with
// L_(0,1) = 0 and the rest rebuilt from the gaps.
ParticlePaths simulate_ranked(const ParticleSystemSpec& spec, const SimConfig& config,
                              std::uint32_t replica = 0);

// Post-burn-in gaps of a path set, as an empirical distribution.
EmpiricalDistribution stationary_gaps(const ParticlePaths& paths, const SimConfig& config);

}  // namespace rbmcert
