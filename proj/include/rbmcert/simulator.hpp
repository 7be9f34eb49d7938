#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbmcert/empirics.hpp"
#include "rbmcert/lyapunov.hpp"
#include "rbmcert/rng.hpp"
#include "rbmcert/skorohod.hpp"
#include "rbmcert/srbm_spec.hpp"

namespace rbmcert {

// kEuler: Gaussian increment then one reflection step per grid interval.
// kBridge: additionally samples the minimum of the free Brownian bridge
// towards each face inside the interval; when a face is crossed, the path is
// stopped at the sampled crossing time, reflected there, and continued. In
// one dimension this reproduces reflected Brownian motion exactly at grid
// times.
enum class Scheme { kBridge, kEuler };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SimConfig {
  double step_h = 0.01;
  long horizon_steps = 100000;
  std::optional<long> burn_in_steps;  // default: 20% of the horizon
  int thinning = 10;
  std::uint64_t seed = 1;
  int replicas = 1;
  Scheme scheme = Scheme::kBridge;
  std::optional<Vector> initial_state;  // default: the apex

  long burn_in() const;
  // Throws InputError on h outside (0, 0.1], burn-in >= horizon, etc.
  void validate() const;
  std::string describe() const;
};

// Increment of the free process over one step: dX = mu h + S dB with
// dB ~ N(0, h I_p). S S' is the covariance.
class ReflectedStepper {
 public:
  ReflectedStepper(const PolyhedralCone& cone, Matrix reflection, Vector drift,
                   Matrix noise_map, double h, Scheme scheme);

  struct Outcome {
    bool touched = false;
    double tau = 0.0;
    Vector noise_tau;  // B(t + tau) - B(t)
    Vector x_tau;      // X(t + tau) - X(t)
    StepSolution touch;
    Vector noise;      // B(t + h) - B(t)
    Vector x;          // X(t + h) - X(t)
    StepSolution end;
  };

  // Step `step` of replica `replica`; draws are a function of
  // (seed, replica, step) only.
  Outcome step(const Vector& z, std::uint64_t seed, std::uint32_t replica,
               std::uint64_t step) const;

  int noise_dim() const { return static_cast<int>(noise_map_.cols()); }
  const PolyhedralCone& cone() const { return cone_; }
  const Matrix& reflection() const { return reflection_; }

 private:
  PolyhedralCone cone_;
  Matrix reflection_;
  Vector drift_;
  Matrix noise_map_;
  double h_;
  Scheme scheme_;
  Matrix face_noise_;    // rows n_i' S
  Vector face_var_;      // |S' n_i|^2
  Vector face_drift_;    // n_i . mu
};

// One replica, every grid time plus boundary-touch records.
PathSample simulate_path(const SrbmSpec& spec, const SimConfig& config,
                         std::uint32_t replica = 0);
// Same with an explicit noise map S (d x p, S S' = A within 1e-10).
PathSample simulate_path(const SrbmSpec& spec, const SimConfig& config,
                         const Matrix& noise_map, std::uint32_t replica = 0);

struct StationaryResult {
  EmpiricalDistribution dist;
  InvariantReport invariants;
  bool transient = false;
  std::vector<std::string> warnings;
  double mean_norm_second_quarter = 0.0;
  double mean_norm_last_quarter = 0.0;
};

// Thinned post-burn-in grid states pooled over replicas in replica order.
StationaryResult sample_stationary(const SrbmSpec& spec, const SimConfig& config);

struct ProbeReport {
  std::vector<double> times;
  std::vector<double> mean;    // estimate of E[M(t)]
  std::vector<double> stderr;
  bool pass = false;           // mean <= 3 stderr at every time
  double k_rate = 0.0;         // V-level rate: lambda * k(lambda)
  double b_const = 0.0;
  double radius = 0.0;         // C = {|x| <= radius}
  Vector start;
  long replicas = 0;
};

// Generator L V(x) = grad V . mu + tr(A Hess V) / 2.
double generator_v(const SrbmSpec& spec, const LyapunovCertificate& cert, const Vector& x);

// Monte Carlo mean of V(Z_t) - V(Z_0) - int_0^t (-k V + b 1_C)(Z_s) ds from a
// fixed start (default: 1.5 r along the Lambda minimizer).
ProbeReport supermartingale_probe(const SrbmSpec& spec, const LyapunovCertificate& cert,
                                  const SimConfig& config, const std::vector<double>& t_grid,
                                  const TailBound& region,
                                  const std::optional<Vector>& start = std::nullopt);

}  // namespace rbmcert
