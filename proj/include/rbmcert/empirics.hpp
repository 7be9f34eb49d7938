#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rbmcert/types.hpp"

namespace rbmcert {

// Pooled stationary samples (columns), uniformly weighted.
struct EmpiricalDistribution {
  Matrix samples;      // d x n
  std::string meta;    // hash of the generating configuration
  // lag-1 autocorrelation of |Z| between consecutive samples of a replica;
  // 0 when unknown (independent draws)
  double lag1_autocorrelation = 0.0;

  int size() const { return static_cast<int>(samples.cols()); }
};

EmpiricalDistribution from_norms(const std::vector<double>& norms);

// (a, fraction of samples with |x| >= a) for each grid point.
std::vector<std::pair<double, double>> ccdf_norm(const EmpiricalDistribution& dist,
                                                 const std::vector<double>& grid);

struct TailWindow {
  double quantile_lo = 0.5;
  double quantile_hi = 0.995;
  int points = 200;         // thresholds in the window
  int min_tail_samples = 1000;
};

struct TailFit {
  std::vector<double> thresholds;
  std::vector<double> log_ccdf;
  double rate = 0.0;    // minus the fitted slope
  double intercept = 0.0;
  double stderr = 0.0;
  TailWindow window;
  long tail_samples = 0;
};

// Weighted least squares of log CCDF(a) on a over [q_lo, q_hi] of |samples|,
// weights n F / (1 - F) (inverse binomial variance of log F).
// Throws InputError when fewer than min_tail_samples exceed q_lo or the
// window is degenerate.
TailFit fit_tail_rate(const EmpiricalDistribution& dist, const TailWindow& window = {});

struct BoundVerdict {
  bool pass = false;
  double slack = 0.0;  // rate - bound
  double bound = 0.0;
};

// PASS iff rate + 3 stderr >= bound.
BoundVerdict compare_bound(const TailFit& fit, double rho_bound);

}  // namespace rbmcert
