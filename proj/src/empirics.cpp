#include "rbmcert/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert {

EmpiricalDistribution from_norms(const std::vector<double>& norms) {
  EmpiricalDistribution d;
  d.samples = Eigen::Map<const Eigen::RowVectorXd>(norms.data(), static_cast<int>(norms.size()));
  return d;
}

namespace {

std::vector<double> sorted_norms(const EmpiricalDistribution& dist) {
  if (dist.size() == 0) throw InputError("empirical distribution is empty");
  std::vector<double> n(dist.size());
  for (int k = 0; k < dist.size(); ++k) n[k] = dist.samples.col(k).norm();
  std::sort(n.begin(), n.end());
  return n;
}

double fraction_at_least(const std::vector<double>& sorted, double a) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), a);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::pair<double, double>> ccdf_norm(const EmpiricalDistribution& dist,
                                                 const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("ccdf: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InputError("ccdf: grid must be increasing");
  const std::vector<double> n = sorted_norms(dist);
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double a : grid) out.emplace_back(a, fraction_at_least(n, a));
  return out;
}

TailFit fit_tail_rate(const EmpiricalDistribution& dist, const TailWindow& window) {
  if (!(window.quantile_lo >= 0.0 && window.quantile_lo < window.quantile_hi &&
        window.quantile_hi < 1.0) || window.points < 3) {
    throw InputError("tail fit: need 0 <= q_lo < q_hi < 1 and at least 3 points");
  }
  const std::vector<double> n = sorted_norms(dist);
  const double lo = quantile(n, window.quantile_lo);
  const double hi = quantile(n, window.quantile_hi);
  const long tail = static_cast<long>(n.end() - std::upper_bound(n.begin(), n.end(), lo));
  if (tail < window.min_tail_samples) {
    std::ostringstream os;
    os << "tail fit: only " << tail << " samples beyond the lower quantile (need "
       << window.min_tail_samples << ")";
    throw InputError(os.str());
  }
  if (!(hi > lo * (1.0 + 1e-12) + 1e-300)) throw InputError("tail fit: degenerate tail window");

  TailFit fit;
  fit.window = window;
  fit.tail_samples = tail;
  for (int k = 0; k < window.points; ++k) {
    const double a = lo + (hi - lo) * k / (window.points - 1);
    const double f = fraction_at_least(n, a);
    if (f <= 0.0) continue;
    fit.thresholds.push_back(a);
    fit.log_ccdf.push_back(std::log(f));
  }
  const int m = static_cast<int>(fit.thresholds.size());
  if (m < 3) throw InputError("tail fit: too few thresholds with positive tail mass");
  // Weights are inverse binomial variances of log F: n F / (1 - F).
  std::vector<double> wt(m);
  double sw = 0, mx = 0, my = 0;
  for (int k = 0; k < m; ++k) {
    const double f = std::exp(fit.log_ccdf[k]);
    wt[k] = static_cast<double>(n.size()) * f / std::max(1.0 - f, 1e-12);
    sw += wt[k];
    mx += wt[k] * fit.thresholds[k];
    my += wt[k] * fit.log_ccdf[k];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0, sxy = 0;
  for (int k = 0; k < m; ++k) {
    sxx += wt[k] * (fit.thresholds[k] - mx) * (fit.thresholds[k] - mx);
    sxy += wt[k] * (fit.thresholds[k] - mx) * (fit.log_ccdf[k] - my);
  }
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  double rss = 0;
  for (int k = 0; k < m; ++k) {
    const double e = fit.log_ccdf[k] - (fit.intercept + slope * fit.thresholds[k]);
    rss += wt[k] * e * e;
  }
  const double ols_se = std::sqrt(rss / (m - 2) / sxx);
  // CCDF points share samples, so the OLS error is floored by the
  // exponential-likelihood error rate / sqrt(tail), then inflated by the
  // lag-1 autocorrelation of the sample sequence.
  const double r1 = std::clamp(dist.lag1_autocorrelation, 0.0, 0.99);
  fit.stderr = std::max(ols_se, std::abs(fit.rate) / std::sqrt(static_cast<double>(tail))) *
               std::sqrt((1.0 + r1) / (1.0 - r1));
  return fit;
}

BoundVerdict compare_bound(const TailFit& fit, double rho_bound) {
  BoundVerdict v;
  v.bound = rho_bound;
  v.slack = fit.rate - rho_bound;
  v.pass = fit.rate + 3.0 * fit.stderr >= rho_bound;
  return v;
}

}  // namespace rbmcert
