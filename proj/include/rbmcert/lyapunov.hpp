#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbmcert/sphere_optimizer.hpp"
#include "rbmcert/srbm_spec.hpp"

namespace rbmcert {

// phi(s) = 0 for s <= s1, phi(s) = s for s >= s2, and on [s1, s2] the
// quintic s1 + w*p((s - s1)/w) matching value, slope and curvature at both
// ends (C^2 overall).
class SmoothBridge {
 public:
  SmoothBridge(double s1 = 1.0, double s2 = 2.0);

  double s1() const { return s1_; }
  double s2() const { return s2_; }
  // order 0, 1 or 2.
  double eval(double s, int order = 0) const;

 private:
  double s1_, s2_;
  double c3_, c4_, c5_;  // p(t) = c3 t^3 + c4 t^4 + c5 t^5 in units of w = s2 - s1
};

inline double phi_eval(const SmoothBridge& b, double s, int order = 0) {
  return b.eval(s, order);
}

struct ValueGradHess {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

// U(x) = sqrt(x'Qx). Throws DomainError when x'Qx <= 0.
ValueGradHess u_eval(const Matrix& q, const Vector& x);

// V(x) = exp(lambda * phi(U(x))); V = 1 with zero derivatives wherever
// U < s1 (in particular at x = 0).
ValueGradHess v_eval(const Matrix& q, const SmoothBridge& bridge, double lambda,
                     const Vector& x);

struct ConditionCheck {
  bool holds = false;
  bool vacuous = false;    // empty sphere section
  double extremum = 0.0;   // min for (i), max for (ii) and (iii)
  Vector argument;         // where the extremum was found
  bool flagged = false;    // optimizer disagreement, see SphereExtremum
};

struct ConditionReport {
  ConditionCheck positivity;               // (i)  min x'Qx > 1e-8 on D, |x| = 1
  std::vector<ConditionCheck> faces;       // (ii) max (R'Qx)_j <= 1e-8 on D_j
  ConditionCheck drift;                    // (iii) max x'Q mu < -1e-8
  bool all() const;
  // "(i)", "(ii) face 2", "(iii)" or empty.
  std::string first_failure() const;
};

inline constexpr double kConditionTol = 1e-8;

// Throws InputError when Q is not symmetric or singular, NumericalError when
// a local search hits its iteration cap.
ConditionReport check_conditions(const SrbmSpec& spec, const Matrix& q,
                                 const SphereSearchOptions& options = {});

struct OrthantSufficientReport {
  bool holds = false;
  bool copositive = false;
  bool nonsingular = false;
  bool qr_is_z = false;
  bool q_mu_negative = false;
  Matrix qr;
  Vector q_mu;
};

OrthantSufficientReport orthant_sufficient_check(const Matrix& r, const Vector& mu,
                                                 const Matrix& q);

struct Symmetrizer {
  bool found = false;
  Vector c;  // diagonal of C, c_0 = 1 on each connected block
  std::optional<std::pair<int, int>> inconsistent;  // zero-based (i, j)
};

// Diagonal C > 0 with RC symmetric, propagated along the graph of nonzero
// off-diagonal pairs (c_j / c_i = r_ji / r_ij).
Symmetrizer find_symmetrizer(const Matrix& r, double tol = 1e-9);

struct MMatrixCertificate {
  bool accepted = false;
  std::string reason;  // set when rejected
  Symmetrizer symmetrizer;
  Vector r_inv_mu;
  Matrix q;  // (RC)^{-1}
};

MMatrixCertificate m_matrix_certificate(const Matrix& r, const Vector& mu,
                                        int limit = kExhaustiveLimit);

struct SphereOptimum {
  double value = 0.0;
  Vector argmin;
  bool flagged = false;
};

// Lambda = 2 min |Q mu . x| U(x) / (x'QAQx) over D with |x| = 1.
SphereOptimum compute_lambda_max(const PolyhedralCone& cone, const Matrix& q,
                                 const Vector& mu, const Matrix& a,
                                 const SphereSearchOptions& options = {});

// K = min U(x) over D with |x| = 1.
SphereOptimum compute_k_const(const PolyhedralCone& cone, const Matrix& q,
                              const SphereSearchOptions& options = {});

struct LyapunovCertificate {
  Matrix q;
  SmoothBridge bridge;
  double lambda = 0.0;
  double lambda_max = 0.0;
  double k_const = 0.0;
  double rho_max = 0.0;
  Vector lambda_argmin;
  Vector k_argmin;
  ConditionReport conditions;
  bool flagged = false;  // any optimizer disagreement
};

struct CertifyOptions {
  SmoothBridge bridge{};
  double lambda_fraction = 0.5;  // lambda = fraction * Lambda
  SphereSearchOptions search{};
};

struct CertifyResult {
  ConditionReport conditions;
  std::optional<LyapunovCertificate> certificate;
  std::string failure;  // names the failing condition when no certificate
};

CertifyResult certify(const SrbmSpec& spec, const Matrix& q,
                      const CertifyOptions& options = {});

// LV = lambda V beta on the region U >= s2 where phi is the identity:
// beta = a lambda^2 / 2 - b lambda, a = x'QAQx / x'Qx, theta = tr(A H_U) / 2,
// b = -theta - x'Q mu / U. The threshold is the root 2b/a.
struct DriftDecomposition {
  double a_val = 0.0;
  double b_val = 0.0;
  double theta_val = 0.0;
  double beta_val = 0.0;
  double lambda_threshold = 0.0;
};

// Throws DomainError when U(x) < s2.
DriftDecomposition drift_at(const LyapunovCertificate& cert, const Matrix& a,
                            const Vector& mu, const Vector& x, double lambda);

struct DriftRegionOptions {
  int radii = 50;
  int directions = 1000;
  double radius_cap_factor = 1e6;  // times s2
};

struct TailBound {
  bool found = false;
  double threshold_radius = 0.0;  // r(lambda)
  double drift_margin = 0.0;      // k(lambda)
  std::vector<double> radii;
  std::vector<double> sup_beta;   // per radius
};

// Sampled directions of D (unit vectors, columns): quasi-random directions
// projected onto the sphere section, plus `extra` columns.
Matrix sample_section_directions(const PolyhedralCone& cone, int count,
                                 const Matrix& extra = Matrix());

// Numerical verification of beta <= -k beyond r. Throws VerificationError
// when no radius up to the cap passes.
TailBound negative_drift_region(const LyapunovCertificate& cert, const SrbmSpec& spec,
                                double lambda, const DriftRegionOptions& options = {});

struct TailExponentReport {
  double rho_max = 0.0;
  std::vector<std::pair<double, bool>> requested;  // (rho, rho < rho_max)
};

TailExponentReport tail_exponent(const LyapunovCertificate& cert,
                                 const std::vector<double>& rhos = {});

}  // namespace rbmcert
