#pragma once

#include "rlasso/model.hpp"

namespace rlasso {

/// A (lambda_beta, lambda_e) choice. degenerate is set when both vanish
/// (sigma = 0 or w = 0); such a pair must not be handed to the solver.
struct LambdaPair {
  Real beta = 0;
  Real e = 0;
  bool degenerate = false;

  /// lambda_e / lambda_beta, the cone weight of the extended RE set.
  Real ratio() const;
};

/// Scalars of Sigma that the recovery theorems consume.
struct CovarianceReport {
  Real C_min = 0;  // extreme eigenvalues of Sigma_TT
  Real C_max = 0;
  Real xi = 0;  // max diagonal of Sigma
  Real D_plus_max = 0;  // ||Sigma_TT||_inf
  Real D_minus_max = 0;  // ||Sigma_TT^{-1}||_inf
  Real rho_u = 0;  // max diagonal of Sigma_{T^c|T}
  Real rho_l = 0;  // (1/2) min_{i != j} of the pairwise variance of Sigma_{T^c|T}
  Real incoherence_value = 0;  // ||Sigma_{T^c T} Sigma_TT^{-1}||_inf
  Real inv_sqrt_inf_sq = 0;  // ||Sigma_TT^{-1/2}||_inf^2
  Matrix conditional;  // Sigma_{T^c|T}

  bool incoherent(Real gamma) const { return incoherence_value <= 1 - gamma; }
};

/// Throws InputError unless T is a nonempty proper subset of [0, p), and
/// SingularityError when Sigma_TT is singular. With |T^c| = 1 there is no pair
/// i != j, and rho_l is set to rho_u.
CovarianceReport covariance_report(const Matrix& sigma, const IndexSet& T);

/// Unnamed order constants of the sample bounds and thresholds.
struct TheoryConstants {
  Real c1 = 1;
  Real c2 = 1;
  Real c3 = 1;
  Real n2_factor = 48;
};

struct TheoryInputs {
  Index n = 0;
  Index p = 0;
  Index k = 0;
  Index s = 0;
  Real sigma = 0;
  Real gamma_tuning = 1;
  Real gamma_incoherence = 0.5L;
  Real epsilon = 0.1L;
  Real delta = 0.1L;
  CovarianceReport report;

  Real eta() const { return static_cast<Real>(s) / static_cast<Real>(n); }
  void validate() const;
};

/// (2/gamma) ||X'w||_inf / n and 2 ||w||_inf / sqrt(n). Needs the truth.
LambdaPair lambdas_theorem1(const ProblemInstance& instance, Real gamma_tuning);

/// (4/gamma) sqrt(sigma^2 ln p / n) and 4 sqrt(sigma^2 ln n / n).
LambdaPair lambdas_corollary1(Real sigma, Index n, Index p, Real gamma_tuning);

/// (8/gamma) sqrt(sigma^2 eta ln n ln p max{rho_u, D+} / n) and 4 sqrt(sigma^2 ln n / n).
LambdaPair lambdas_theorem2(Real sigma, Index n, Index p, Real eta, const CovarianceReport& report,
                            Real gamma_incoherence);

/// 2 sqrt(sigma^2 ln p ln n / n) and 2 sqrt(sigma^2 ln n / n).
LambdaPair lambdas_simulation(Real sigma, Index n, Index p);

/// gamma / sqrt(xi) * sqrt(ln n / ln p), the cone weight under which a
/// Gaussian design satisfies the extended RE.
Real re_lambda_ratio(Index n, Index p, Real gamma_tuning, Real xi);

struct SampleBounds {
  Real n1 = 0;
  Real n2 = 0;
  bool holds = false;  // theorem 2: n > max; theorem 3: n < max
};

/// Throws InputError outside the formula's domain, e.g. when
/// lambda_e <= 2 sigma sqrt(ln n / n) makes the n2 factor blow up.
SampleBounds sample_bounds_theorem2(const TheoryInputs& in, Real lambda_beta, Real lambda_e,
                                    const TheoryConstants& constants = {});

SampleBounds sample_bounds_theorem3(const TheoryInputs& in, Real lambda_beta, Real lambda_e);

struct Thresholds {
  Real f_beta = 0;
  Real f_e = 0;
  Real lambda_prime = 0;
};

Thresholds thresholds_theorem2(const TheoryInputs& in, Real lambda_beta, Real lambda_e,
                               const TheoryConstants& constants = {});

}  // namespace rlasso
