#pragma once

#include "rlasso/model.hpp"

#include <cstdint>

namespace rlasso {

/// Off-support dual magnitudes within this distance of 1 count as not strict.
inline constexpr Real kStrictTieTol = 1e-12L;

/// Dual certificate of a candidate (beta_hat, e_hat).
struct KktReport {
  Vector z_beta;  // X'r / (n lambda_beta)
  Vector z_e;     // r / (sqrt(n) lambda_e)
  /// Largest violation: |z - sgn| on the support, max(0, |z| - 1) off it.
  Real stationarity_residual = 0;
  Real max_offsupport_zbeta = 0;
  Real max_offsupport_ze = 0;
  /// Both off-support maxima below 1 - kStrictTieTol.
  bool strict_feasible = false;
  /// Every on-support dual is within tol of its coefficient's sign.
  bool sign_consistent = false;
  Real tol = 1e-9L;

  bool certified() const {
    return stationarity_residual <= tol && strict_feasible && sign_consistent;
  }
};

/// Supports are the exact nonzeros of the solution. Never throws on a
/// dimensionally consistent solution with positive penalties.
KktReport kkt_check(const ProblemInstance& instance, const Solution& solution, Real tol = 1e-9L);

enum class WitnessFailure { none, step3_beta, step3_e, step4_beta, step4_e };

const char* to_string(WitnessFailure failure);

struct WitnessReport {
  Vector beta_T;  // restricted solution on T
  Vector e_S;     // restricted solution on S
  Vector z_beta_Tc;
  Vector z_e_Sc;
  Real max_z_beta_Tc = 0;
  Real max_z_e_Sc = 0;
  bool step3_pass = false;
  bool step4_pass = false;
  /// Truth-support coordinates that the restricted solution sets to zero.
  IndexSet zeroed_beta;
  IndexSet zeroed_e;
  WitnessFailure failing_condition = WitnessFailure::none;
  double condition_number = 0;

  bool passed() const { return step3_pass && step4_pass; }
};

/// Primal-dual witness on the truth supports. Step 1 solves the restricted
/// problem in closed form with the truth's signs, step 2 fixes the on-support
/// duals to those signs, step 3 checks strict off-support dual feasibility and
/// step 4 checks the restricted solution's signs against the truth.
/// Throws SingularityError when X_{S^c T} is rank deficient.
WitnessReport primal_dual_witness(const ProblemInstance& instance, Real lambda_beta, Real lambda_e);

/// Same, with T and S given explicitly; every index must lie on the truth's support.
WitnessReport primal_dual_witness(const ProblemInstance& instance, const IndexSet& T,
                                  const IndexSet& S, Real lambda_beta, Real lambda_e);

/// Which blocks of (h, f) the cone sampler draws.
enum class ConeBlocks { both, h_only, f_only };

const char* to_string(ConeBlocks blocks);

struct ReSamplingSpec {
  Real lambda_ratio = 1;
  std::uint64_t seed = 0;
  ConeBlocks blocks = ConeBlocks::both;
};

struct ReEstimate {
  Real kappa_hat = 0;
  std::size_t num_samples = 0;
  ReSamplingSpec sampling_spec;
};

/// Smallest ||Xh + sqrt(n) f||_2 / sqrt(n) over sampled directions in the cone
/// ||h_{T^c}||_1 + lambda ||f_{S^c}||_1 <= 3 ||h_T||_1 + 3 lambda ||f_S||_1,
/// normalized to ||h||_2 + ||f||_2 = 1. On-support parts are Gaussian; the
/// off-support parts are Gaussian rescaled to use a uniform fraction of the
/// cone budget. Samples are a prefix-stable stream of the seed, so the
/// estimate is non-increasing in num_samples.
ReEstimate extended_re_estimate(const Matrix& X, const IndexSet& T, const IndexSet& S,
                                Real lambda_ratio, std::size_t num_samples, std::uint64_t seed,
                                ConeBlocks blocks = ConeBlocks::both);

struct RecoveryMetrics {
  Real beta_l2 = 0;
  Real e_l2 = 0;
  Real beta_linf = 0;
  Real e_linf = 0;
  Real prediction_error = 0;  // ||X (beta_hat - beta*)||_2 / sqrt(n)
  bool beta_sign_match = false;
  bool e_sign_match = false;

  Real combined_l2() const { return beta_l2 + e_l2; }
  bool both_match() const { return beta_sign_match && e_sign_match; }
};

/// Estimated signs use zero_tol; the truth's signs are its exact nonzeros.
RecoveryMetrics recovery_metrics(const ProblemInstance& instance, const Solution& solution,
                                 Real zero_tol = kDefaultZeroTol);

}  // namespace rlasso
