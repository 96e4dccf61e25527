#pragma once

#include "rlasso/model.hpp"

#include <optional>
#include <span>

namespace rlasso {

enum class Algorithm { block_coordinate, proximal_gradient };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct SolverConfig {
  std::size_t max_iters = 50000;
  /// Terminate once the KKT residual (dual units) is at most this.
  Real tol_kkt = 1e-9L;
  /// Stop early, unconverged, when a full pass lowers the objective by less
  /// than this relative amount and the active-set polish cannot certify.
  Real tol_obj = 1e-12L;
  Algorithm algorithm = Algorithm::block_coordinate;
  /// Continuation from the null-model penalty down to the target, largest first.
  bool warm_path = true;
  Real path_factor = 0.1L;

  void validate() const;
};

/// Minimizes (1/2n)||y - X beta - sqrt(n) e||^2 + lambda_beta ||beta||_1 + lambda_e ||e||_1.
///
/// Non-convergence within max_iters is reported through Solution::converged,
/// not thrown. Throws NumericError on NaN or if the block-coordinate objective
/// ever increases by more than 1e-12 (relative) within one penalty level.
Solution solve_extended_lasso(const ProblemInstance& instance, Real lambda_beta, Real lambda_e,
                              const SolverConfig& config = {});

/// Same as above but starting from the supplied iterate (no continuation).
Solution solve_extended_lasso(const ProblemInstance& instance, Real lambda_beta, Real lambda_e,
                              const SolverConfig& config, const Vector& beta0, const Vector& e0);

struct LassoFit {
  Vector beta;
  std::size_t iterations = 0;
  bool converged = false;
  Real kkt_residual = 0;
};

/// Cyclic coordinate descent on (1/2n)||y - X beta||^2 + lambda ||beta||_1.
LassoFit solve_standard_lasso(const Matrix& X, const Vector& y, Real lambda_beta,
                              const SolverConfig& config = {});

/// Closed-form stationary point of the extended Lasso when beta is supported
/// on T with signs sign_beta and e on S with signs sign_e.
struct RestrictedSolution {
  Vector h_T;       // beta_hat_T - anchor_T
  Vector g_S;       // e_hat_S - anchor_S
  Vector beta_hat;  // length p, zero off T
  Vector e_hat;     // length n, zero off S
  double condition_number = 0;  // of X_{S^c T}
};

/// Reference point (beta~, e~) that h and g are measured from when the
/// instance has no ground truth.
struct Anchors {
  Vector beta;
  Vector e;
};

/// Throws SingularityError when X_{S^c T} is rank deficient (condition number
/// above 1e12) and InputError on inconsistent arguments. Without truth and
/// anchors, h and g are measured from zero.
RestrictedSolution restricted_solution(const ProblemInstance& instance, const IndexSet& T,
                                       const IndexSet& S, Real lambda_beta, Real lambda_e,
                                       std::span<const int> sign_beta, std::span<const int> sign_e,
                                       const std::optional<Anchors>& anchors = std::nullopt);

inline constexpr double kMaxRestrictedCondition = 1e12;

}  // namespace rlasso
