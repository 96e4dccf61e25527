#include "rlasso/diagnostics.hpp"

namespace rlasso {

RecoveryMetrics recovery_metrics(const ProblemInstance& instance, const Solution& solution,
                                 Real zero_tol) {
  const GroundTruth& truth = instance.require_truth();
  if (solution.beta_hat.size() != instance.p() || solution.e_hat.size() != instance.n()) {
    throw InputError("recovery_metrics: solution dimensions do not match the instance");
  }
  const Vector h = solution.beta_hat - truth.beta_star;
  const Vector f = solution.e_hat - truth.e_star;
  RecoveryMetrics m;
  m.beta_l2 = h.norm();
  m.e_l2 = f.norm();
  m.beta_linf = h.lpNorm<Eigen::Infinity>();
  m.e_linf = f.lpNorm<Eigen::Infinity>();
  m.prediction_error = (instance.X() * h).norm() / instance.sqrt_n();
  m.beta_sign_match =
      extract_signed_support(solution.beta_hat, zero_tol) == extract_signed_support(truth.beta_star, 0);
  m.e_sign_match =
      extract_signed_support(solution.e_hat, zero_tol) == extract_signed_support(truth.e_star, 0);
  return m;
}

}  // namespace rlasso
