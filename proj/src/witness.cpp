#include "rlasso/diagnostics.hpp"
#include "rlasso/solver.hpp"

#include <cmath>

namespace rlasso {

const char* to_string(WitnessFailure failure) {
  switch (failure) {
    case WitnessFailure::none: return "none";
    case WitnessFailure::step3_beta: return "step3-beta-dual";
    case WitnessFailure::step3_e: return "step3-e-dual";
    case WitnessFailure::step4_beta: return "step4-beta-sign";
    case WitnessFailure::step4_e: return "step4-e-sign";
  }
  return "?";
}

WitnessReport primal_dual_witness(const ProblemInstance& instance, Real lambda_beta, Real lambda_e) {
  const GroundTruth& truth = instance.require_truth();
  return primal_dual_witness(instance, truth.T, truth.S, lambda_beta, lambda_e);
}

WitnessReport primal_dual_witness(const ProblemInstance& instance, const IndexSet& T,
                                  const IndexSet& S, Real lambda_beta, Real lambda_e) {
  if (!(lambda_beta > 0) || !(lambda_e > 0)) {
    throw InputError("primal_dual_witness: penalties must be > 0");
  }
  const GroundTruth& truth = instance.require_truth();
  check_index_set(T, instance.p(), "witness T");
  check_index_set(S, instance.n(), "witness S");

  std::vector<int> sb;
  std::vector<int> se;
  for (Index j : T) {
    if (truth.beta_star(j) == 0) throw InputError("witness: T leaves the support of beta*");
    sb.push_back(sign_of(truth.beta_star(j)));
  }
  for (Index i : S) {
    if (truth.e_star(i) == 0) throw InputError("witness: S leaves the support of e*");
    se.push_back(sign_of(truth.e_star(i)));
  }

  // Steps 1 and 2: restricted solution with the on-support duals fixed to the truth's signs.
  const RestrictedSolution rs =
      restricted_solution(instance, T, S, lambda_beta, lambda_e, sb, se, Anchors{truth.beta_star, truth.e_star});
  WitnessReport out;
  out.condition_number = rs.condition_number;
  out.beta_T = rs.beta_hat(T);
  out.e_S = rs.e_hat(S);

  // Step 3: off-support duals from the stationarity equations.
  const Vector r = residual(instance, rs.beta_hat, rs.e_hat);
  const Real n = static_cast<Real>(instance.n());
  const IndexSet Tc = complement(T, instance.p());
  const IndexSet Sc = complement(S, instance.n());
  out.z_beta_Tc = instance.X()(Eigen::all, Tc).transpose() * r / (n * lambda_beta);
  out.z_e_Sc = r(Sc) / (instance.sqrt_n() * lambda_e);
  out.max_z_beta_Tc = out.z_beta_Tc.size() ? out.z_beta_Tc.cwiseAbs().maxCoeff() : Real(0);
  out.max_z_e_Sc = out.z_e_Sc.size() ? out.z_e_Sc.cwiseAbs().maxCoeff() : Real(0);
  const bool beta_dual_ok = out.max_z_beta_Tc < 1 - kStrictTieTol;
  const bool e_dual_ok = out.max_z_e_Sc < 1 - kStrictTieTol;
  out.step3_pass = beta_dual_ok && e_dual_ok;

  // Step 4: sign consistency with the truth.
  bool beta_signs_ok = true;
  bool e_signs_ok = true;
  for (std::size_t j = 0; j < T.size(); ++j) {
    const int got = sign_of(out.beta_T(static_cast<Index>(j)));
    if (got == 0) out.zeroed_beta.push_back(T[j]);
    if (got != sb[j]) beta_signs_ok = false;
  }
  for (std::size_t i = 0; i < S.size(); ++i) {
    const int got = sign_of(out.e_S(static_cast<Index>(i)));
    if (got == 0) out.zeroed_e.push_back(S[i]);
    if (got != se[i]) e_signs_ok = false;
  }
  out.step4_pass = beta_signs_ok && e_signs_ok;

  if (!beta_dual_ok) {
    out.failing_condition = WitnessFailure::step3_beta;
  } else if (!e_dual_ok) {
    out.failing_condition = WitnessFailure::step3_e;
  } else if (!beta_signs_ok) {
    out.failing_condition = WitnessFailure::step4_beta;
  } else if (!e_signs_ok) {
    out.failing_condition = WitnessFailure::step4_e;
  }
  return out;
}

}  // namespace rlasso
