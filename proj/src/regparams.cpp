#include "rlasso/regparams.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace rlasso {

namespace {

Real inf_norm(const Matrix& A) { return A.cwiseAbs().rowwise().sum().maxCoeff(); }

void require(bool ok, const char* what) {
  if (!ok) throw InputError(what);
}

Real ln(Index x) { return std::log(static_cast<Real>(x)); }

LambdaPair make_pair(Real beta, Real e) {
  LambdaPair out;
  out.beta = beta;
  out.e = e;
  out.degenerate = !(beta > 0) && !(e > 0);
  return out;
}

void check_family_args(Real sigma, Index n, Index p) {
  require(sigma >= 0 && std::isfinite(sigma), "lambda family: sigma must be finite and >= 0");
  require(n >= 2 && p >= 2, "lambda family: need n >= 2 and p >= 2");
}

}  // namespace

Real LambdaPair::ratio() const {
  if (!(beta > 0)) throw InputError("lambda ratio undefined for lambda_beta = 0");
  return e / beta;
}

CovarianceReport covariance_report(const Matrix& sigma, const IndexSet& T) {
  const Index p = sigma.rows();
  require(sigma.cols() == p, "covariance_report: Sigma must be square");
  check_index_set(T, p, "covariance_report T");
  require(!T.empty() && static_cast<Index>(T.size()) < p,
          "covariance_report: T must be a nonempty proper subset");
  const IndexSet Tc = complement(T, p);

  const Matrix S_TT = sigma(T, T);
  const Matrix S_cT = sigma(Tc, T);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S_TT);
  const Vector ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0)) {
    throw SingularityError("covariance_report: Sigma_TT is singular",
                           std::numeric_limits<double>::infinity());
  }
  const Matrix V = eig.eigenvectors();
  const Matrix S_TT_inv = V * ev.cwiseInverse().asDiagonal() * V.transpose();
  const Matrix S_TT_inv_sqrt = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();

  CovarianceReport r;
  r.C_min = ev.minCoeff();
  r.C_max = ev.maxCoeff();
  r.xi = sigma.diagonal().maxCoeff();
  r.D_plus_max = inf_norm(S_TT);
  r.D_minus_max = inf_norm(S_TT_inv);
  r.conditional = sigma(Tc, Tc) - S_cT * S_TT_inv * S_cT.transpose();
  r.rho_u = r.conditional.diagonal().maxCoeff();
  const Index m = r.conditional.rows();
  if (m == 1) {
    r.rho_l = r.rho_u;
  } else {
    Real best = std::numeric_limits<Real>::infinity();
    for (Index i = 0; i < m; ++i) {
      for (Index j = i + 1; j < m; ++j) {
        best = std::min(best, r.conditional(i, i) + r.conditional(j, j) - 2 * r.conditional(i, j));
      }
    }
    r.rho_l = best / 2;
  }
  r.incoherence_value = inf_norm(S_cT * S_TT_inv);
  const Real root = inf_norm(S_TT_inv_sqrt);
  r.inv_sqrt_inf_sq = root * root;
  return r;
}

void TheoryInputs::validate() const {
  require(n >= 2, "theory inputs: n must be >= 2");
  require(k >= 1 && p > k, "theory inputs: need 1 <= k < p");
  require(s >= 0 && s < n, "theory inputs: need 0 <= s < n");
  require(sigma >= 0 && std::isfinite(sigma), "theory inputs: sigma must be finite and >= 0");
  require(gamma_tuning > 0 && gamma_tuning <= 1, "theory inputs: gamma_tuning must be in (0, 1]");
  require(gamma_incoherence > 0 && gamma_incoherence <= 1,
          "theory inputs: gamma_incoherence must be in (0, 1]");
  require(epsilon > 0 && epsilon < 1, "theory inputs: epsilon must be in (0, 1)");
  require(delta > 0 && delta < 1, "theory inputs: delta must be in (0, 1)");
  require(report.C_min > 0 && report.C_max >= report.C_min,
          "theory inputs: covariance report needs 0 < C_min <= C_max");
  require(report.rho_u > 0 && report.rho_l > 0, "theory inputs: rho_u and rho_l must be > 0");
}

LambdaPair lambdas_theorem1(const ProblemInstance& instance, Real gamma_tuning) {
  require(gamma_tuning > 0 && gamma_tuning <= 1, "lambdas_theorem1: gamma must be in (0, 1]");
  const GroundTruth& truth = instance.require_truth();
  const Real n = static_cast<Real>(instance.n());
  const Real xw = (instance.X().transpose() * truth.w).cwiseAbs().maxCoeff();
  const Real w_inf = truth.w.cwiseAbs().maxCoeff();
  return make_pair(2 / gamma_tuning * xw / n, 2 * w_inf / std::sqrt(n));
}

LambdaPair lambdas_corollary1(Real sigma, Index n, Index p, Real gamma_tuning) {
  check_family_args(sigma, n, p);
  require(gamma_tuning > 0 && gamma_tuning <= 1, "lambdas_corollary1: gamma must be in (0, 1]");
  const Real s2 = sigma * sigma;
  const Real nn = static_cast<Real>(n);
  return make_pair(4 / gamma_tuning * std::sqrt(s2 * ln(p) / nn), 4 * std::sqrt(s2 * ln(n) / nn));
}

LambdaPair lambdas_theorem2(Real sigma, Index n, Index p, Real eta, const CovarianceReport& report,
                            Real gamma_incoherence) {
  check_family_args(sigma, n, p);
  require(eta > 0 && eta < 1, "lambdas_theorem2: eta must be in (0, 1)");
  require(gamma_incoherence > 0 && gamma_incoherence <= 1,
          "lambdas_theorem2: gamma must be in (0, 1]");
  const Real s2 = sigma * sigma;
  const Real nn = static_cast<Real>(n);
  const Real m = std::max(report.rho_u, report.D_plus_max);
  return make_pair(8 / gamma_incoherence * std::sqrt(s2 * eta * ln(n) * ln(p) * m / nn),
                   4 * std::sqrt(s2 * ln(n) / nn));
}

LambdaPair lambdas_simulation(Real sigma, Index n, Index p) {
  check_family_args(sigma, n, p);
  const Real s2 = sigma * sigma;
  const Real nn = static_cast<Real>(n);
  return make_pair(2 * std::sqrt(s2 * ln(p) * ln(n) / nn), 2 * std::sqrt(s2 * ln(n) / nn));
}

Real re_lambda_ratio(Index n, Index p, Real gamma_tuning, Real xi) {
  require(n >= 2 && p >= 2, "re_lambda_ratio: need n >= 2 and p >= 2");
  require(gamma_tuning > 0 && xi > 0, "re_lambda_ratio: need gamma > 0 and xi > 0");
  return gamma_tuning / std::sqrt(xi) * std::sqrt(ln(n) / ln(p));
}

namespace {

// sigma^2 c / lambda^2, which is zero in the noiseless case whatever lambda is.
Real noise_over_lambda_sq(Real sigma, Real c, Real lambda, const char* where) {
  if (sigma == 0) return 0;
  if (!(lambda > 0)) throw InputError(std::string(where) + ": lambda_beta must be > 0 when sigma > 0");
  return sigma * sigma * c / (lambda * lambda);
}

}  // namespace

SampleBounds sample_bounds_theorem2(const TheoryInputs& in, Real lambda_beta, Real lambda_e,
                                    const TheoryConstants& constants) {
  in.validate();
  const Real eta = in.eta();
  const Real g2 = in.gamma_incoherence * in.gamma_incoherence;
  const Real k = static_cast<Real>(in.k);
  const Real nn = static_cast<Real>(in.n);
  const Real klog = k * ln(in.p - in.k);
  const CovarianceReport& r = in.report;

  SampleBounds b;
  b.n1 = 4 * (1 + in.epsilon) / (1 - eta) * r.rho_u / (r.C_min * g2) * klog *
         (9.0L / 4 + (1 - eta) * (1 - eta) *
                         noise_over_lambda_sq(in.sigma, r.C_min, lambda_beta, "theorem 2 n1") / k);

  Real shrink = 0;
  if (in.sigma > 0) {
    if (!(lambda_e > 0)) throw InputError("theorem 2 n2: lambda_e must be > 0 when sigma > 0");
    shrink = 2 * in.sigma * std::sqrt(ln(in.n)) / (lambda_e * std::sqrt(nn));
  }
  if (!(shrink < 1)) {
    throw InputError("theorem 2 n2: needs lambda_e > 2 sigma sqrt(ln n / n)");
  }
  b.n2 = constants.n2_factor * (1 + in.epsilon) * eta / ((1 - eta) * (1 - eta)) *
         std::max(r.rho_u, r.D_plus_max) / (r.C_min * g2) / ((1 - shrink) * (1 - shrink)) * klog *
         ln(in.n);
  b.holds = nn > std::max(b.n1, b.n2);
  return b;
}

SampleBounds sample_bounds_theorem3(const TheoryInputs& in, Real lambda_beta, Real lambda_e) {
  in.validate();
  const Real eta = in.eta();
  const Real k = static_cast<Real>(in.k);
  const Real nn = static_cast<Real>(in.n);
  const Real klog = k * ln(in.p - in.k);
  const Real two_minus_g = 2 - in.gamma_incoherence;
  const CovarianceReport& r = in.report;

  SampleBounds b;
  b.n1 = 2 * (1 - in.delta) / (1 - eta) * r.rho_l * klog / (r.C_max * two_minus_g * two_minus_g) *
         (3.0L / 8 + (1 - eta) * (1 - eta) *
                         noise_over_lambda_sq(in.sigma, r.C_max, lambda_beta, "theorem 3 n1") / k);
  Real grow = 0;
  if (in.sigma > 0) {
    if (!(lambda_e > 0)) throw InputError("theorem 3 n2: lambda_e must be > 0 when sigma > 0");
    grow = 2 * std::sqrt(in.sigma * in.sigma * ln(in.n)) / (lambda_e * std::sqrt(nn));
  }
  b.n2 = (1 - in.delta) / 12 * eta / ((1 - eta) * (1 - eta)) * r.rho_l / r.C_max /
         ((1 + grow) * (1 + grow)) * klog * ln(in.n - in.s);
  b.holds = nn < std::max(b.n1, b.n2);
  return b;
}

Thresholds thresholds_theorem2(const TheoryInputs& in, Real lambda_beta, Real lambda_e,
                               const TheoryConstants& constants) {
  in.validate();
  require(lambda_beta >= 0 && lambda_e >= 0, "thresholds_theorem2: penalties must be >= 0");
  const Real eta = in.eta();
  const Real k = static_cast<Real>(in.k);
  const Real s = static_cast<Real>(in.s);
  const Real nn = static_cast<Real>(in.n);
  const CovarianceReport& r = in.report;

  Thresholds t;
  t.lambda_prime = lambda_beta * std::sqrt(k * ln(in.p - in.k) / ((1 - eta) * (1 - eta) * nn)) *
                   r.inv_sqrt_inf_sq;
  t.f_beta = constants.c1 * t.lambda_prime +
             20 * std::sqrt(in.sigma * in.sigma * ln(in.k) / (r.C_min * (nn - s)));
  t.f_e = constants.c2 * t.lambda_prime * std::sqrt(r.C_max) *
              std::sqrt((s * k + k * std::sqrt(s * k)) / nn) +
          constants.c3 * lambda_e;
  return t;
}

}  // namespace rlasso
