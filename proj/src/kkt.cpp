#include "rlasso/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace rlasso {

namespace {

struct BlockScan {
  Real on_support = 0;   // max |z - sgn| over nonzero coefficients
  Real off_support = 0;  // max |z| over zero coefficients
};

BlockScan scan(const Vector& z, const Vector& coef) {
  BlockScan out;
  for (Index i = 0; i < z.size(); ++i) {
    if (coef(i) != 0) {
      out.on_support = std::max(out.on_support, std::abs(z(i) - sign_of(coef(i))));
    } else {
      out.off_support = std::max(out.off_support, std::abs(z(i)));
    }
  }
  return out;
}

}  // namespace

KktReport kkt_check(const ProblemInstance& instance, const Solution& solution, Real tol) {
  if (!(solution.lambda_beta > 0) || !(solution.lambda_e > 0)) {
    throw InputError("kkt_check: penalties must be > 0");
  }
  const Vector r = residual(instance, solution.beta_hat, solution.e_hat);
  const Real n = static_cast<Real>(instance.n());

  KktReport report;
  report.tol = tol;
  report.z_beta = instance.X().transpose() * r / (n * solution.lambda_beta);
  report.z_e = r / (instance.sqrt_n() * solution.lambda_e);

  const BlockScan b = scan(report.z_beta, solution.beta_hat);
  const BlockScan e = scan(report.z_e, solution.e_hat);
  report.max_offsupport_zbeta = b.off_support;
  report.max_offsupport_ze = e.off_support;
  const Real on = std::max(b.on_support, e.on_support);
  const Real excess = std::max(Real(0), std::max(b.off_support, e.off_support) - 1);
  report.stationarity_residual = std::max(on, excess);
  report.strict_feasible = b.off_support < 1 - kStrictTieTol && e.off_support < 1 - kStrictTieTol;
  report.sign_consistent = on <= tol;
  if (!std::isfinite(report.stationarity_residual)) {
    report.strict_feasible = false;
    report.sign_consistent = false;
  }
  return report;
}

}  // namespace rlasso
