#pragma once

#include "rlasso/types.hpp"

#include <string>

namespace rlasso {

/// How the row covariance of a Gaussian design is built.
struct CovarianceSpec {
  enum class Kind { identity, ar1, explicit_matrix };

  Kind kind = Kind::identity;
  Index p = 0;
  Real rho = 0;     // ar1 only, in (-1, 1)
  Matrix sigma;     // explicit_matrix only, p x p

  static CovarianceSpec identity(Index p);
  static CovarianceSpec ar1(Index p, Real rho);
  static CovarianceSpec from_matrix(Matrix sigma);

  /// Dense Sigma. Throws InputError if it is not symmetric positive definite
  /// (smallest eigenvalue must exceed 1e-10).
  Matrix materialize() const;

  /// Short label, e.g. "identity", "ar1(0.5)", "explicit".
  std::string label() const;
};

const char* to_string(CovarianceSpec::Kind kind);
CovarianceSpec::Kind covariance_kind_from_string(const std::string& name);

}  // namespace rlasso
