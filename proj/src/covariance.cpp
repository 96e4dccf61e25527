#include "rlasso/covariance.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace rlasso {

CovarianceSpec CovarianceSpec::identity(Index p) {
  CovarianceSpec spec;
  spec.kind = Kind::identity;
  spec.p = p;
  return spec;
}

CovarianceSpec CovarianceSpec::ar1(Index p, Real rho) {
  if (!(rho > -1 && rho < 1)) throw InputError("ar1 covariance needs rho in (-1, 1)");
  CovarianceSpec spec;
  spec.kind = Kind::ar1;
  spec.p = p;
  spec.rho = rho;
  return spec;
}

CovarianceSpec CovarianceSpec::from_matrix(Matrix sigma) {
  if (sigma.rows() != sigma.cols()) throw InputError("explicit covariance must be square");
  CovarianceSpec spec;
  spec.kind = Kind::explicit_matrix;
  spec.p = sigma.rows();
  spec.sigma = std::move(sigma);
  return spec;
}

Matrix CovarianceSpec::materialize() const {
  if (p < 1) throw InputError("covariance dimension must be >= 1");
  Matrix out;
  switch (kind) {
    case Kind::identity:
      return Matrix::Identity(p, p);
    case Kind::ar1:
      out.resize(p, p);
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) out(i, j) = std::pow(rho, static_cast<Real>(std::abs(i - j)));
      }
      break;
    case Kind::explicit_matrix:
      if (sigma.rows() != p || sigma.cols() != p) {
        throw InputError("explicit covariance does not match dimension p");
      }
      if (!sigma.allFinite()) throw InputError("explicit covariance has non-finite entries");
      if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12L * (1 + sigma.cwiseAbs().maxCoeff())) {
        throw InputError("explicit covariance is not symmetric");
      }
      out = sigma;
      break;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(out, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 1e-10L)) {
    throw InputError("covariance is not positive definite");
  }
  return out;
}

std::string CovarianceSpec::label() const {
  if (kind == Kind::ar1) {
    std::ostringstream os;
    os << "ar1(" << static_cast<double>(rho) << ")";
    return os.str();
  }
  return to_string(kind);
}

const char* to_string(CovarianceSpec::Kind kind) {
  switch (kind) {
    case CovarianceSpec::Kind::identity: return "identity";
    case CovarianceSpec::Kind::ar1: return "ar1";
    case CovarianceSpec::Kind::explicit_matrix: return "explicit";
  }
  return "?";
}

CovarianceSpec::Kind covariance_kind_from_string(const std::string& name) {
  if (name == "identity") return CovarianceSpec::Kind::identity;
  if (name == "ar1") return CovarianceSpec::Kind::ar1;
  if (name == "explicit") return CovarianceSpec::Kind::explicit_matrix;
  throw InputError("unknown covariance kind '" + name + "'");
}

}  // namespace rlasso
