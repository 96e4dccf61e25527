#include "rlasso/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rlasso {

IndexSet complement(const IndexSet& set, Index dim) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(dim) - std::min<std::size_t>(set.size(), dim));
  auto it = set.begin();
  for (Index i = 0; i < dim; ++i) {
    if (it != set.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

IndexSet nonzero_indices(const Vector& x) {
  IndexSet out;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0) out.push_back(i);
  }
  return out;
}

void check_index_set(const IndexSet& set, Index dim, const char* name) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i] < 0 || set[i] >= dim) {
      throw InputError(std::string(name) + ": index " + std::to_string(set[i]) +
                       " outside [0, " + std::to_string(dim) + ")");
    }
    if (i > 0 && set[i] <= set[i - 1]) {
      throw InputError(std::string(name) + ": indices must be strictly increasing");
    }
  }
}

const char* to_string(CorruptionMode mode) {
  return mode == CorruptionMode::gross ? "gross" : "missing";
}

const char* to_string(SparsityRegime regime) {
  switch (regime) {
    case SparsityRegime::sublinear: return "sublinear";
    case SparsityRegime::linear: return "linear";
    case SparsityRegime::fractional: return "fractional";
  }
  return "?";
}

CorruptionMode corruption_mode_from_string(const std::string& name) {
  if (name == "gross") return CorruptionMode::gross;
  if (name == "missing") return CorruptionMode::missing;
  throw InputError("unknown corruption mode '" + name + "'");
}

SparsityRegime sparsity_regime_from_string(const std::string& name) {
  if (name == "sublinear") return SparsityRegime::sublinear;
  if (name == "linear") return SparsityRegime::linear;
  if (name == "fractional") return SparsityRegime::fractional;
  throw InputError("unknown sparsity regime '" + name + "'");
}

GroundTruth GroundTruth::from_vectors(Vector beta_star, Vector e_star, Vector w, Real sigma) {
  if (e_star.size() != w.size()) throw InputError("truth: e_star and w lengths differ");
  if (!(sigma >= 0)) throw InputError("truth: sigma must be >= 0");
  GroundTruth truth;
  truth.T = nonzero_indices(beta_star);
  truth.S = nonzero_indices(e_star);
  truth.beta_star = std::move(beta_star);
  truth.e_star = std::move(e_star);
  truth.w = std::move(w);
  truth.sigma = sigma;
  return truth;
}

ProblemInstance::ProblemInstance(Matrix X, Vector y, std::optional<GroundTruth> truth,
                                 GenerationMeta meta)
    : X_(std::move(X)), y_(std::move(y)), truth_(std::move(truth)), meta_(std::move(meta)) {
  if (X_.rows() < 1 || X_.cols() < 1) throw InputError("instance: need n >= 1 and p >= 1");
  if (y_.size() != X_.rows()) throw InputError("instance: y length must equal rows of X");
  if (!X_.allFinite()) throw InputError("instance: X has non-finite entries");
  if (!y_.allFinite()) throw InputError("instance: y has non-finite entries");
  sqrt_n_ = std::sqrt(static_cast<Real>(X_.rows()));
  if (truth_) {
    const GroundTruth& t = *truth_;
    if (t.beta_star.size() != p() || t.e_star.size() != n() || t.w.size() != n()) {
      throw InputError("instance: truth dimensions do not match (n, p)");
    }
    if (t.T != nonzero_indices(t.beta_star) || t.S != nonzero_indices(t.e_star)) {
      throw InputError("instance: truth supports disagree with beta_star / e_star");
    }
    const Real err = reconstruction_error();
    if (!(err <= 1e-10L)) {
      throw InputError("instance: y does not match X beta* + sqrt(n) e* + w (relative error " +
                       std::to_string(static_cast<double>(err)) + ")");
    }
  }
}

const GroundTruth& ProblemInstance::require_truth() const {
  if (!truth_) throw InputError("instance carries no ground truth");
  return *truth_;
}

Real ProblemInstance::reconstruction_error() const {
  if (!truth_) return 0;
  const Vector r = y_ - X_ * truth_->beta_star - sqrt_n_ * truth_->e_star - truth_->w;
  const Real denom = y_.norm();
  return denom > 0 ? r.norm() / denom : r.norm();
}

Index SignedSupport::support_size() const {
  return std::count_if(signs.begin(), signs.end(), [](int s) { return s != 0; });
}

IndexSet SignedSupport::support() const {
  IndexSet out;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] != 0) out.push_back(static_cast<Index>(i));
  }
  return out;
}

SignedSupport extract_signed_support(const Vector& x, Real zero_tol) {
  if (!(zero_tol >= 0)) throw InputError("extract_signed_support: zero_tol must be >= 0");
  if (!x.allFinite()) throw InputError("extract_signed_support: non-finite entry");
  SignedSupport out;
  out.zero_tol = zero_tol;
  out.signs.resize(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) {
    out.signs[static_cast<std::size_t>(i)] = std::abs(x(i)) > zero_tol ? sign_of(x(i)) : 0;
  }
  return out;
}

Vector residual(const ProblemInstance& instance, const Vector& beta, const Vector& e) {
  if (beta.size() != instance.p() || e.size() != instance.n()) {
    throw InputError("residual: beta must have length p and e length n");
  }
  return instance.y() - instance.X() * beta - instance.sqrt_n() * e;
}

Real objective_value(const ProblemInstance& instance, const Vector& beta, const Vector& e,
                     Real lambda_beta, Real lambda_e) {
  if (!(lambda_beta >= 0) || !(lambda_e >= 0)) {
    throw InputError("objective_value: penalties must be non-negative");
  }
  const Vector r = residual(instance, beta, e);
  const Real n = static_cast<Real>(instance.n());
  return r.squaredNorm() / (2 * n) + lambda_beta * beta.lpNorm<1>() + lambda_e * e.lpNorm<1>();
}

}  // namespace rlasso
