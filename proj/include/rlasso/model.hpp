#pragma once

#include "rlasso/covariance.hpp"
#include "rlasso/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rlasso {

inline constexpr Real kDefaultZeroTol = 1e-8L;

enum class CorruptionMode { gross, missing };
enum class SparsityRegime { sublinear, linear, fractional };

const char* to_string(CorruptionMode mode);
const char* to_string(SparsityRegime regime);
CorruptionMode corruption_mode_from_string(const std::string& name);
SparsityRegime sparsity_regime_from_string(const std::string& name);

/// Planted quantities of a synthetic instance.
struct GroundTruth {
  Vector beta_star;  // length p
  Vector e_star;     // length n
  Vector w;          // length n
  IndexSet T;        // support of beta_star
  IndexSet S;        // support of e_star
  Real sigma = 0;

  Index k() const { return static_cast<Index>(T.size()); }
  Index s() const { return static_cast<Index>(S.size()); }

  /// Builds the truth and derives T and S from the exact nonzeros.
  static GroundTruth from_vectors(Vector beta_star, Vector e_star, Vector w, Real sigma);
};

struct GenerationMeta {
  std::uint64_t seed = 0;
  CovarianceSpec covariance;
  std::optional<SparsityRegime> regime;
  CorruptionMode corruption = CorruptionMode::gross;
  Real gross_scale = 1;
  Real beta_floor = 0;
  Real e_floor = 0;
};

/// Observations of the model y = X beta* + sqrt(n) e* + w.
///
/// Immutable once constructed. The constructor validates dimensions, rejects
/// non-finite design entries and, when a truth is attached, checks the
/// reconstruction identity to 1e-10 relative error.
class ProblemInstance {
 public:
  ProblemInstance(Matrix X, Vector y, std::optional<GroundTruth> truth = std::nullopt,
                  GenerationMeta meta = {});

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  const std::optional<GroundTruth>& truth() const { return truth_; }
  const GroundTruth& require_truth() const;
  const GenerationMeta& meta() const { return meta_; }

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  Real sqrt_n() const { return sqrt_n_; }

  /// ||y - X beta* - sqrt(n) e* - w|| / ||y||; zero without truth.
  Real reconstruction_error() const;

 private:
  Matrix X_;
  Vector y_;
  std::optional<GroundTruth> truth_;
  GenerationMeta meta_;
  Real sqrt_n_;
};

/// One entry of the solver progress log, recorded per continuation stage.
struct TraceEntry {
  Real lambda_scale = 1;
  std::size_t iterations = 0;
  Real objective = 0;
  Real kkt_residual = 0;
};

struct Solution {
  Vector beta_hat;
  Vector e_hat;
  Real lambda_beta = 0;
  Real lambda_e = 0;
  Real objective = 0;
  std::size_t iterations = 0;
  bool converged = false;
  Real kkt_residual = 0;
  std::string algorithm;
  std::vector<TraceEntry> trace;
};

/// Signs in {-1, 0, +1}; zero wherever |x_i| <= zero_tol.
struct SignedSupport {
  std::vector<int> signs;
  Real zero_tol = kDefaultZeroTol;

  Index support_size() const;
  IndexSet support() const;
  bool operator==(const SignedSupport& other) const { return signs == other.signs; }
};

SignedSupport extract_signed_support(const Vector& x, Real zero_tol = kDefaultZeroTol);

/// y - X beta - sqrt(n) e.
Vector residual(const ProblemInstance& instance, const Vector& beta, const Vector& e);

/// (1/2n)||y - X beta - sqrt(n) e||^2 + lambda_beta ||beta||_1 + lambda_e ||e||_1.
Real objective_value(const ProblemInstance& instance, const Vector& beta, const Vector& e,
                     Real lambda_beta, Real lambda_e);

}  // namespace rlasso
