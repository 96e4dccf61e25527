#pragma once

#include "rlasso/model.hpp"

#include <cstdint>
#include <optional>

namespace rlasso {

/// Independent random streams derived from one seed.
enum class Stream : std::uint64_t { design = 1, beta = 2, error = 3, noise = 4, cone = 5 };

/// Mixes (master, trial, stream) into a 64-bit seed with splitmix64. Pure, so
/// trials are reproducible no matter which worker runs them.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream);

/// n x p matrix whose rows are i.i.d. N(0, Sigma), built as Z L' with L the
/// Cholesky factor of Sigma. Throws InputError for non-SPD Sigma.
Matrix gen_design(Index n, Index p, const CovarianceSpec& spec, std::uint64_t seed);

struct AmplitudeSpec {
  Real scale = 1;  // multiplies every magnitude
  Real floor = 0;  // |entry| >= floor * scale via a truncated normal
};

struct SparseDraw {
  Vector values;
  IndexSet support;
};

/// Uniformly random support of the given size (without replacement) with
/// N(0, 1) entries, optionally conditioned on |entry| >= floor.
SparseDraw gen_sparse_vector(Index dim, Index support_size, const AmplitudeSpec& amplitude,
                             std::uint64_t seed);

/// round-half-up of 0.2p/ln(0.2p), 0.1p or 0.5p^0.75, clamped to [1, p].
Index k_from_regime(SparsityRegime regime, Index p);

/// Smallest n >= 8 with n / ln n >= 4 theta k ln(p - k).
Index n_from_theta(Real theta, Index k, Index p);

struct InstanceSpec {
  Index n = 0;
  Index p = 0;
  SparsityRegime regime = SparsityRegime::sublinear;
  std::optional<Index> k;  // overrides the regime
  std::optional<Index> s;  // defaults to n / 2
  Real sigma = 0;
  CorruptionMode corruption = CorruptionMode::gross;
  std::optional<CovarianceSpec> covariance;  // defaults to identity
  Real gross_scale = 1;
  Real beta_floor = 0;
  Real e_floor = 0;

  Index resolved_k() const;
  Index resolved_s() const;
};

/// y = X beta* + sqrt(n) e* + w with w ~ N(0, sigma^2 I). In missing mode the
/// corrupted rows get e*_i = -(X beta* + w)_i / sqrt(n) and y_i = 0.
ProblemInstance gen_instance(const InstanceSpec& spec, std::uint64_t seed);

}  // namespace rlasso
