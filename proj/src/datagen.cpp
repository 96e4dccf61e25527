#include "rlasso/datagen.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rlasso {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  return derive_seed(seed, 0, static_cast<std::uint64_t>(stream));
}

Real round_half_up(Real x) { return std::floor(x + 0.5L); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ trial);
  return splitmix64(h ^ (stream * 0xd1b54a32d192ed03ULL));
}

Matrix gen_design(Index n, Index p, const CovarianceSpec& spec, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InputError("gen_design: need n >= 1 and p >= 1");
  if (spec.p != p) throw InputError("gen_design: covariance dimension does not match p");
  const Matrix sigma = spec.materialize();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
  }
  if (sigma.isIdentity(0)) return Z;
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw InputError("gen_design: Cholesky factorization failed");
  const Matrix L = llt.matrixL();
  return Z * L.transpose();
}

SparseDraw gen_sparse_vector(Index dim, Index support_size, const AmplitudeSpec& amplitude,
                             std::uint64_t seed) {
  if (dim < 0 || support_size < 0) throw InputError("gen_sparse_vector: negative size");
  if (support_size > dim) throw InputError("gen_sparse_vector: support_size exceeds dim");
  if (!(amplitude.scale > 0) || !(amplitude.floor >= 0)) {
    throw InputError("gen_sparse_vector: need scale > 0 and floor >= 0");
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> pool(static_cast<std::size_t>(dim));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < support_size; ++i) {
    std::uniform_int_distribution<Index> pick(i, dim - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  SparseDraw out;
  out.support.assign(pool.begin(), pool.begin() + support_size);
  std::sort(out.support.begin(), out.support.end());
  out.values = Vector::Zero(dim);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // P(|Z| >= f) = erfc(f / sqrt 2); invert it to sample the tail directly.
  const double tail = std::erfc(static_cast<double>(amplitude.floor) / std::sqrt(2.0));
  for (Index idx : out.support) {
    Real v;
    if (amplitude.floor == 0) {
      do {
        v = normal(rng);
      } while (v == 0);
    } else {
      double u;
      do {
        u = uniform(rng);
      } while (u == 0);
      const double magnitude = std::sqrt(2.0) * boost::math::erfc_inv(u * tail);
      v = uniform(rng) < 0.5 ? -magnitude : magnitude;
    }
    out.values(idx) = amplitude.scale * v;
  }
  return out;
}

Index k_from_regime(SparsityRegime regime, Index p) {
  if (p < 1) throw InputError("k_from_regime: p must be >= 1");
  const Real pp = static_cast<Real>(p);
  Real raw = 1;
  switch (regime) {
    case SparsityRegime::sublinear: raw = 0.2L * pp / std::log(0.2L * pp); break;
    case SparsityRegime::linear: raw = 0.1L * pp; break;
    case SparsityRegime::fractional: raw = 0.5L * std::pow(pp, 0.75L); break;
  }
  if (!std::isfinite(raw) || raw < 1) return 1;
  return std::min<Index>(p, static_cast<Index>(round_half_up(raw)));
}

Index n_from_theta(Real theta, Index k, Index p) {
  if (!(theta > 0) || !std::isfinite(theta)) throw InputError("n_from_theta: theta must be > 0");
  if (k < 1 || p <= k) throw InputError("n_from_theta: need 1 <= k < p");
  const Real target = 4 * theta * static_cast<Real>(k) * std::log(static_cast<Real>(p - k));
  auto ok = [&](Index n) {
    const Real nn = static_cast<Real>(n);
    return nn / std::log(nn) >= target;
  };
  Index lo = 8;
  if (ok(lo)) return lo;
  Index hi = 16;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {  // invariant: !ok(lo), ok(hi)
    const Index mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

Index InstanceSpec::resolved_k() const { return k ? *k : k_from_regime(regime, p); }

Index InstanceSpec::resolved_s() const { return s ? *s : n / 2; }

ProblemInstance gen_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.n < 1 || spec.p < 1) throw InputError("gen_instance: need n >= 1 and p >= 1");
  if (!(spec.sigma >= 0) || !std::isfinite(spec.sigma)) {
    throw InputError("gen_instance: sigma must be finite and >= 0");
  }
  const Index n = spec.n;
  const Index p = spec.p;
  const Index k = spec.resolved_k();
  const Index s = spec.resolved_s();
  if (k < 0 || k > p) throw InputError("gen_instance: k must lie in [0, p]");
  if (s < 0 || s > n) throw InputError("gen_instance: s must lie in [0, n]");
  const CovarianceSpec cov = spec.covariance ? *spec.covariance : CovarianceSpec::identity(p);

  Matrix X = gen_design(n, p, cov, stream_seed(seed, Stream::design));
  SparseDraw beta = gen_sparse_vector(p, k, {1, spec.beta_floor}, stream_seed(seed, Stream::beta));
  SparseDraw err = gen_sparse_vector(n, s, {spec.gross_scale, spec.e_floor},
                                     stream_seed(seed, Stream::error));
  Vector w = Vector::Zero(n);
  if (spec.sigma > 0) {
    std::mt19937_64 rng(stream_seed(seed, Stream::noise));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) w(i) = spec.sigma * static_cast<Real>(normal(rng));
  }

  const Real sqrt_n = std::sqrt(static_cast<Real>(n));
  const Vector clean = X * beta.values + w;
  Vector e_star = err.values;
  Vector y;
  if (spec.corruption == CorruptionMode::missing) {
    e_star.setZero();
    for (Index i : err.support) e_star(i) = -clean(i) / sqrt_n;
    y = clean + sqrt_n * e_star;
    for (Index i : err.support) y(i) = 0;
  } else {
    y = clean + sqrt_n * e_star;
  }

  GenerationMeta meta;
  meta.seed = seed;
  meta.covariance = cov;
  if (!spec.k) meta.regime = spec.regime;
  meta.corruption = spec.corruption;
  meta.gross_scale = spec.gross_scale;
  meta.beta_floor = spec.beta_floor;
  meta.e_floor = spec.e_floor;
  return ProblemInstance(std::move(X), std::move(y),
                         GroundTruth::from_vectors(std::move(beta.values), std::move(e_star),
                                                   std::move(w), spec.sigma),
                         std::move(meta));
}

}  // namespace rlasso
