#include "rlasso/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rlasso {

const char* to_string(ConeBlocks blocks) {
  switch (blocks) {
    case ConeBlocks::both: return "both";
    case ConeBlocks::h_only: return "h-only";
    case ConeBlocks::f_only: return "f-only";
  }
  return "?";
}

ReEstimate extended_re_estimate(const Matrix& X, const IndexSet& T, const IndexSet& S,
                                Real lambda_ratio, std::size_t num_samples, std::uint64_t seed,
                                ConeBlocks blocks) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (!(lambda_ratio > 0) || !std::isfinite(lambda_ratio)) {
    throw InputError("extended_re_estimate: lambda_ratio must be > 0");
  }
  check_index_set(T, p, "extended_re_estimate T");
  check_index_set(S, n, "extended_re_estimate S");
  const bool use_h = blocks != ConeBlocks::f_only;
  const bool use_f = blocks != ConeBlocks::h_only;
  if ((use_h ? T.size() : 0) + (use_f ? S.size() : 0) == 0) {
    throw InputError("extended_re_estimate: the sampled blocks have empty supports");
  }
  const IndexSet Tc = complement(T, p);
  const IndexSet Sc = complement(S, n);
  const Real sqrt_n = std::sqrt(static_cast<Real>(n));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double lam = static_cast<double>(lambda_ratio);
  auto fill = [&](Eigen::Ref<Eigen::VectorXd> v, const IndexSet& idx) {
    for (Index i : idx) v(i) = normal(rng);
  };

  ReEstimate out;
  out.num_samples = num_samples;
  out.sampling_spec = {lambda_ratio, seed, blocks};
  double best = std::numeric_limits<double>::infinity();

  // Samples are drawn one at a time in stream order and evaluated in batches.
  const Eigen::MatrixXd Xd = X.cast<double>();
  constexpr std::size_t kBatch = 256;
  Eigen::MatrixXd H(p, kBatch);
  Eigen::MatrixXd F(n, kBatch);
  Eigen::VectorXd h_off(p);
  Eigen::VectorXd f_off(n);
  for (std::size_t start = 0; start < num_samples; start += kBatch) {
    const std::size_t count = std::min(kBatch, num_samples - start);
    H.setZero();
    F.setZero();
    for (std::size_t b = 0; b < count; ++b) {
      auto h = H.col(static_cast<Index>(b));
      auto f = F.col(static_cast<Index>(b));
      if (use_h) fill(h, T);
      if (use_f) fill(f, S);
      double budget = 0;
      for (Index j : T) budget += 3 * std::abs(h(j));
      for (Index i : S) budget += 3 * lam * std::abs(f(i));
      h_off.setZero();
      f_off.setZero();
      if (use_h) fill(h_off, Tc);
      if (use_f) fill(f_off, Sc);
      const double cost = h_off.lpNorm<1>() + lam * f_off.lpNorm<1>();
      const double slack = uniform(rng);
      if (cost > 0) {
        const double scale = slack * budget / cost;
        h += scale * h_off;
        f += scale * f_off;
      }
    }
    const Eigen::MatrixXd image = Xd * H.leftCols(static_cast<Index>(count)) +
                                  static_cast<double>(sqrt_n) * F.leftCols(static_cast<Index>(count));
    for (std::size_t b = 0; b < count; ++b) {
      const Index c = static_cast<Index>(b);
      const double norm = H.col(c).norm() + F.col(c).norm();
      if (!(norm > 0)) continue;
      best = std::min(best, image.col(c).norm() / (static_cast<double>(sqrt_n) * norm));
    }
  }
  out.kappa_hat = best;
  if (!std::isfinite(out.kappa_hat)) out.kappa_hat = 0;
  return out;
}

}  // namespace rlasso
