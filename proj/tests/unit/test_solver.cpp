#include "oracles.hpp"

#include "rlasso/datagen.hpp"
#include "rlasso/diagnostics.hpp"
#include "rlasso/regparams.hpp"
#include "rlasso/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace rlasso;

namespace {

ProblemInstance orthogonal_instance(const Vector& beta_star) {
  const Index n = beta_star.size();
  const Matrix X = std::sqrt(static_cast<Real>(n)) * Matrix::Identity(n, n);
  GroundTruth t = GroundTruth::from_vectors(beta_star, Vector::Zero(n), Vector::Zero(n), 0);
  return ProblemInstance(X, X * beta_star, t);
}

ProblemInstance small_instance(Index n, Index p, Index k, Index s, Real sigma, std::uint64_t seed) {
  InstanceSpec spec;
  spec.n = n;
  spec.p = p;
  spec.k = k;
  spec.s = s;
  spec.sigma = sigma;
  return gen_instance(spec, seed);
}

std::vector<int> signs_on(const Vector& x, const IndexSet& set) {
  std::vector<int> out;
  for (Index i : set) out.push_back(sign_of(x(i)));
  return out;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("orthogonal design soft-thresholds each coordinate") {
  const Index n = 3;
  const Matrix X = std::sqrt(3.0L) * Matrix::Identity(n, n);
  Vector y(3);
  y << 2, 0.3L, -1;
  y *= std::sqrt(3.0L);
  const LassoFit fit = solve_standard_lasso(X, y, 0.5L);
  CHECK(fit.converged);
  CHECK(std::abs(static_cast<double>(fit.beta(0)) - 1.5) <= 1e-12);
  CHECK(fit.beta(1) == 0);
  CHECK(std::abs(static_cast<double>(fit.beta(2)) + 0.5) <= 1e-12);

  const ProblemInstance inst(X, y);
  const Solution sol = solve_extended_lasso(inst, 0.5L, 100);
  CHECK(sol.converged);
  CHECK(sol.e_hat.isZero());
  CHECK(static_cast<double>((sol.beta_hat - fit.beta).cwiseAbs().maxCoeff()) <= 1e-12);
}

TEST_CASE("penalty above the null threshold gives the zero fit") {
  const ProblemInstance inst = small_instance(30, 12, 3, 0, 0.1L, 4);
  const Real lmax = (inst.X().transpose() * inst.y()).cwiseAbs().maxCoeff() / inst.n();
  const LassoFit fit = solve_standard_lasso(inst.X(), inst.y(), lmax * 1.0001L);
  CHECK(fit.beta.isZero());
  CHECK(fit.iterations <= 2);
  CHECK_FALSE(solve_standard_lasso(inst.X(), inst.y(), lmax * 0.9L).beta.isZero());
}

TEST_CASE("noiseless orthogonal recovery with tiny penalties") {
  Vector beta_star(4);
  beta_star << 1.5L, -0.7L, 0, 2;
  const ProblemInstance inst = orthogonal_instance(beta_star);
  const Solution sol = solve_extended_lasso(inst, 1e-6L, 1e-6L);
  CHECK(sol.converged);
  CHECK(static_cast<double>((sol.beta_hat - beta_star).cwiseAbs().maxCoeff()) <= 1e-4);
}

TEST_CASE("extended Lasso matches the subgradient oracle") {
  const ProblemInstance inst = small_instance(40, 10, 3, 8, 0, 12);
  const Real lb = 0.02L, le = 0.01L;
  const Solution sol = solve_extended_lasso(inst, lb, le);
  REQUIRE(sol.converged);
  const oracle::Fit ref =
      oracle::subgradient_solve(inst.X().cast<double>(), inst.y().cast<double>(), 0.02, 0.01, 20000);
  const double ours = oracle::objective(inst.X().cast<double>(), inst.y().cast<double>(),
                                        sol.beta_hat.cast<double>(), sol.e_hat.cast<double>(), 0.02, 0.01);
  CHECK(rel_gap(ours, ref.objective) <= 1e-8);
  CHECK(ours <= ref.objective * (1 + 1e-12));

  const GroundTruth& t = inst.require_truth();
  if (extract_signed_support(sol.beta_hat) == extract_signed_support(t.beta_star, 0) &&
      extract_signed_support(sol.e_hat) == extract_signed_support(t.e_star, 0)) {
    const RestrictedSolution rs = restricted_solution(inst, t.T, t.S, lb, le, signs_on(t.beta_star, t.T),
                                                      signs_on(t.e_star, t.S));
    const double closed = oracle::objective(inst.X().cast<double>(), inst.y().cast<double>(),
                                            rs.beta_hat.cast<double>(), rs.e_hat.cast<double>(), 0.02, 0.01);
    CHECK(rel_gap(ours, closed) <= 1e-8);
  }
}

TEST_CASE("standard Lasso matches the subgradient oracle") {
  const ProblemInstance inst = small_instance(20, 8, 3, 0, 0.2L, 31);
  const LassoFit fit = solve_standard_lasso(inst.X(), inst.y(), 0.05L);
  REQUIRE(fit.converged);
  const oracle::Fit ref =
      oracle::subgradient_solve(inst.X().cast<double>(), inst.y().cast<double>(), 0.05, -1, 20000);
  const oracle::Vec zero = oracle::Vec::Zero(inst.n());
  const double ours = oracle::objective(inst.X().cast<double>(), inst.y().cast<double>(),
                                        fit.beta.cast<double>(), zero, 0.05, 0);
  CHECK(rel_gap(ours, ref.objective) <= 1e-8);
}

TEST_CASE("restricted solution with no drivers is exact") {
  const ProblemInstance inst = small_instance(30, 12, 3, 5, 0, 2);
  const GroundTruth& t = inst.require_truth();
  const RestrictedSolution rs = restricted_solution(inst, t.T, t.S, 0, 0, signs_on(t.beta_star, t.T),
                                                    signs_on(t.e_star, t.S));
  CHECK(static_cast<double>(rs.h_T.cwiseAbs().maxCoeff()) <= 1e-14);
  CHECK(static_cast<double>(rs.g_S.cwiseAbs().maxCoeff()) <= 1e-14);
  CHECK(static_cast<double>((rs.beta_hat - t.beta_star).cwiseAbs().maxCoeff()) <= 1e-14);
  CHECK(rs.condition_number >= 1);
}

TEST_CASE("restricted solution without corruption is the classical Lasso form") {
  const ProblemInstance inst = small_instance(30, 12, 3, 0, 0.1L, 6);
  const GroundTruth& t = inst.require_truth();
  const Real lb = 0.03L;
  const std::vector<int> sb = signs_on(t.beta_star, t.T);
  const RestrictedSolution rs = restricted_solution(inst, t.T, {}, lb, 123, sb, {});
  const oracle::Mat XT = inst.X()(Eigen::all, t.T).cast<double>();
  oracle::Vec rhs = XT.transpose() * t.w.cast<double>();
  for (std::size_t c = 0; c < sb.size(); ++c) rhs(c) -= 30 * 0.03 * sb[c];
  const oracle::Vec h = (XT.transpose() * XT).ldlt().solve(rhs);
  CHECK((rs.h_T.cast<double>() - h).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rs.g_S.size() == 0);
}

TEST_CASE("restricted solution matches the normal-equations oracle") {
  const ProblemInstance inst = small_instance(30, 10, 2, 5, 0.1L, 17);
  const GroundTruth& t = inst.require_truth();
  const std::vector<int> sb = signs_on(t.beta_star, t.T);
  const std::vector<int> se = signs_on(t.e_star, t.S);
  const RestrictedSolution rs = restricted_solution(inst, t.T, t.S, 0.04L, 0.02L, sb, se);
  oracle::Vec b, e;
  oracle::normal_equations(inst.X().cast<double>(), inst.y().cast<double>(), t.T, t.S, sb, se, 0.04,
                           0.02, b, e);
  for (std::size_t c = 0; c < t.T.size(); ++c) {
    CHECK(std::abs(static_cast<double>(rs.h_T(c)) - (b(t.T[c]) - static_cast<double>(t.beta_star(t.T[c])))) <=
          1e-10);
  }
  for (std::size_t c = 0; c < t.S.size(); ++c) {
    CHECK(std::abs(static_cast<double>(rs.g_S(c)) - (e(t.S[c]) - static_cast<double>(t.e_star(t.S[c])))) <=
          1e-10);
  }

  const Anchors zero{Vector::Zero(inst.p()), Vector::Zero(inst.n())};
  const RestrictedSolution direct = restricted_solution(inst, t.T, t.S, 0.04L, 0.02L, sb, se, zero);
  CHECK((direct.beta_hat.cast<double>() - b).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((direct.e_hat.cast<double>() - e).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("rank-deficient restricted systems are reported") {
  const ProblemInstance inst = small_instance(10, 12, 6, 5, 0.1L, 3);
  const GroundTruth& t = inst.require_truth();
  CHECK_THROWS_AS(restricted_solution(inst, t.T, t.S, 0.1L, 0.1L, signs_on(t.beta_star, t.T),
                                      signs_on(t.e_star, t.S)),
                  SingularityError);
  Matrix X = Matrix::Random(8, 3);
  X.col(2) = X.col(1);
  const ProblemInstance dup(X, Vector::Random(8));
  try {
    restricted_solution(dup, {1, 2}, {}, 0.1L, 0.1L, std::vector<int>{1, 1}, std::vector<int>{});
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(e.condition_number() > kMaxRestrictedCondition);
  }
  CHECK_THROWS_AS(restricted_solution(dup, {1}, {}, 0.1L, 0.1L, std::vector<int>{}, std::vector<int>{}),
                  InputError);
}

TEST_CASE("a dominant e-penalty reduces to the standard Lasso") {
  const ProblemInstance inst = small_instance(50, 20, 4, 0, 0.3L, 8);
  const LassoFit lasso = solve_standard_lasso(inst.X(), inst.y(), 0.05L);
  const Real le = inst.y().cwiseAbs().maxCoeff() / inst.sqrt_n() +
                  inst.X().cwiseAbs().maxCoeff() * lasso.beta.lpNorm<1>() + 1;
  const Solution sol = solve_extended_lasso(inst, 0.05L, le);
  CHECK(sol.converged);
  CHECK(sol.e_hat.isZero());
  CHECK(static_cast<double>((sol.beta_hat - lasso.beta).cwiseAbs().maxCoeff()) <= 1e-10);
}

TEST_CASE("correct signed supports imply the restricted closed form") {
  int matched = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ProblemInstance inst = small_instance(200, 40, 3, 20, 0.05L, 100 + seed);
    const LambdaPair l = lambdas_simulation(0.05L, 200, 40);
    const Solution sol = solve_extended_lasso(inst, l.beta, l.e);
    REQUIRE(sol.converged);
    const GroundTruth& t = inst.require_truth();
    if (!(extract_signed_support(sol.beta_hat) == extract_signed_support(t.beta_star, 0)) ||
        !(extract_signed_support(sol.e_hat) == extract_signed_support(t.e_star, 0))) {
      continue;
    }
    ++matched;
    const RestrictedSolution rs = restricted_solution(inst, t.T, t.S, l.beta, l.e,
                                                      signs_on(t.beta_star, t.T), signs_on(t.e_star, t.S));
    CHECK(static_cast<double>((sol.beta_hat - rs.beta_hat).cwiseAbs().maxCoeff()) <= 1e-8);
    CHECK(static_cast<double>((sol.e_hat - rs.e_hat).cwiseAbs().maxCoeff()) <= 1e-8);
  }
  CHECK(matched >= 1);
}

TEST_CASE("converged solutions are KKT certified and path independent") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ProblemInstance inst = small_instance(120, 60, 5, 30, 0.1L, 300 + seed);
    const LambdaPair l = lambdas_simulation(0.1L, 120, 60);
    const Solution path = solve_extended_lasso(inst, l.beta, l.e);
    REQUIRE(path.converged);
    CHECK(kkt_check(inst, path).stationarity_residual <= 1e-9L);
    CHECK(path.trace.size() >= 2);
    CHECK(path.trace.back().lambda_scale == 1);

    SolverConfig direct;
    direct.warm_path = false;
    const Solution cold = solve_extended_lasso(inst, l.beta, l.e, direct);
    REQUIRE(cold.converged);
    CHECK(static_cast<double>((cold.beta_hat - path.beta_hat).cwiseAbs().maxCoeff()) <= 1e-8);
    CHECK(static_cast<double>((cold.e_hat - path.e_hat).cwiseAbs().maxCoeff()) <= 1e-8);

    SolverConfig prox;
    prox.algorithm = Algorithm::proximal_gradient;
    prox.tol_kkt = 1e-7L;
    const Solution pg = solve_extended_lasso(inst, l.beta, l.e, prox);
    CHECK(pg.algorithm == "proximal-gradient");
    CHECK(rel_gap(static_cast<double>(pg.objective), static_cast<double>(path.objective)) <= 1e-8);
  }
}

TEST_CASE("warm starts and non-convergence reporting") {
  const ProblemInstance inst = small_instance(80, 30, 3, 20, 0.1L, 9);
  const Solution full = solve_extended_lasso(inst, 0.03L, 0.02L);
  const Solution again = solve_extended_lasso(inst, 0.03L, 0.02L, SolverConfig{}, full.beta_hat, full.e_hat);
  CHECK(again.converged);
  CHECK(again.iterations <= 2);
  SolverConfig tight;
  tight.max_iters = 1;
  tight.warm_path = false;
  const Solution cut = solve_extended_lasso(inst, 0.003L, 0.002L, tight);
  CHECK_FALSE(cut.converged);
  CHECK(cut.kkt_residual > tight.tol_kkt);
  CHECK_THROWS_AS(solve_extended_lasso(inst, 0, 0.1L), InputError);
  CHECK_THROWS_AS(solve_extended_lasso(inst, 0.1L, -1), InputError);
  SolverConfig bad;
  bad.tol_kkt = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(algorithm_from_string("block-coordinate") == Algorithm::block_coordinate);
  CHECK_THROWS_AS(algorithm_from_string("newton"), InputError);
}

TEST_CASE("signed-support recovery is invariant to the corruption scale") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    std::vector<std::pair<bool, bool>> flags;
    for (Real scale : {1.0L, 10.0L, 1000.0L}) {
      InstanceSpec spec;
      spec.n = 300;
      spec.p = 64;
      spec.k = 4;
      spec.s = 60;
      spec.sigma = 0;
      spec.gross_scale = scale;
      const ProblemInstance inst = gen_instance(spec, 40 + seed);
      const LambdaPair l = lambdas_simulation(5e-8L, 300, 64);
      const Solution sol = solve_extended_lasso(inst, l.beta, l.e);
      // At scale 1000 the residual carries |y| ~ 1e4 and the dual floor is ~1e-8.
      CHECK(sol.kkt_residual <= 1e-7L);
      const RecoveryMetrics m = recovery_metrics(inst, sol);
      flags.emplace_back(m.beta_sign_match, m.e_sign_match);
    }
    CHECK(flags[0] == flags[1]);
    CHECK(flags[0] == flags[2]);
  }
}
