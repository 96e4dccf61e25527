#include "rlasso/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rlasso {

const char* to_string(Algorithm algorithm) {
  return algorithm == Algorithm::block_coordinate ? "block-coordinate" : "proximal-gradient";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "block-coordinate") return Algorithm::block_coordinate;
  if (name == "proximal-gradient") return Algorithm::proximal_gradient;
  throw InputError("unknown algorithm '" + name + "'");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw InputError("solver: max_iters must be >= 1");
  if (!(tol_kkt > 0) || !(tol_obj > 0)) throw InputError("solver: tolerances must be > 0");
  if (!(path_factor > 0 && path_factor < 1)) throw InputError("solver: path_factor must be in (0, 1)");
}

namespace {

constexpr std::size_t kInnerSweeps = 50;
constexpr std::size_t kStallWindow = 25;
constexpr Real kMonotoneSlack = 1e-12L;

struct RestrictedCore {
  Vector beta_T;
  Vector e_S;
  double condition_number = 1;
};

// Solves the KKT system restricted to beta supported on T and e on S with the
// given on-support subgradient signs. Works from y directly, so it needs no
// truth: beta_T = (A'A)^{-1} [A' y_{S^c} + sqrt(n) le X_{ST}' se - n lb sb],
// A = X_{S^c T}, and e_S = (y_S - X_{ST} beta_T) / sqrt(n) - le se.
RestrictedCore solve_restricted(const Matrix& X, const Vector& y, const IndexSet& T,
                                const IndexSet& S, Real lb, Real le, std::span<const int> sb,
                                std::span<const int> se) {
  const Index n = X.rows();
  const Real sqrt_n = std::sqrt(static_cast<Real>(n));
  const Index k = static_cast<Index>(T.size());
  const Index s = static_cast<Index>(S.size());
  RestrictedCore out;
  Vector sign_e(s);
  for (Index i = 0; i < s; ++i) sign_e(i) = se[static_cast<std::size_t>(i)];

  if (k == 0) {
    out.beta_T.resize(0);
    out.e_S = y(S) / sqrt_n - le * sign_e;
    return out;
  }
  if (n - s < k) {
    throw SingularityError("X_{S^c T} has fewer rows (" + std::to_string(n - s) +
                               ") than columns (" + std::to_string(k) + "); condition number inf",
                           std::numeric_limits<double>::infinity());
  }
  const IndexSet Sc = complement(S, n);
  const Matrix A = X(Sc, T);
  const Matrix G = A.transpose() * A;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const Real lo = eig.eigenvalues().minCoeff();
  const Real hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0 ? static_cast<double>(std::sqrt(hi / lo))
                             : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxRestrictedCondition)) {
    throw SingularityError("X_{S^c T} is rank deficient: condition number " + std::to_string(cond),
                           cond);
  }
  out.condition_number = cond;

  Vector sign_beta(k);
  for (Index j = 0; j < k; ++j) sign_beta(j) = sb[static_cast<std::size_t>(j)];
  const Real nn = static_cast<Real>(n);
  Vector rhs = A.transpose() * y(Sc) - nn * lb * sign_beta;
  if (s > 0) {
    const Matrix XST = X(S, T);
    rhs += sqrt_n * le * (XST.transpose() * sign_e);
  }
  Eigen::LLT<Matrix> llt(G);
  Vector x = llt.solve(rhs);
  x += llt.solve(rhs - G * x);  // one step of iterative refinement
  out.beta_T = std::move(x);
  if (s > 0) {
    out.e_S = (y(S) - X(S, T) * out.beta_T) / sqrt_n - le * sign_e;
  } else {
    out.e_S.resize(0);
  }
  return out;
}

// Block-coordinate engine shared by the extended and the standard Lasso. The
// e-block, when present, is minimized exactly by soft-thresholding r / sqrt(n).
class CoordinateEngine {
 public:
  CoordinateEngine(const Matrix& X, const Vector& y, bool with_e)
      : X_(X), y_(y), n_(X.rows()), p_(X.cols()), with_e_(with_e) {
    nn_ = static_cast<Real>(n_);
    sqrt_n_ = std::sqrt(nn_);
    col_sq_.resize(p_);
    for (Index j = 0; j < p_; ++j) col_sq_(j) = X_.col(j).squaredNorm() / nn_;
    beta_ = Vector::Zero(p_);
    e_ = Vector::Zero(n_);
    all_.resize(static_cast<std::size_t>(p_));
    for (Index j = 0; j < p_; ++j) all_[static_cast<std::size_t>(j)] = j;
  }

  void set_iterate(const Vector& beta, const Vector& e) {
    beta_ = beta;
    e_ = with_e_ ? e : Vector::Zero(n_);
  }
  const Vector& beta() const { return beta_; }
  const Vector& e() const { return e_; }

  // Null-model penalty scale: at or above it, (0, 0) is optimal.
  Real null_scale(Real lb, Real le) const {
    Real t = (X_.transpose() * y_).cwiseAbs().maxCoeff() / (nn_ * lb);
    if (with_e_) t = std::max(t, y_.cwiseAbs().maxCoeff() / (sqrt_n_ * le));
    return t;
  }

  struct StageResult {
    bool converged = false;
    Real kkt = 0;
    Real objective = 0;
  };

  StageResult run_stage(Real lb, Real le, Real tol, std::size_t max_iters, Real tol_obj,
                        std::size_t& iters) {
    lb_ = lb;
    le_ = le;
    recompute_residual();
    Real obj = objective();
    StageResult result;
    std::size_t stall_count = 0;
    Real stall_kkt = std::numeric_limits<Real>::infinity();

    while (true) {
      // A certified warm start needs no sweeps at all.
      Real kkt = kkt_residual();
      if (kkt <= tol) return finish(result, true, kkt);
      if (try_polish(tol)) return finish(result, true, last_polish_kkt_);
      if (iters >= max_iters) return finish(result, false, kkt);

      const Real pass_start = obj;
      sweep(all_);
      if (with_e_) e_step();
      ++iters;
      recompute_residual();
      obj = check_monotone(obj);

      std::vector<Index> active;
      for (Index j = 0; j < p_; ++j) {
        if (beta_(j) != 0) active.push_back(j);
      }
      for (std::size_t inner = 0; inner < kInnerSweeps && iters < max_iters; ++inner) {
        Real change = sweep(active);
        if (with_e_) change = std::max(change, e_step());
        ++iters;
        obj = check_monotone(obj);
        const Real scale = 1 + std::max(beta_.cwiseAbs().maxCoeff(),
                                        with_e_ ? e_.cwiseAbs().maxCoeff() : Real(0));
        if (change <= 1e-15L * scale) break;
      }

      const Real rel_drop = (pass_start - obj) / std::max(std::abs(obj), Real(1e-300L));
      if (rel_drop < tol_obj) {
        if (++stall_count >= kStallWindow) {
          const Real now = kkt_residual();
          if (now <= tol) return finish(result, true, now);
          if (!(now < 0.5L * stall_kkt)) return finish(result, false, now);
          stall_kkt = now;
          stall_count = 0;
        }
      } else {
        stall_count = 0;
        stall_kkt = std::numeric_limits<Real>::infinity();
      }
    }
  }

  Real objective() const {
    Real obj = r_.squaredNorm() / (2 * nn_) + lb_ * beta_.lpNorm<1>();
    if (with_e_) obj += le_ * e_.lpNorm<1>();
    if (!std::isfinite(obj)) throw NumericError("solver: objective became non-finite");
    return obj;
  }

  Real kkt_residual() const {
    const Vector g = X_.transpose() * r_ / (nn_ * lb_);
    Real worst = 0;
    for (Index j = 0; j < p_; ++j) worst = std::max(worst, violation(g(j), beta_(j)));
    if (with_e_) {
      const Real scale = sqrt_n_ * le_;
      for (Index i = 0; i < n_; ++i) worst = std::max(worst, violation(r_(i) / scale, e_(i)));
    }
    if (!std::isfinite(worst)) throw NumericError("solver: KKT residual became non-finite");
    return worst;
  }

 private:
  static Real violation(Real z, Real coef) {
    if (coef > 0) return std::abs(z - 1);
    if (coef < 0) return std::abs(z + 1);
    return std::max(Real(0), std::abs(z) - 1);
  }

  StageResult& finish(StageResult& result, bool converged, Real kkt) {
    recompute_residual();
    result.converged = converged;
    result.kkt = kkt;
    result.objective = objective();
    return result;
  }

  void recompute_residual() {
    r_ = y_ - X_ * beta_;
    if (with_e_) r_ -= sqrt_n_ * e_;
  }

  Real check_monotone(Real previous) {
    const Real now = objective();
    if (now > previous + kMonotoneSlack * std::max(std::abs(previous), Real(1e-300L))) {
      throw NumericError("solver: objective increased during block-coordinate sweep");
    }
    return now;
  }

  // Cyclic pass over coords in ascending order; returns the largest scaled change.
  Real sweep(const std::vector<Index>& coords) {
    Real largest = 0;
    Real* r = r_.data();
    for (Index j : coords) {
      const Real cs = col_sq_(j);
      if (cs == 0) {
        beta_(j) = 0;
        continue;
      }
      const Real* col = X_.col(j).data();
      Real dot = 0;
      for (Index i = 0; i < n_; ++i) dot += col[i] * r[i];
      const Real old = beta_(j);
      const Real updated = soft_threshold(dot / nn_ + cs * old, lb_) / cs;
      const Real delta = updated - old;
      if (delta != 0) {
        for (Index i = 0; i < n_; ++i) r[i] -= col[i] * delta;
        beta_(j) = updated;
        largest = std::max(largest, std::abs(delta) * std::sqrt(cs));
      }
    }
    return largest;
  }

  // Exact minimization over e for the current beta.
  Real e_step() {
    Real largest = 0;
    for (Index i = 0; i < n_; ++i) {
      const Real fitted = r_(i) + sqrt_n_ * e_(i);  // y_i - X_i beta
      const Real updated = soft_threshold(fitted / sqrt_n_, le_);
      largest = std::max(largest, std::abs(updated - e_(i)));
      e_(i) = updated;
      r_(i) = fitted - sqrt_n_ * updated;
    }
    return largest;
  }

  // Replaces the iterate by the closed-form stationary point on its current
  // signed support when that point satisfies the full KKT system.
  bool try_polish(Real tol) {
    IndexSet T;
    std::vector<int> sb;
    for (Index j = 0; j < p_; ++j) {
      if (beta_(j) != 0) {
        T.push_back(j);
        sb.push_back(sign_of(beta_(j)));
      }
    }
    IndexSet S;
    std::vector<int> se;
    if (with_e_) {
      for (Index i = 0; i < n_; ++i) {
        if (e_(i) != 0) {
          S.push_back(i);
          se.push_back(sign_of(e_(i)));
        }
      }
    }
    if (T.empty() && S.empty()) return false;
    if (static_cast<Index>(T.size()) + static_cast<Index>(S.size()) > n_) return false;

    RestrictedCore core;
    try {
      core = solve_restricted(X_, y_, T, S, lb_, le_, sb, se);
    } catch (const SingularityError&) {
      return false;
    }
    const Vector saved_beta = beta_;
    const Vector saved_e = e_;
    const Vector saved_r = r_;
    beta_.setZero();
    for (std::size_t j = 0; j < T.size(); ++j) beta_(T[j]) = core.beta_T(static_cast<Index>(j));
    if (with_e_) {
      e_.setZero();
      for (std::size_t i = 0; i < S.size(); ++i) e_(S[i]) = core.e_S(static_cast<Index>(i));
    }
    recompute_residual();
    const Real kkt = kkt_residual();
    if (kkt <= tol) {
      last_polish_kkt_ = kkt;
      return true;
    }
    beta_ = saved_beta;
    e_ = saved_e;
    r_ = saved_r;
    return false;
  }

  const Matrix& X_;
  const Vector& y_;
  Index n_;
  Index p_;
  bool with_e_;
  Real nn_ = 1;
  Real sqrt_n_ = 1;
  Vector col_sq_;
  Vector beta_;
  Vector e_;
  Vector r_;
  Real lb_ = 1;
  Real le_ = 1;
  Real last_polish_kkt_ = 0;
  std::vector<Index> all_;
};

void check_penalties(Real lb, Real le, bool with_e) {
  if (!(lb > 0) || !std::isfinite(lb)) throw InputError("solver: lambda_beta must be > 0");
  if (with_e && (!(le > 0) || !std::isfinite(le))) throw InputError("solver: lambda_e must be > 0");
}

// Runs the continuation path (or a single stage) on an engine.
template <class Record>
bool run_path(CoordinateEngine& engine, Real lb, Real le, const SolverConfig& config,
              bool warm_path, std::size_t& iters, Real& kkt, Real& obj, Record&& record) {
  if (warm_path) {
    const Real t_max = engine.null_scale(lb, le);
    if (t_max > 1) {
      std::vector<Real> scales;
      for (Real t = t_max * config.path_factor; t > 1; t *= config.path_factor) scales.push_back(t);
      const Real stage_tol = std::max(config.tol_kkt, Real(1e-6L));
      for (Real t : scales) {
        auto stage = engine.run_stage(t * lb, t * le, stage_tol, config.max_iters, config.tol_obj, iters);
        record(t, iters, stage.objective, stage.kkt);
      }
    }
  }
  auto stage = engine.run_stage(lb, le, config.tol_kkt, config.max_iters, config.tol_obj, iters);
  record(Real(1), iters, stage.objective, stage.kkt);
  kkt = stage.kkt;
  obj = stage.objective;
  return stage.converged;
}

Real power_norm_sq(const Matrix& X) {
  // Largest eigenvalue of X'X by power iteration, padded upward.
  Vector v = Vector::Ones(X.cols()) / std::sqrt(static_cast<Real>(X.cols()));
  Real est = 0;
  for (int it = 0; it < 200; ++it) {
    Vector u = X.transpose() * (X * v);
    const Real norm = u.norm();
    if (norm == 0) return 0;
    v = u / norm;
    if (std::abs(norm - est) <= 1e-14L * norm) {
      est = norm;
      break;
    }
    est = norm;
  }
  return est * 1.01L;
}

Real full_kkt(const Matrix& X, const Vector& r, const Vector& beta, const Vector& e, Real lb,
              Real le) {
  const Real nn = static_cast<Real>(X.rows());
  const Real sqrt_n = std::sqrt(nn);
  const Vector zb = X.transpose() * r / (nn * lb);
  Real worst = 0;
  auto viol = [](Real z, Real c) {
    if (c > 0) return std::abs(z - 1);
    if (c < 0) return std::abs(z + 1);
    return std::max(Real(0), std::abs(z) - 1);
  };
  for (Index j = 0; j < beta.size(); ++j) worst = std::max(worst, viol(zb(j), beta(j)));
  for (Index i = 0; i < e.size(); ++i) worst = std::max(worst, viol(r(i) / (sqrt_n * le), e(i)));
  return worst;
}

// FISTA with adaptive restart on the augmented design [X, sqrt(n) I].
Solution solve_proximal(const ProblemInstance& instance, Real lb, Real le, const SolverConfig& config,
                        Vector beta, Vector e) {
  const Matrix& X = instance.X();
  const Vector& y = instance.y();
  const Real nn = static_cast<Real>(instance.n());
  const Real sqrt_n = instance.sqrt_n();
  const Real L = (power_norm_sq(X) + nn) / nn;
  const Real step = 1 / L;

  Vector beta_prev = beta;
  Vector e_prev = e;
  Vector vb = beta;
  Vector ve = e;
  Real momentum = 1;
  Real prev_obj = objective_value(instance, beta, e, lb, le);
  Solution sol;
  std::size_t it = 0;
  Real kkt = std::numeric_limits<Real>::infinity();
  for (; it < config.max_iters; ++it) {
    const Vector r = y - X * vb - sqrt_n * ve;
    const Vector gb = -(X.transpose() * r) / nn;
    const Vector ge = -r / sqrt_n;
    beta_prev = beta;
    e_prev = e;
    beta = (vb - step * gb).unaryExpr([&](Real v) { return soft_threshold(v, step * lb); });
    e = (ve - step * ge).unaryExpr([&](Real v) { return soft_threshold(v, step * le); });
    const Real obj = objective_value(instance, beta, e, lb, le);
    if (!std::isfinite(obj)) throw NumericError("proximal gradient: objective became non-finite");
    if (obj > prev_obj) {
      momentum = 1;  // restart
      vb = beta;
      ve = e;
    } else {
      const Real next = (1 + std::sqrt(1 + 4 * momentum * momentum)) / 2;
      const Real w = (momentum - 1) / next;
      vb = beta + w * (beta - beta_prev);
      ve = e + w * (e - e_prev);
      momentum = next;
    }
    prev_obj = obj;
    if (it % 10 == 9) {
      kkt = full_kkt(X, residual(instance, beta, e), beta, e, lb, le);
      if (kkt <= config.tol_kkt) {
        ++it;
        break;
      }
    }
  }
  kkt = full_kkt(X, residual(instance, beta, e), beta, e, lb, le);
  sol.beta_hat = std::move(beta);
  sol.e_hat = std::move(e);
  sol.lambda_beta = lb;
  sol.lambda_e = le;
  sol.objective = objective_value(instance, sol.beta_hat, sol.e_hat, lb, le);
  sol.iterations = it;
  sol.kkt_residual = kkt;
  sol.converged = kkt <= config.tol_kkt;
  sol.algorithm = to_string(Algorithm::proximal_gradient);
  sol.trace.push_back({1, it, sol.objective, kkt});
  return sol;
}

Solution solve_impl(const ProblemInstance& instance, Real lb, Real le, const SolverConfig& config,
                    const Vector& beta0, const Vector& e0, bool warm_path) {
  config.validate();
  check_penalties(lb, le, true);
  if (beta0.size() != instance.p() || e0.size() != instance.n()) {
    throw InputError("solver: warm start has wrong dimensions");
  }
  if (config.algorithm == Algorithm::proximal_gradient) {
    return solve_proximal(instance, lb, le, config, beta0, e0);
  }
  CoordinateEngine engine(instance.X(), instance.y(), true);
  engine.set_iterate(beta0, e0);
  Solution sol;
  std::size_t iters = 0;
  Real kkt = 0;
  Real obj = 0;
  sol.converged = run_path(engine, lb, le, config, warm_path, iters, kkt, obj,
                           [&](Real t, std::size_t it, Real o, Real k) {
                             sol.trace.push_back({t, it, o, k});
                           });
  sol.beta_hat = engine.beta();
  sol.e_hat = engine.e();
  sol.lambda_beta = lb;
  sol.lambda_e = le;
  sol.objective = obj;
  sol.iterations = iters;
  sol.kkt_residual = kkt;
  sol.algorithm = to_string(Algorithm::block_coordinate);
  return sol;
}

}  // namespace

Solution solve_extended_lasso(const ProblemInstance& instance, Real lambda_beta, Real lambda_e,
                              const SolverConfig& config) {
  return solve_impl(instance, lambda_beta, lambda_e, config, Vector::Zero(instance.p()),
                    Vector::Zero(instance.n()), config.warm_path);
}

Solution solve_extended_lasso(const ProblemInstance& instance, Real lambda_beta, Real lambda_e,
                              const SolverConfig& config, const Vector& beta0, const Vector& e0) {
  return solve_impl(instance, lambda_beta, lambda_e, config, beta0, e0, false);
}

LassoFit solve_standard_lasso(const Matrix& X, const Vector& y, Real lambda_beta,
                              const SolverConfig& config) {
  config.validate();
  check_penalties(lambda_beta, 0, false);
  if (y.size() != X.rows()) throw InputError("standard lasso: y length must equal rows of X");
  if (!X.allFinite() || !y.allFinite()) throw NumericError("standard lasso: non-finite input");
  CoordinateEngine engine(X, y, false);
  LassoFit fit;
  Real kkt = 0;
  Real obj = 0;
  fit.converged = run_path(engine, lambda_beta, 1, config, config.warm_path, fit.iterations, kkt,
                           obj, [](Real, std::size_t, Real, Real) {});
  fit.beta = engine.beta();
  fit.kkt_residual = kkt;
  return fit;
}

RestrictedSolution restricted_solution(const ProblemInstance& instance, const IndexSet& T,
                                       const IndexSet& S, Real lambda_beta, Real lambda_e,
                                       std::span<const int> sign_beta, std::span<const int> sign_e,
                                       const std::optional<Anchors>& anchors) {
  check_index_set(T, instance.p(), "restricted_solution T");
  check_index_set(S, instance.n(), "restricted_solution S");
  if (sign_beta.size() != T.size() || sign_e.size() != S.size()) {
    throw InputError("restricted_solution: sign vectors must match |T| and |S|");
  }
  if (!(lambda_beta >= 0) || !(lambda_e >= 0)) {
    throw InputError("restricted_solution: penalties must be non-negative");
  }
  Vector anchor_beta = Vector::Zero(instance.p());
  Vector anchor_e = Vector::Zero(instance.n());
  if (anchors) {
    if (anchors->beta.size() != instance.p() || anchors->e.size() != instance.n()) {
      throw InputError("restricted_solution: anchors have wrong dimensions");
    }
    anchor_beta = anchors->beta;
    anchor_e = anchors->e;
  } else if (instance.truth()) {
    anchor_beta = instance.truth()->beta_star;
    anchor_e = instance.truth()->e_star;
  }
  // With the anchor as reference the driver is y - X beta~ - sqrt(n) e~ (= w for the truth),
  // and the same closed form then yields the offsets h_T and g_S.
  const Vector driver = residual(instance, anchor_beta, anchor_e);
  const RestrictedCore core =
      solve_restricted(instance.X(), driver, T, S, lambda_beta, lambda_e, sign_beta, sign_e);
  RestrictedSolution out;
  out.condition_number = core.condition_number;
  out.h_T = core.beta_T;
  out.g_S = core.e_S;
  out.beta_hat = anchor_beta;
  out.e_hat = anchor_e;
  out.beta_hat(T) += core.beta_T;
  out.e_hat(S) += core.e_S;
  return out;
}

}  // namespace rlasso
