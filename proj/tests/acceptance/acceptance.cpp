// End-to-end acceptance run. Prints one line per criterion and exits nonzero
// if any fails. Pass criterion numbers as arguments to run a subset.

#include "oracles.hpp"

#include "rlasso/curves.hpp"
#include "rlasso/diagnostics.hpp"
#include "rlasso/experiments.hpp"
#include "rlasso/regparams.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace rlasso;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<int> signs_on(const Vector& x, const IndexSet& support) {
  std::vector<int> out;
  for (Index i : support) out.push_back(x(i) > 0 ? 1 : -1);
  return out;
}

// Per-trial record of the noiseless recovery run, shared by criteria 1, 3 and 4.
struct NoiselessTrial {
  bool converged = false;
  bool success = false;
  bool error = false;
  KktReport kkt;
  Real l2_error = 0;
  Real oracle_gap = -1;  // linf distance to the restricted closed form, successes only
};

struct NoiselessRun {
  std::vector<NoiselessTrial> trials;
  double solve_seconds = 0;
};

SweepConfig noiseless_config() {
  SweepConfig c;
  c.p_list = {128};
  c.regimes = {SparsityRegime::sublinear};
  c.theta_grid = {2.0L};
  c.sigma = 0;
  c.workers = 1;
  return c;
}

const NoiselessRun& noiseless_run() {
  static const NoiselessRun run = [] {
    NoiselessRun out;
    const SweepConfig config = noiseless_config();
    const SweepCell cell = plan_sweep(config).front();
    const InstanceSpec spec = trial_instance_spec(config, cell);
    std::fprintf(stderr, "noiseless run: n=%ld p=%ld k=%ld s=%ld lambda=(%.3Le, %.3Le)\n",
                 static_cast<long>(cell.n), static_cast<long>(cell.p), static_cast<long>(cell.k),
                 static_cast<long>(cell.s), cell.lambda_beta, cell.lambda_e);
    for (std::size_t t = 0; t < config.trials; ++t) {
      NoiselessTrial rec;
      const std::uint64_t seed = trial_seed(config.master_seed, cell.p, cell.regime, cell.theta, t);
      const ProblemInstance inst = gen_instance(spec, seed);
      try {
        const auto start = Clock::now();
        const Solution sol = solve_extended_lasso(inst, cell.lambda_beta, cell.lambda_e, config.solver);
        out.solve_seconds += seconds_since(start);
        rec.converged = sol.converged;
        rec.kkt = kkt_check(inst, sol, config.solver.tol_kkt);
        const RecoveryMetrics m = recovery_metrics(inst, sol, config.zero_tol);
        rec.success = sol.converged && m.both_match();
        rec.l2_error = m.combined_l2();
        if (rec.success) {
          const GroundTruth& truth = inst.require_truth();
          const RestrictedSolution closed =
              restricted_solution(inst, truth.T, truth.S, cell.lambda_beta, cell.lambda_e,
                                  signs_on(truth.beta_star, truth.T), signs_on(truth.e_star, truth.S));
          rec.oracle_gap = std::max((closed.beta_hat - sol.beta_hat).cwiseAbs().maxCoeff(),
                                    (closed.e_hat - sol.e_hat).cwiseAbs().maxCoeff());
        }
      } catch (const Error& err) {
        std::fprintf(stderr, "noiseless trial %zu raised: %s\n", t, err.what());
        rec.error = true;
      }
      out.trials.push_back(rec);
    }
    return out;
  }();
  return run;
}

SweepConfig transition_config(std::size_t workers) {
  SweepConfig c;
  c.p_list = {128};
  c.regimes = {SparsityRegime::sublinear};
  c.sigma = 0.1L;
  c.workers = workers;
  return c;
}

const SweepResult& transition_run() {
  static const SweepResult result = [] {
    const auto start = Clock::now();
    SweepResult r = run_sweep(transition_config(1));
    std::fprintf(stderr, "transition sweep (1 worker): %.1f s\n", seconds_since(start));
    return r;
  }();
  return result;
}

std::string csv_of(const SweepResult& result) {
  std::string out;
  for (const Curve& curve : curves_from_result(result)) out += curve_to_csv(curve);
  return out;
}

const SweepCell* cell_at(const SweepResult& r, Real theta) {
  for (const SweepCell& c : r.cells) {
    if (std::abs(c.theta - theta) < 1e-9L) return &c;
  }
  return nullptr;
}

Verdict criterion1() {
  const NoiselessRun& run = noiseless_run();
  std::size_t successes = 0;
  Real worst = 0;
  for (const NoiselessTrial& t : run.trials) {
    if (!t.success) continue;
    ++successes;
    worst = std::max(worst, t.l2_error);
  }
  const bool pass = successes >= 95 && worst <= 1e-6L && run.solve_seconds <= 300;
  return {pass, fmt("successes %zu/100 (need >= 95), max ||h||+||f|| on successes %.3Le (need <= 1e-6), "
                    "solve time %.1f s (need <= 300)",
                    successes, worst, run.solve_seconds)};
}

Verdict criterion2() {
  const SweepResult& r = transition_run();
  const SweepCell* high = cell_at(r, 2.0L);
  const SweepCell* low = cell_at(r, 0.1L);
  if (!high || !low) return {false, "theta grid lacks 0.1 or 2.0"};
  const auto rate = [](const SweepCell& c) {
    return static_cast<double>(c.successes_beta_and_e) / static_cast<double>(c.trials);
  };
  std::vector<double> rates;
  std::optional<double> crossing;
  for (const SweepCell& c : r.cells) {
    rates.push_back(rate(c));
    if (!crossing && rate(c) >= 0.5) crossing = static_cast<double>(c.theta);
  }
  const double residual = isotonic_max_residual(rates);
  const bool located = crossing && *crossing >= 0.25 && *crossing <= 0.75;
  const bool pass = rate(*high) >= 0.9 && rate(*low) <= 0.1 && residual <= 0.15 && located;
  std::string where = crossing ? fmt("%.1f", *crossing) : std::string("never");
  return {pass, fmt("rate %.2f at theta=2.0 (need >= 0.9), %.2f at theta=0.1 (need <= 0.1), isotonic "
                    "residual %.3f (need <= 0.15), first theta with rate >= 0.5: %s (need 0.5 +/- 0.25)",
                    rate(*high), rate(*low), residual, where.c_str())};
}

Verdict criterion3() {
  const NoiselessRun& run = noiseless_run();
  std::size_t converged = 0, failures = 0, errors = 0;
  Real worst = 0;
  for (const NoiselessTrial& t : run.trials) {
    if (t.error) {
      ++errors;
      continue;
    }
    if (!t.converged) continue;
    ++converged;
    worst = std::max(worst, t.kkt.stationarity_residual);
    if (!(t.kkt.stationarity_residual <= 1e-9L && t.kkt.max_offsupport_zbeta < 1 &&
          t.kkt.max_offsupport_ze < 1 && t.kkt.certified())) {
      ++failures;
    }
  }
  const SweepResult& r = transition_run();
  std::size_t sweep_converged = 0;
  Real sweep_worst = 0;
  for (const SweepCell& c : r.cells) {
    failures += c.kkt_failures;
    errors += c.errors;
    sweep_converged += c.trials - c.nonconverged;
    sweep_worst = std::max(sweep_worst, c.max_kkt_residual);
  }
  const bool pass = failures == 0 && errors == 0 && worst <= 1e-9L && sweep_worst <= 1e-9L;
  return {pass, fmt("%zu converged runs checked, %zu kkt failures, %zu exceptions, max stationarity %.2Le",
                    converged + sweep_converged, failures, errors, std::max(worst, sweep_worst))};
}

Verdict criterion4() {
  const NoiselessRun& run = noiseless_run();
  std::size_t checked = 0, mismatches = 0;
  Real worst = 0;
  for (const NoiselessTrial& t : run.trials) {
    if (!t.success) continue;
    ++checked;
    worst = std::max(worst, t.oracle_gap);
    if (!(t.oracle_gap <= 1e-8L)) ++mismatches;
  }
  return {checked > 0 && mismatches == 0,
          fmt("%zu successes compared, %zu beyond 1e-8, max linf gap %.2Le", checked, mismatches, worst)};
}

Verdict criterion5() {
  std::size_t violations = 0, skipped = 0;
  Real worst_ratio = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    InstanceSpec spec;
    spec.n = 400;
    spec.p = 100;
    spec.k = 5;
    spec.s = 40;
    spec.sigma = 0.1L;
    const ProblemInstance inst = gen_instance(spec, derive_seed(500, t, 0));
    const GroundTruth& truth = inst.require_truth();
    const LambdaPair lambdas = lambdas_theorem1(inst, 1);
    const Solution sol = solve_extended_lasso(inst, lambdas.beta, lambdas.e);
    const Real error = recovery_metrics(inst, sol).combined_l2();
    const ReEstimate re =
        extended_re_estimate(inst.X(), truth.T, truth.S, lambdas.ratio(), 10000, derive_seed(77, t, 0));
    if (!(re.kappa_hat > 0)) {
      ++skipped;
      continue;
    }
    const Real kappa = 0.5L * re.kappa_hat;
    const Real bound = 3 / (kappa * kappa) *
                       (lambdas.beta * std::sqrt(Real(5)) + lambdas.e * std::sqrt(Real(40)));
    worst_ratio = std::max(worst_ratio, error / bound);
    if (error > bound) ++violations;
  }
  return {violations == 0 && skipped == 0,
          fmt("%zu violations over 100 instances, %zu with kappa_hat = 0, max error/bound %.3Lf", violations,
              skipped, worst_ratio)};
}

Verdict criterion6() {
  const auto start = Clock::now();
  const ErrorScalingResult r = error_scaling_sweep(ErrorScalingConfig{});
  const double elapsed = seconds_since(start);
  const double slope = static_cast<double>(r.fit.slope);
  const bool pass = std::abs(slope + 0.5) <= 0.1 && elapsed <= 600;
  return {pass, fmt("log-log slope %.3f (need -0.5 +/- 0.1), runtime %.1f s (need <= 600)", slope, elapsed)};
}

Verdict criterion7() {
  const Index p = 128, k = 8;
  const Index n = n_from_theta(0.1L, k, p);
  const Index s = n / 2;
  const LambdaPair lambdas = lambdas_simulation(0.1L, n, p);
  std::size_t failures = 0, singular = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    InstanceSpec spec;
    spec.n = n;
    spec.p = p;
    spec.k = k;
    spec.s = s;
    spec.sigma = 0.1L;
    const ProblemInstance inst =
        gen_instance(spec, trial_seed(1, p, SparsityRegime::sublinear, 0.1L, t));
    try {
      if (!primal_dual_witness(inst, lambdas.beta, lambdas.e).passed()) ++failures;
    } catch (const SingularityError&) {
      ++singular;
    }
  }
  return {failures >= 80, fmt("witness failed in %zu/100 trials at n=%ld s=%ld (need >= 80), %zu singular",
                              failures, static_cast<long>(n), static_cast<long>(s), singular)};
}

Verdict criterion8() {
  const std::string reference = csv_of(transition_run());
  std::string detail = "workers 1";
  bool pass = !reference.empty();
  for (std::size_t workers : {4u, 8u}) {
    const auto start = Clock::now();
    const std::string csv = csv_of(run_sweep(transition_config(workers)));
    std::fprintf(stderr, "transition sweep (%zu workers): %.1f s\n", workers, seconds_since(start));
    const bool same = csv == reference;
    pass = pass && same;
    detail += fmt(", workers %zu %s", workers, same ? "identical" : "DIFFERENT");
  }
  return {pass, "CSV bytes: " + detail};
}

Verdict criterion9() {
  struct Case {
    Index n, p, k, s;
    Real ratio;
  };
  const std::vector<Case> cases{{3, 3, 1, 1, 1},    {4, 3, 1, 1, 1},   {4, 3, 2, 1, 0.5L},
                                {4, 4, 1, 2, 1},    {4, 4, 2, 1, 2},   {5, 3, 1, 2, 1},
                                {5, 4, 1, 1, 0.7L}, {6, 3, 1, 2, 1},   {3, 6, 2, 1, 1},
                                {2, 6, 1, 1, 1.5L}, {6, 2, 1, 3, 0.8L}, {5, 5, 2, 2, 1},
                                {6, 6, 2, 3, 1}};
  std::size_t violations = 0, checked = 0;
  double worst_margin = 1e300;
  for (const Case& c : cases) {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      InstanceSpec spec;
      spec.n = c.n;
      spec.p = c.p;
      spec.k = c.k;
      spec.s = c.s;
      spec.sigma = 0.1L;
      const ProblemInstance inst = gen_instance(spec, 9000 + seed);
      const GroundTruth& t = inst.require_truth();
      const int resolution = c.n + c.p <= 7 ? 16 : c.n + c.p <= 9 ? 12 : 6;
      const double brute = oracle::brute_force_re(inst.X().cast<double>(), t.T, t.S,
                                                  static_cast<double>(c.ratio), resolution);
      const double kappa =
          static_cast<double>(extended_re_estimate(inst.X(), t.T, t.S, c.ratio, 5000, seed).kappa_hat);
      ++checked;
      worst_margin = std::min(worst_margin, kappa - brute);
      if (kappa < brute - 1e-6) ++violations;
    }
  }
  return {violations == 0, fmt("%zu instances, %zu with kappa_hat below brute force - 1e-6, min margin %.3e",
                               checked, violations, worst_margin)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6,
                                                       criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& err) {
      v = {false, std::string("exception: ") + err.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d: %s  %s  [%.1f s]\n", number, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
