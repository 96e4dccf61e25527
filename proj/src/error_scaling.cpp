#include "rlasso/experiments.hpp"

#include "rlasso/datagen.hpp"
#include "rlasso/diagnostics.hpp"
#include "rlasso/regparams.hpp"

#include <atomic>
#include <cmath>
#include <mutex>

namespace rlasso {

void ErrorScalingConfig::validate() const {
  solver.validate();
  if (k < 1 || p <= k) throw InputError("error scaling: need 1 <= k < p");
  if (n_list.size() < 2) throw InputError("error scaling: need at least two sample sizes");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) throw InputError("error scaling: sample sizes must be >= 2");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw InputError("error scaling: n_list must increase");
    if (s_fixed && *s_fixed >= n_list[i]) throw InputError("error scaling: s must be < n");
  }
  if (!(eta >= 0 && eta < 1)) throw InputError("error scaling: eta must be in [0, 1)");
  if (!(sigma >= 0)) throw InputError("error scaling: sigma must be >= 0");
  if (!(lambda_sigma_floor > 0)) throw InputError("error scaling: lambda_sigma_floor must be > 0");
  if (trials < 1) throw InputError("error scaling: trials must be >= 1");
  if (lambda_family == LambdaFamily::theorem2) {
    throw InputError("error scaling: use the simulation or corollary1 family");
  }
}

LogLogFit fit_loglog(const std::vector<Real>& x, const std::vector<Real>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_loglog: need >= 2 paired points");
  const Real m = static_cast<Real>(x.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InputError("fit_loglog: values must be > 0");
    const Real lx = std::log(x[i]);
    const Real ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const Real denom = m * sxx - sx * sx;
  if (!(denom > 0)) throw InputError("fit_loglog: x values must not all coincide");
  LogLogFit fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  return fit;
}

ErrorScalingResult error_scaling_sweep(const ErrorScalingConfig& config, const ProgressFn& progress) {
  config.validate();
  const std::size_t total = config.n_list.size() * config.trials;
  std::vector<ErrorScalingRow> rows;
  for (Index n : config.n_list) {
    ErrorScalingRow row;
    row.n = n;
    row.s = config.s_fixed ? *config.s_fixed
                           : static_cast<Index>(std::floor(config.eta * static_cast<Real>(n)));
    const Real sigma = config.sigma > 0 ? config.sigma : config.lambda_sigma_floor;
    const LambdaPair l = config.lambda_family == LambdaFamily::simulation
                             ? lambdas_simulation(sigma, n, config.p)
                             : lambdas_corollary1(sigma, n, config.p, config.gamma_tuning);
    row.lambda_beta = l.beta;
    row.lambda_e = l.e;
    row.trials = config.trials;
    rows.push_back(row);
  }

  std::vector<Real> errors(total, 0);
  std::vector<char> converged(total, 0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(total, config.workers, [&](std::size_t job) {
    const ErrorScalingRow& row = rows[job / config.trials];
    const std::size_t trial = job % config.trials;
    InstanceSpec spec;
    spec.n = row.n;
    spec.p = config.p;
    spec.k = config.k;
    spec.s = row.s;
    spec.sigma = config.sigma;
    spec.gross_scale = config.gross_scale;
    const std::uint64_t seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(row.n),
                                           static_cast<std::uint64_t>(trial));
    const ProblemInstance instance = gen_instance(spec, seed);
    const Solution sol = solve_extended_lasso(instance, row.lambda_beta, row.lambda_e, config.solver);
    errors[job] = recovery_metrics(instance, sol).combined_l2();
    converged[job] = sol.converged ? 1 : 0;
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(finished, total);
    }
  });

  ErrorScalingResult result;
  std::vector<Real> xs;
  std::vector<Real> ys;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Real sum = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      sum += errors[r * config.trials + t];
      if (!converged[r * config.trials + t]) ++rows[r].nonconverged;
    }
    rows[r].mean_error = sum / static_cast<Real>(config.trials);
    xs.push_back(static_cast<Real>(rows[r].n));
    ys.push_back(rows[r].mean_error);
  }
  result.rows = std::move(rows);
  result.fit = fit_loglog(xs, ys);
  return result;
}

Json to_json(const ErrorScalingResult& result) {
  Json rows = Json::array();
  for (const ErrorScalingRow& r : result.rows) {
    rows.push_back({{"n", r.n},
                    {"s", r.s},
                    {"lambda_beta", static_cast<double>(r.lambda_beta)},
                    {"lambda_e", static_cast<double>(r.lambda_e)},
                    {"trials", r.trials},
                    {"nonconverged", r.nonconverged},
                    {"mean_error", static_cast<double>(r.mean_error)}});
  }
  return {{"schema", "rlasso.error_scaling"},
          {"schema_version", 1},
          {"rows", rows},
          {"slope", static_cast<double>(result.fit.slope)},
          {"intercept", static_cast<double>(result.fit.intercept)}};
}

}  // namespace rlasso
