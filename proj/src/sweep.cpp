#include "rlasso/experiments.hpp"

#include "rlasso/datagen.hpp"
#include "rlasso/diagnostics.hpp"
#include "rlasso/regparams.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

namespace rlasso {

const char* to_string(LambdaFamily family) {
  switch (family) {
    case LambdaFamily::simulation: return "simulation";
    case LambdaFamily::corollary1: return "corollary1";
    case LambdaFamily::theorem2: return "theorem2";
  }
  return "?";
}

const char* to_string(FloorVariant variant) {
  return variant == FloorVariant::none ? "none" : "theorem2";
}

LambdaFamily lambda_family_from_string(const std::string& name) {
  if (name == "simulation") return LambdaFamily::simulation;
  if (name == "corollary1") return LambdaFamily::corollary1;
  if (name == "theorem2") return LambdaFamily::theorem2;
  throw InputError("unknown lambda family '" + name + "'");
}

FloorVariant floor_variant_from_string(const std::string& name) {
  if (name == "none") return FloorVariant::none;
  if (name == "theorem2") return FloorVariant::theorem2;
  throw InputError("unknown floor variant '" + name + "'");
}

SweepConfig::SweepConfig() {
  for (int i = 1; i <= 30; ++i) theta_grid.push_back(static_cast<Real>(i) / 10);
}

void SweepConfig::validate() const {
  solver.validate();
  if (trials < 1) throw InputError("sweep: trials must be >= 1");
  if (p_list.empty() || regimes.empty() || theta_grid.empty()) {
    throw InputError("sweep: p_list, regimes and theta_grid must be nonempty");
  }
  for (Index p : p_list) {
    if (p < 3) throw InputError("sweep: every p must be >= 3");
  }
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > 0)) throw InputError("sweep: theta values must be > 0");
    if (i > 0 && !(theta_grid[i] > theta_grid[i - 1])) {
      throw InputError("sweep: theta_grid must be strictly increasing");
    }
  }
  if (std::set<Index>(p_list.begin(), p_list.end()).size() != p_list.size() ||
      std::set<SparsityRegime>(regimes.begin(), regimes.end()).size() != regimes.size()) {
    throw InputError("sweep: p_list and regimes must not repeat");
  }
  if (!(sigma >= 0) || !(lambda_sigma_floor > 0)) {
    throw InputError("sweep: need sigma >= 0 and lambda_sigma_floor > 0");
  }
  if (!(s_fraction >= 0 && s_fraction < 1)) throw InputError("sweep: s_fraction must be in [0, 1)");
  if (!(gross_scale > 0) || !(zero_tol >= 0)) {
    throw InputError("sweep: need gross_scale > 0 and zero_tol >= 0");
  }
}

namespace {

Json solver_to_json(const SolverConfig& s) {
  return {{"max_iters", s.max_iters},
          {"tol_kkt", static_cast<double>(s.tol_kkt)},
          {"tol_obj", static_cast<double>(s.tol_obj)},
          {"algorithm", to_string(s.algorithm)},
          {"warm_path", s.warm_path},
          {"path_factor", static_cast<double>(s.path_factor)}};
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> known, const char* where) {
  if (!doc.is_object()) throw ParseError(std::string(where) + ": expected a JSON object");
  for (const auto& item : doc.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }) ==
        known.end()) {
      throw ParseError(std::string(where) + ": unknown field '" + item.key() + "'");
    }
  }
}

template <class T>
void read_if(const Json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

void read_real(const Json& doc, const char* key, Real& out) {
  double v = static_cast<double>(out);
  read_if(doc, key, v);
  out = v;
}

SolverConfig solver_from_json(const Json& doc) {
  reject_unknown(doc, {"max_iters", "tol_kkt", "tol_obj", "algorithm", "warm_path", "path_factor"},
                 "solver");
  SolverConfig s;
  read_if(doc, "max_iters", s.max_iters);
  read_real(doc, "tol_kkt", s.tol_kkt);
  read_real(doc, "tol_obj", s.tol_obj);
  if (doc.contains("algorithm")) s.algorithm = algorithm_from_string(doc.at("algorithm").get<std::string>());
  read_if(doc, "warm_path", s.warm_path);
  read_real(doc, "path_factor", s.path_factor);
  return s;
}

Json cell_to_json(const SweepCell& c) {
  return {{"p", c.p},
          {"regime", to_string(c.regime)},
          {"k", c.k},
          {"theta", static_cast<double>(c.theta)},
          {"n", c.n},
          {"s", c.s},
          {"lambda_beta", static_cast<double>(c.lambda_beta)},
          {"lambda_e", static_cast<double>(c.lambda_e)},
          {"beta_floor", static_cast<double>(c.beta_floor)},
          {"e_floor", static_cast<double>(c.e_floor)},
          {"trials", c.trials},
          {"successes_beta_and_e", c.successes_beta_and_e},
          {"successes_beta", c.successes_beta},
          {"successes_e", c.successes_e},
          {"nonconverged", c.nonconverged},
          {"kkt_failures", c.kkt_failures},
          {"errors", c.errors},
          {"mean_l2_error", static_cast<double>(c.mean_l2_error)},
          {"mean_linf_error", static_cast<double>(c.mean_linf_error)},
          {"mean_iterations", static_cast<double>(c.mean_iterations)},
          {"max_kkt_residual", static_cast<double>(c.max_kkt_residual)}};
}

SweepCell cell_from_json(const Json& d) {
  SweepCell c;
  std::string regime = "sublinear";
  read_if(d, "p", c.p);
  read_if(d, "regime", regime);
  c.regime = sparsity_regime_from_string(regime);
  read_if(d, "k", c.k);
  read_real(d, "theta", c.theta);
  read_if(d, "n", c.n);
  read_if(d, "s", c.s);
  read_real(d, "lambda_beta", c.lambda_beta);
  read_real(d, "lambda_e", c.lambda_e);
  read_real(d, "beta_floor", c.beta_floor);
  read_real(d, "e_floor", c.e_floor);
  read_if(d, "trials", c.trials);
  read_if(d, "successes_beta_and_e", c.successes_beta_and_e);
  read_if(d, "successes_beta", c.successes_beta);
  read_if(d, "successes_e", c.successes_e);
  read_if(d, "nonconverged", c.nonconverged);
  read_if(d, "kkt_failures", c.kkt_failures);
  read_if(d, "errors", c.errors);
  read_real(d, "mean_l2_error", c.mean_l2_error);
  read_real(d, "mean_linf_error", c.mean_linf_error);
  read_real(d, "mean_iterations", c.mean_iterations);
  read_real(d, "max_kkt_residual", c.max_kkt_residual);
  if (c.successes_beta_and_e > c.trials) throw ParseError("sweep cell: successes exceed trials");
  return c;
}

IndexSet leading_set(Index k) {
  IndexSet T(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) T[static_cast<std::size_t>(j)] = j;
  return T;
}

TrialOutcome run_trial(const InstanceSpec& spec, std::uint64_t seed, Real lb, Real le,
                       const SolverConfig& solver, Real zero_tol) {
  TrialOutcome out;
  try {
    const ProblemInstance instance = gen_instance(spec, seed);
    const Solution sol = solve_extended_lasso(instance, lb, le, solver);
    const RecoveryMetrics m = recovery_metrics(instance, sol, zero_tol);
    out.converged = sol.converged;
    out.iterations = sol.iterations;
    out.kkt_residual = sol.kkt_residual;
    if (sol.converged) out.certified = kkt_check(instance, sol, solver.tol_kkt).certified();
    out.beta_match = m.beta_sign_match;
    out.e_match = m.e_sign_match;
    out.l2_error = m.combined_l2();
    out.linf_error = std::max(m.beta_linf, m.e_linf);
  } catch (const NumericError&) {
    out = TrialOutcome{};
    out.error = true;
  }
  return out;
}

}  // namespace

Json to_json(const SweepConfig& c) {
  Json regimes = Json::array();
  for (SparsityRegime r : c.regimes) regimes.push_back(to_string(r));
  Json thetas = Json::array();
  for (Real t : c.theta_grid) thetas.push_back(static_cast<double>(t));
  return {{"p_list", c.p_list},
          {"regimes", regimes},
          {"theta_grid", thetas},
          {"trials", c.trials},
          {"sigma", static_cast<double>(c.sigma)},
          {"s_fraction", static_cast<double>(c.s_fraction)},
          {"lambda_family", to_string(c.lambda_family)},
          {"floor", to_string(c.floor)},
          {"lambda_sigma_floor", static_cast<double>(c.lambda_sigma_floor)},
          {"gamma_tuning", static_cast<double>(c.gamma_tuning)},
          {"gamma_incoherence", static_cast<double>(c.gamma_incoherence)},
          {"corruption", to_string(c.corruption)},
          {"gross_scale", static_cast<double>(c.gross_scale)},
          {"zero_tol", static_cast<double>(c.zero_tol)},
          {"master_seed", c.master_seed},
          {"workers", c.workers},
          {"solver", solver_to_json(c.solver)}};
}

SweepConfig sweep_config_from_json(const Json& doc) {
  reject_unknown(doc,
                 {"p_list", "regimes", "theta_grid", "trials", "sigma", "s_fraction", "lambda_family",
                  "floor", "lambda_sigma_floor", "gamma_tuning", "gamma_incoherence", "corruption",
                  "gross_scale", "zero_tol", "master_seed", "workers", "solver"},
                 "sweep config");
  SweepConfig c;
  read_if(doc, "p_list", c.p_list);
  if (doc.contains("regimes")) {
    std::vector<std::string> names;
    read_if(doc, "regimes", names);
    c.regimes.clear();
    for (const auto& name : names) c.regimes.push_back(sparsity_regime_from_string(name));
  }
  if (doc.contains("theta_grid")) {
    std::vector<double> thetas;
    read_if(doc, "theta_grid", thetas);
    c.theta_grid.assign(thetas.begin(), thetas.end());
  }
  read_if(doc, "trials", c.trials);
  read_real(doc, "sigma", c.sigma);
  read_real(doc, "s_fraction", c.s_fraction);
  if (doc.contains("lambda_family")) {
    c.lambda_family = lambda_family_from_string(doc.at("lambda_family").get<std::string>());
  }
  if (doc.contains("floor")) c.floor = floor_variant_from_string(doc.at("floor").get<std::string>());
  read_real(doc, "lambda_sigma_floor", c.lambda_sigma_floor);
  read_real(doc, "gamma_tuning", c.gamma_tuning);
  read_real(doc, "gamma_incoherence", c.gamma_incoherence);
  if (doc.contains("corruption")) {
    c.corruption = corruption_mode_from_string(doc.at("corruption").get<std::string>());
  }
  read_real(doc, "gross_scale", c.gross_scale);
  read_real(doc, "zero_tol", c.zero_tol);
  read_if(doc, "master_seed", c.master_seed);
  read_if(doc, "workers", c.workers);
  if (doc.contains("solver")) c.solver = solver_from_json(doc.at("solver"));
  c.validate();
  return c;
}

Json to_json(const SweepResult& result) {
  Json cells = Json::array();
  for (const SweepCell& c : result.cells) cells.push_back(cell_to_json(c));
  Json config = to_json(result.config);
  config.erase("workers");  // results must not depend on scheduling
  return {{"schema", "rlasso.sweep"},
          {"schema_version", result.schema_version},
          {"config", config},
          {"cells", cells}};
}

SweepResult sweep_result_from_json(const Json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != "rlasso.sweep") {
    throw ParseError("expected a document with schema 'rlasso.sweep'");
  }
  SweepResult r;
  read_if(doc, "schema_version", r.schema_version);
  if (r.schema_version != kSweepSchemaVersion) throw ParseError("rlasso.sweep: unsupported schema_version");
  if (!doc.contains("config") || !doc.contains("cells")) throw ParseError("rlasso.sweep: missing config or cells");
  r.config = sweep_config_from_json(doc.at("config"));
  for (const Json& c : doc.at("cells")) r.cells.push_back(cell_from_json(c));
  return r;
}

std::uint64_t trial_seed(std::uint64_t master, Index p, SparsityRegime regime, Real theta,
                         std::size_t trial) {
  const auto theta_key = static_cast<std::uint64_t>(std::llround(theta * 1000000));
  const std::uint64_t cell = derive_seed(static_cast<std::uint64_t>(p),
                                         static_cast<std::uint64_t>(regime), theta_key);
  return derive_seed(master, cell, static_cast<std::uint64_t>(trial));
}

LambdaPair sweep_lambdas(const SweepConfig& config, Index n, Index p, Index k, Index s) {
  const Real sigma = config.sigma > 0 ? config.sigma : config.lambda_sigma_floor;
  switch (config.lambda_family) {
    case LambdaFamily::simulation: return lambdas_simulation(sigma, n, p);
    case LambdaFamily::corollary1: return lambdas_corollary1(sigma, n, p, config.gamma_tuning);
    case LambdaFamily::theorem2: {
      const CovarianceReport report = covariance_report(Matrix::Identity(p, p), leading_set(k));
      const Real eta = static_cast<Real>(std::max<Index>(s, 1)) / static_cast<Real>(n);
      return lambdas_theorem2(sigma, n, p, eta, report, config.gamma_incoherence);
    }
  }
  throw InputError("sweep: unknown lambda family");
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<SweepCell> plan_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<SweepCell> cells;
  for (Index p : config.p_list) {
    for (SparsityRegime regime : config.regimes) {
      const Index k = k_from_regime(regime, p);
      if (k >= p) throw InputError("sweep: regime yields k >= p");
      for (Real theta : config.theta_grid) {
        SweepCell c;
        c.p = p;
        c.regime = regime;
        c.k = k;
        c.theta = theta;
        c.n = n_from_theta(theta, k, p);
        c.s = static_cast<Index>(std::floor(config.s_fraction * static_cast<Real>(c.n)));
        const LambdaPair lambdas = sweep_lambdas(config, c.n, p, k, c.s);
        c.lambda_beta = lambdas.beta;
        c.lambda_e = lambdas.e;
        if (config.floor == FloorVariant::theorem2) {
          TheoryInputs in;
          in.n = c.n;
          in.p = p;
          in.k = k;
          in.s = c.s;
          in.sigma = config.sigma;
          in.gamma_tuning = config.gamma_tuning;
          in.gamma_incoherence = config.gamma_incoherence;
          in.report = covariance_report(Matrix::Identity(p, p), leading_set(k));
          const Thresholds t = thresholds_theorem2(in, lambdas.beta, lambdas.e);
          c.beta_floor = t.f_beta;
          c.e_floor = t.f_e;
        }
        cells.push_back(c);
      }
    }
  }
  return cells;
}

InstanceSpec trial_instance_spec(const SweepConfig& config, const SweepCell& cell) {
  InstanceSpec spec;
  spec.n = cell.n;
  spec.p = cell.p;
  spec.regime = cell.regime;
  spec.s = cell.s;
  spec.sigma = config.sigma;
  spec.corruption = config.corruption;
  spec.gross_scale = config.gross_scale;
  spec.beta_floor = cell.beta_floor;
  spec.e_floor = cell.e_floor;
  return spec;
}

SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress) {
  config.validate();
  const std::vector<SweepCell> plans = plan_sweep(config);
  std::vector<InstanceSpec> specs;
  for (const SweepCell& c : plans) specs.push_back(trial_instance_spec(config, c));
  const std::size_t total = plans.size() * config.trials;
  std::vector<TrialOutcome> outcomes(total);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(total, config.workers, [&](std::size_t job) {
    const SweepCell& cell = plans[job / config.trials];
    const std::size_t trial = job % config.trials;
    const std::uint64_t seed = trial_seed(config.master_seed, cell.p, cell.regime, cell.theta, trial);
    outcomes[job] = run_trial(specs[job / config.trials], seed, cell.lambda_beta, cell.lambda_e,
                              config.solver, config.zero_tol);
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(finished, total);
    }
  });

  SweepResult result;
  result.config = config;
  for (std::size_t c = 0; c < plans.size(); ++c) {
    SweepCell cell = plans[c];
    cell.trials = config.trials;
    Real l2 = 0;
    Real linf = 0;
    Real iters = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const TrialOutcome& o = outcomes[c * config.trials + t];
      if (o.error) {
        ++cell.errors;
        ++cell.nonconverged;
        continue;
      }
      if (!o.converged) {
        ++cell.nonconverged;
      } else {
        if (!o.certified) ++cell.kkt_failures;
        cell.max_kkt_residual = std::max(cell.max_kkt_residual, o.kkt_residual);
        if (o.beta_match) ++cell.successes_beta;
        if (o.e_match) ++cell.successes_e;
        if (o.beta_match && o.e_match) ++cell.successes_beta_and_e;
      }
      l2 += o.l2_error;
      linf += o.linf_error;
      iters += static_cast<Real>(o.iterations);
    }
    const std::size_t counted = config.trials - cell.errors;
    if (counted > 0) {
      cell.mean_l2_error = l2 / static_cast<Real>(counted);
      cell.mean_linf_error = linf / static_cast<Real>(counted);
      cell.mean_iterations = iters / static_cast<Real>(counted);
    }
    result.cells.push_back(cell);
  }
  return result;
}

std::vector<SweepCell> cells_for(const SweepResult& result, Index p, SparsityRegime regime) {
  std::vector<SweepCell> out;
  for (const SweepCell& c : result.cells) {
    if (c.p == p && c.regime == regime) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const SweepCell& a, const SweepCell& b) { return a.theta < b.theta; });
  return out;
}

}  // namespace rlasso
