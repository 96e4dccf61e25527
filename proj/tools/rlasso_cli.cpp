// Command-line front end: generate / solve / verify / params / sweep / report / scaling.

#include "rlasso/curves.hpp"
#include "rlasso/datagen.hpp"
#include "rlasso/diagnostics.hpp"
#include "rlasso/experiments.hpp"
#include "rlasso/io.hpp"
#include "rlasso/regparams.hpp"
#include "rlasso/solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace rlasso;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUncertified = 4;

bool g_quiet = false;

void log_config(const std::string& command, const Json& config) {
  if (!g_quiet) std::cerr << "rlasso " << command << ": resolved config " << config.dump() << '\n';
}

void note(const std::string& message) {
  if (!g_quiet) std::cerr << "rlasso: " << message << '\n';
}

Json lambdas_json(const LambdaPair& l) {
  Json out = {{"lambda_beta", static_cast<double>(l.beta)},
              {"lambda_e", static_cast<double>(l.e)},
              {"degenerate", l.degenerate}};
  out["ratio"] = l.beta > 0 ? Json(static_cast<double>(l.ratio())) : Json(nullptr);
  return out;
}

Json report_json(const CovarianceReport& r, Real gamma_incoherence) {
  return {{"C_min", static_cast<double>(r.C_min)},
          {"C_max", static_cast<double>(r.C_max)},
          {"xi", static_cast<double>(r.xi)},
          {"D_plus_max", static_cast<double>(r.D_plus_max)},
          {"D_minus_max", static_cast<double>(r.D_minus_max)},
          {"rho_u", static_cast<double>(r.rho_u)},
          {"rho_l", static_cast<double>(r.rho_l)},
          {"incoherence_value", static_cast<double>(r.incoherence_value)},
          {"incoherent", r.incoherent(gamma_incoherence)},
          {"sigma_tt_inv_sqrt_inf_sq", static_cast<double>(r.inv_sqrt_inf_sq)}};
}

// Evaluates fn into a JSON value, turning domain errors into {"error": ...}.
template <class Fn>
Json attempt(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    return {{"error", e.what()}};
  }
}

IndexSet leading(Index k) {
  IndexSet T(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) T[static_cast<std::size_t>(j)] = j;
  return T;
}

// ---- shared option groups ----

struct SolverFlags {
  std::size_t max_iters = SolverConfig{}.max_iters;
  double tol_kkt = 1e-9;
  double tol_obj = 1e-12;
  std::string algorithm = "block-coordinate";
  bool no_warm_path = false;

  void add(CLI::App* app) {
    app->add_option("--max-iters", max_iters, "Iteration budget")->capture_default_str();
    app->add_option("--tol-kkt", tol_kkt, "KKT residual tolerance (dual units)")->capture_default_str();
    app->add_option("--tol-obj", tol_obj, "Relative objective-decrease stall tolerance")->capture_default_str();
    app->add_option("--algorithm", algorithm, "block-coordinate | proximal-gradient")
        ->check(CLI::IsMember({"block-coordinate", "proximal-gradient"}))
        ->capture_default_str();
    app->add_flag("--no-warm-path", no_warm_path, "Solve at the target penalties directly");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.max_iters = max_iters;
    c.tol_kkt = tol_kkt;
    c.tol_obj = tol_obj;
    c.algorithm = algorithm_from_string(algorithm);
    c.warm_path = !no_warm_path;
    c.validate();
    return c;
  }
};

Json solver_json(const SolverConfig& c) {
  return {{"max_iters", c.max_iters},
          {"tol_kkt", static_cast<double>(c.tol_kkt)},
          {"tol_obj", static_cast<double>(c.tol_obj)},
          {"algorithm", to_string(c.algorithm)},
          {"warm_path", c.warm_path}};
}

// ---- generate ----

struct GenerateCmd {
  Index n = 0;
  double theta = 0;
  Index p = 128;
  std::optional<Index> k;
  std::string regime = "sublinear";
  std::optional<Index> s;
  double sigma = 0.1;
  std::string corruption = "gross";
  std::string covariance = "identity";
  double rho = 0;
  double gross_scale = 1;
  double beta_floor = 0;
  double e_floor = 0;
  std::uint64_t seed = 1;
  std::string output = "-";

  void add(CLI::App* app) {
    auto* n_opt = app->add_option("--n", n, "Number of observations");
    auto* t_opt = app->add_option("--theta", theta, "Rescaled sample size; sets n from n/ln n = 4 theta k ln(p-k)");
    n_opt->excludes(t_opt);
    app->add_option("--p", p, "Number of predictors")->capture_default_str();
    app->add_option("--k", k, "Support size of beta* (overrides --regime)");
    app->add_option("--regime", regime, "sublinear | linear | fractional")
        ->check(CLI::IsMember({"sublinear", "linear", "fractional"}))
        ->capture_default_str();
    app->add_option("--s", s, "Number of corrupted observations (default n/2)");
    app->add_option("--sigma", sigma, "Dense noise standard deviation")->capture_default_str();
    app->add_option("--corruption", corruption, "gross | missing")
        ->check(CLI::IsMember({"gross", "missing"}))
        ->capture_default_str();
    app->add_option("--covariance", covariance, "identity | ar1")
        ->check(CLI::IsMember({"identity", "ar1"}))
        ->capture_default_str();
    app->add_option("--rho", rho, "AR(1) correlation")->capture_default_str();
    app->add_option("--gross-scale", gross_scale, "Multiplier on e* magnitudes")->capture_default_str();
    app->add_option("--beta-floor", beta_floor, "Minimum |beta*_i| on the support")->capture_default_str();
    app->add_option("--e-floor", e_floor, "Minimum |e*_i| (before scaling) on the support")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("-o,--output", output, "Instance JSON path, - for stdout")->capture_default_str();
  }

  int run() const {
    InstanceSpec spec;
    spec.p = p;
    spec.regime = sparsity_regime_from_string(regime);
    spec.k = k;
    const Index kk = spec.resolved_k();
    if (theta > 0) {
      spec.n = n_from_theta(theta, kk, p);
    } else if (n > 0) {
      spec.n = n;
    } else {
      throw InputError("generate: give --n or --theta");
    }
    spec.s = s;
    spec.sigma = sigma;
    spec.corruption = corruption_mode_from_string(corruption);
    spec.covariance = covariance == "ar1" ? CovarianceSpec::ar1(p, rho) : CovarianceSpec::identity(p);
    spec.gross_scale = gross_scale;
    spec.beta_floor = beta_floor;
    spec.e_floor = e_floor;
    log_config("generate", {{"n", spec.n},
                            {"p", p},
                            {"k", kk},
                            {"s", spec.resolved_s()},
                            {"regime", regime},
                            {"sigma", sigma},
                            {"corruption", corruption},
                            {"covariance", covariance},
                            {"rho", rho},
                            {"gross_scale", gross_scale},
                            {"beta_floor", beta_floor},
                            {"e_floor", e_floor},
                            {"seed", seed},
                            {"output", output}});
    write_json(instance_to_json(gen_instance(spec, seed)), output);
    return kExitOk;
  }
};

// ---- solve ----

struct SolveCmd {
  std::string instance = "-";
  std::string output = "-";
  std::optional<double> lambda_beta;
  std::optional<double> lambda_e;
  std::string family = "simulation";
  std::optional<double> sigma;
  double lambda_sigma_floor = 5e-8;
  double gamma_tuning = 1;
  double gamma_incoherence = 0.5;
  SolverFlags solver;

  void add(CLI::App* app) {
    app->add_option("-i,--instance", instance, "Instance JSON path, - for stdin")->capture_default_str();
    app->add_option("-o,--output", output, "Solution JSON path, - for stdout")->capture_default_str();
    auto* lb = app->add_option("--lambda-beta", lambda_beta, "Penalty on beta");
    auto* le = app->add_option("--lambda-e", lambda_e, "Penalty on e");
    lb->needs(le);
    le->needs(lb);
    app->add_option("--lambda-family", family, "simulation | corollary1 | theorem1 | theorem2 (when no explicit lambdas)")
        ->check(CLI::IsMember({"simulation", "corollary1", "theorem1", "theorem2"}))
        ->capture_default_str();
    app->add_option("--sigma", sigma, "Noise level for the lambda family (default: from the truth)");
    app->add_option("--lambda-sigma-floor", lambda_sigma_floor, "Noise level used when sigma = 0")->capture_default_str();
    app->add_option("--gamma-tuning", gamma_tuning, "gamma of the theorem1 and corollary1 families")->capture_default_str();
    app->add_option("--gamma-incoherence", gamma_incoherence, "incoherence gamma of the theorem2 family")->capture_default_str();
    solver.add(app);
  }

  LambdaPair choose(const ProblemInstance& inst) const {
    if (lambda_beta) {
      LambdaPair l;
      l.beta = *lambda_beta;
      l.e = *lambda_e;
      return l;
    }
    if (family == "theorem1") {
      const LambdaPair l = lambdas_theorem1(inst, gamma_tuning);
      if (l.degenerate) throw InputError("solve: theorem1 lambdas vanish (w = 0)");
      return l;
    }
    Real sig = 0;
    if (sigma) {
      sig = *sigma;
    } else if (inst.truth()) {
      sig = inst.truth()->sigma;
    } else {
      throw InputError("solve: --sigma is required for an instance without truth");
    }
    if (sig == 0) sig = lambda_sigma_floor;
    if (family == "simulation") return lambdas_simulation(sig, inst.n(), inst.p());
    if (family == "corollary1") return lambdas_corollary1(sig, inst.n(), inst.p(), gamma_tuning);
    const GroundTruth& truth = inst.require_truth();
    const Matrix Sigma = inst.meta().covariance.p == inst.p() ? inst.meta().covariance.materialize()
                                                               : Matrix(Matrix::Identity(inst.p(), inst.p()));
    const CovarianceReport report = covariance_report(Sigma, truth.T);
    return lambdas_theorem2(sig, inst.n(), inst.p(), static_cast<Real>(truth.s()) / static_cast<Real>(inst.n()), report, gamma_incoherence);
  }

  int run() const {
    const SolverConfig config = solver.config();
    const ProblemInstance inst = instance_from_json(read_json(instance));
    const LambdaPair l = choose(inst);
    log_config("solve", {{"instance", instance},
                         {"output", output},
                         {"lambda_beta", static_cast<double>(l.beta)},
                         {"lambda_e", static_cast<double>(l.e)},
                         {"lambda_source", lambda_beta ? "explicit" : family},
                         {"solver", solver_json(config)}});
    const Solution sol = solve_extended_lasso(inst, l.beta, l.e, config);
    if (!sol.converged) {
      note("solver did not reach tol_kkt within max_iters (kkt_residual " +
           std::to_string(static_cast<double>(sol.kkt_residual)) + ")");
    }
    write_json(solution_to_json(sol), output);
    return kExitOk;
  }
};

// ---- verify ----

struct VerifyCmd {
  std::string instance;
  std::string solution;
  std::string output = "-";
  double tol = 1e-9;
  bool no_witness = false;

  void add(CLI::App* app) {
    app->add_option("-i,--instance", instance, "Instance JSON path, - for stdin")->required();
    app->add_option("-s,--solution", solution, "Solution JSON path, - for stdin")->required();
    app->add_option("-o,--output", output, "Report JSON path, - for stdout")->capture_default_str();
    app->add_option("--tol", tol, "Stationarity tolerance")->capture_default_str();
    app->add_flag("--no-witness", no_witness, "Skip the primal-dual witness even when truth is present");
  }

  int run() const {
    if (instance == "-" && solution == "-") throw InputError("verify: only one input can come from stdin");
    log_config("verify", {{"instance", instance}, {"solution", solution}, {"output", output}, {"tol", tol},
                          {"witness", !no_witness}});
    const ProblemInstance inst = instance_from_json(read_json(instance));
    const Solution sol = solution_from_json(read_json(solution));
    if (sol.beta_hat.size() != inst.p() || sol.e_hat.size() != inst.n()) {
      throw InputError("verify: solution dimensions do not match the instance");
    }
    const KktReport kkt = kkt_check(inst, sol, tol);
    Json doc = {{"schema", "rlasso.verify"},
                {"schema_version", 1},
                {"certified", kkt.certified()},
                {"kkt",
                 {{"stationarity_residual", static_cast<double>(kkt.stationarity_residual)},
                  {"max_offsupport_zbeta", static_cast<double>(kkt.max_offsupport_zbeta)},
                  {"max_offsupport_ze", static_cast<double>(kkt.max_offsupport_ze)},
                  {"strict_feasible", kkt.strict_feasible},
                  {"sign_consistent", kkt.sign_consistent},
                  {"tol", tol},
                  {"z_beta", array_to_json(kkt.z_beta)},
                  {"z_e", array_to_json(kkt.z_e)}}},
                {"objective_recomputed",
                 static_cast<double>(objective_value(inst, sol.beta_hat, sol.e_hat, sol.lambda_beta, sol.lambda_e))},
                {"witness", nullptr},
                {"metrics", nullptr}};
    if (inst.truth()) {
      const RecoveryMetrics m = recovery_metrics(inst, sol);
      doc["metrics"] = {{"beta_l2", static_cast<double>(m.beta_l2)},
                        {"e_l2", static_cast<double>(m.e_l2)},
                        {"beta_linf", static_cast<double>(m.beta_linf)},
                        {"e_linf", static_cast<double>(m.e_linf)},
                        {"prediction_error", static_cast<double>(m.prediction_error)},
                        {"beta_sign_match", m.beta_sign_match},
                        {"e_sign_match", m.e_sign_match}};
      if (!no_witness) {
        try {
          const WitnessReport w = primal_dual_witness(inst, sol.lambda_beta, sol.lambda_e);
          doc["witness"] = {{"step3_pass", w.step3_pass},
                            {"step4_pass", w.step4_pass},
                            {"failing_condition", to_string(w.failing_condition)},
                            {"max_z_beta_Tc", static_cast<double>(w.max_z_beta_Tc)},
                            {"max_z_e_Sc", static_cast<double>(w.max_z_e_Sc)},
                            {"zeroed_beta", w.zeroed_beta},
                            {"zeroed_e", w.zeroed_e},
                            {"condition_number", w.condition_number},
                            {"beta_T", array_to_json(w.beta_T)},
                            {"e_S", array_to_json(w.e_S)}};
        } catch (const SingularityError& e) {
          doc["witness"] = {{"error", e.what()}, {"condition_number", e.condition_number()}};
        }
      }
    }
    write_json(doc, output);
    return kkt.certified() ? kExitOk : kExitUncertified;
  }
};

// ---- params ----

struct ParamsCmd {
  std::string instance;
  Index n = 0;
  Index p = 0;
  Index k = 0;
  std::optional<Index> s;
  double sigma = 0.1;
  std::string covariance = "identity";
  double rho = 0;
  double gamma_tuning = 1;
  double gamma_incoherence = 0.5;
  double epsilon = 0.1;
  double delta = 0.1;
  double c1 = 1, c2 = 1, c3 = 1, n2_factor = 48;

  void add(CLI::App* app) {
    app->add_option("-i,--instance", instance, "Instance JSON (supplies n, p, T, S, sigma, covariance)");
    app->add_option("--n", n, "Observations (without --instance)");
    app->add_option("--p", p, "Predictors (without --instance)");
    app->add_option("--k", k, "Support size; T is taken as the first k indices (without truth)");
    app->add_option("--s", s, "Corrupted observations (default n/2 without truth)");
    app->add_option("--sigma", sigma, "Noise level (without truth)")->capture_default_str();
    app->add_option("--covariance", covariance, "identity | ar1 (without --instance)")
        ->check(CLI::IsMember({"identity", "ar1"}))
        ->capture_default_str();
    app->add_option("--rho", rho, "AR(1) correlation")->capture_default_str();
    app->add_option("--gamma-tuning", gamma_tuning)->capture_default_str();
    app->add_option("--gamma-incoherence", gamma_incoherence)->capture_default_str();
    app->add_option("--epsilon", epsilon)->capture_default_str();
    app->add_option("--delta", delta)->capture_default_str();
    app->add_option("--c1", c1)->capture_default_str();
    app->add_option("--c2", c2)->capture_default_str();
    app->add_option("--c3", c3)->capture_default_str();
    app->add_option("--n2-factor", n2_factor, "Leading constant of the theorem2 n2 bound")->capture_default_str();
  }

  int run() const {
    std::optional<ProblemInstance> inst;
    TheoryInputs in;
    in.gamma_tuning = gamma_tuning;
    in.gamma_incoherence = gamma_incoherence;
    in.epsilon = epsilon;
    in.delta = delta;
    Matrix Sigma;
    IndexSet T;
    if (!instance.empty()) {
      inst.emplace(instance_from_json(read_json(instance)));
      in.n = inst->n();
      in.p = inst->p();
      Sigma = inst->meta().covariance.p == in.p ? inst->meta().covariance.materialize()
                                                : Matrix(Matrix::Identity(in.p, in.p));
      if (inst->truth()) {
        T = inst->truth()->T;
        in.k = inst->truth()->k();
        in.s = inst->truth()->s();
        in.sigma = inst->truth()->sigma;
      } else {
        if (k < 1) throw InputError("params: --k is required for an instance without truth");
        T = leading(k);
        in.k = k;
        in.s = s ? *s : in.n / 2;
        in.sigma = sigma;
      }
    } else {
      if (n < 2 || p < 2 || k < 1) throw InputError("params: give --instance or --n, --p and --k");
      in.n = n;
      in.p = p;
      in.k = k;
      in.s = s ? *s : n / 2;
      in.sigma = sigma;
      Sigma = covariance == "ar1" ? CovarianceSpec::ar1(p, rho).materialize() : Matrix(Matrix::Identity(p, p));
      T = leading(k);
    }
    in.report = covariance_report(Sigma, T);
    const TheoryConstants constants{c1, c2, c3, n2_factor};
    log_config("params", {{"instance", instance},
                          {"n", in.n},
                          {"p", in.p},
                          {"k", in.k},
                          {"s", in.s},
                          {"sigma", static_cast<double>(in.sigma)},
                          {"gamma_tuning", gamma_tuning},
                          {"gamma_incoherence", gamma_incoherence},
                          {"epsilon", epsilon},
                          {"delta", delta},
                          {"constants", {{"c1", c1}, {"c2", c2}, {"c3", c3}, {"n2_factor", n2_factor}}}});

    const Real eta = in.eta();
    Json lambdas = {
        {"theorem1", inst && inst->truth() ? lambdas_json(lambdas_theorem1(*inst, gamma_tuning)) : Json(nullptr)},
        {"corollary1", attempt([&] { return lambdas_json(lambdas_corollary1(in.sigma, in.n, in.p, gamma_tuning)); })},
        {"theorem2", attempt([&] {
           return lambdas_json(lambdas_theorem2(in.sigma, in.n, in.p, eta, in.report, gamma_incoherence));
         })},
        {"simulation", attempt([&] { return lambdas_json(lambdas_simulation(in.sigma, in.n, in.p)); })}};

    auto theorem_block = [&](const LambdaPair& l) {
      Json out;
      out["lambda_beta"] = static_cast<double>(l.beta);
      out["lambda_e"] = static_cast<double>(l.e);
      out["theorem2_bounds"] = attempt([&] {
        const SampleBounds b = sample_bounds_theorem2(in, l.beta, l.e, constants);
        return Json{{"n1", static_cast<double>(b.n1)}, {"n2", static_cast<double>(b.n2)}, {"n_exceeds_max", b.holds}};
      });
      out["theorem2_thresholds"] = attempt([&] {
        const Thresholds t = thresholds_theorem2(in, l.beta, l.e, constants);
        return Json{{"f_beta", static_cast<double>(t.f_beta)},
                    {"f_e", static_cast<double>(t.f_e)},
                    {"lambda_prime_beta", static_cast<double>(t.lambda_prime)}};
      });
      out["theorem3_bounds"] = attempt([&] {
        const SampleBounds b = sample_bounds_theorem3(in, l.beta, l.e);
        return Json{{"n1", static_cast<double>(b.n1)}, {"n2", static_cast<double>(b.n2)}, {"n_below_max", b.holds}};
      });
      return out;
    };
    Json evaluated = Json::object();
    for (const char* name : {"theorem2", "simulation"}) {
      evaluated[name] = attempt([&] {
        const LambdaPair l = std::string(name) == "theorem2"
                                 ? lambdas_theorem2(in.sigma, in.n, in.p, eta, in.report, gamma_incoherence)
                                 : lambdas_simulation(in.sigma, in.n, in.p);
        return theorem_block(l);
      });
    }
    Json doc = {{"schema", "rlasso.params"},
                {"schema_version", 1},
                {"inputs",
                 {{"n", in.n},
                  {"p", in.p},
                  {"k", in.k},
                  {"s", in.s},
                  {"eta", static_cast<double>(eta)},
                  {"sigma", static_cast<double>(in.sigma)},
                  {"gamma_tuning", gamma_tuning},
                  {"gamma_incoherence", gamma_incoherence},
                  {"epsilon", epsilon},
                  {"delta", delta}}},
                {"covariance", report_json(in.report, gamma_incoherence)},
                {"lambdas", lambdas},
                {"re_lambda_ratio", attempt([&] {
                   return Json(static_cast<double>(re_lambda_ratio(in.n, in.p, gamma_tuning, in.report.xi)));
                 })},
                {"bounds_by_lambda_family", evaluated}};
    write_json(doc, "-");
    return kExitOk;
  }
};

// ---- sweep ----

struct SweepCmd {
  std::string config_path;
  std::string out_dir;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::optional<std::string> floor;
  std::optional<std::string> family;
  std::vector<Index> p_list;
  std::vector<std::string> regimes;
  std::vector<double> thetas;
  std::string dump_instance;
  std::size_t dump_cell = 0;
  std::size_t dump_trial = 0;

  void add(CLI::App* app) {
    app->add_option("-c,--config", config_path, "Sweep config JSON (defaults when omitted)");
    app->add_option("-o,--out", out_dir, "Output directory")->required();
    app->add_option("--trials", trials, "Override trials per cell");
    app->add_option("--workers", workers, "Override worker threads (0 = all cores)");
    app->add_option("--seed", seed, "Override master seed");
    app->add_option("--sigma", sigma, "Override noise level");
    app->add_option("--floor", floor, "none | theorem2")->check(CLI::IsMember({"none", "theorem2"}));
    app->add_option("--lambda-family", family, "simulation | corollary1 | theorem2")
        ->check(CLI::IsMember({"simulation", "corollary1", "theorem2"}));
    app->add_option("--p", p_list, "Override p list");
    app->add_option("--regime", regimes, "Override regimes")
        ->check(CLI::IsMember({"sublinear", "linear", "fractional"}));
    app->add_option("--theta", thetas, "Override theta grid");
    app->add_option("--dump-instance", dump_instance, "Write the instance of (--dump-cell, --dump-trial) and exit");
    app->add_option("--dump-cell", dump_cell, "Cell index in (p, regime, theta) order")->capture_default_str();
    app->add_option("--dump-trial", dump_trial, "Trial index")->capture_default_str();
  }

  SweepConfig resolve() const {
    SweepConfig c = config_path.empty() ? SweepConfig{} : sweep_config_from_json(read_json(config_path));
    if (trials) c.trials = *trials;
    if (workers) c.workers = *workers;
    if (seed) c.master_seed = *seed;
    if (sigma) c.sigma = *sigma;
    if (floor) c.floor = floor_variant_from_string(*floor);
    if (family) c.lambda_family = lambda_family_from_string(*family);
    if (!p_list.empty()) c.p_list = p_list;
    if (!regimes.empty()) {
      c.regimes.clear();
      for (const auto& r : regimes) c.regimes.push_back(sparsity_regime_from_string(r));
    }
    if (!thetas.empty()) c.theta_grid.assign(thetas.begin(), thetas.end());
    c.validate();
    return c;
  }

  int run() const {
    const SweepConfig config = resolve();
    log_config("sweep", to_json(config));
    if (!dump_instance.empty()) {
      const std::vector<SweepCell> cells = plan_sweep(config);
      if (dump_cell >= cells.size()) throw InputError("sweep: --dump-cell out of range");
      if (dump_trial >= config.trials) throw InputError("sweep: --dump-trial out of range");
      const SweepCell& cell = cells[dump_cell];
      const std::uint64_t s = trial_seed(config.master_seed, cell.p, cell.regime, cell.theta, dump_trial);
      write_json(instance_to_json(gen_instance(trial_instance_spec(config, cell), s)), dump_instance);
      return kExitOk;
    }
    std::size_t last_percent = 101;
    const SweepResult result = run_sweep(config, [&](std::size_t done, std::size_t total) {
      const std::size_t percent = 100 * done / total;
      if (percent != last_percent && !g_quiet) {
        last_percent = percent;
        std::cerr << "\rsweep: " << done << "/" << total << " trials (" << percent << "%)" << std::flush;
      }
    });
    if (!g_quiet) std::cerr << '\n';
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_json(to_json(result), (dir / "sweep.json").string());
    for (const auto& path : emit_curves(result, CurveFormat::csv, dir)) note("wrote " + path.string());
    for (const auto& path : emit_curves(result, CurveFormat::svg, dir)) note("wrote " + path.string());
    return kExitOk;
  }
};

// ---- report ----

struct ReportCmd {
  std::vector<std::string> results;
  std::string out_dir;
  std::string format = "both";

  void add(CLI::App* app) {
    app->add_option("-r,--result", results, "sweep.json files")->required();
    app->add_option("-o,--out", out_dir, "Output directory")->required();
    app->add_option("--format", format, "csv | svg | both")
        ->check(CLI::IsMember({"csv", "svg", "both"}))
        ->capture_default_str();
  }

  int run() const {
    log_config("report", {{"results", results}, {"out", out_dir}, {"format", format}});
    Json summary = Json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const SweepResult result = sweep_result_from_json(read_json(results[i]));
      const std::filesystem::path dir =
          results.size() == 1 ? std::filesystem::path(out_dir)
                              : std::filesystem::path(out_dir) / ("result" + std::to_string(i));
      if (format != "svg") emit_curves(result, CurveFormat::csv, dir);
      if (format != "csv") emit_curves(result, CurveFormat::svg, dir);
      for (const Curve& c : curves_from_result(result)) {
        std::vector<double> rates;
        for (const CurvePoint& pt : c.points) rates.push_back(pt.success_rate);
        summary.push_back({{"result", results[i]},
                           {"p", c.p},
                           {"regime", to_string(c.regime)},
                           {"points", c.points.size()},
                           {"isotonic_max_residual", isotonic_max_residual(rates)}});
      }
    }
    write_json({{"schema", "rlasso.report"}, {"schema_version", 1}, {"curves", summary}}, "-");
    return kExitOk;
  }
};

// ---- scaling ----

struct ScalingCmd {
  ErrorScalingConfig config;
  std::vector<Index> n_list;
  std::optional<Index> s_fixed;
  double eta = 0.5;
  double sigma = 0.1;
  std::string family = "corollary1";
  std::string output = "-";

  void add(CLI::App* app) {
    app->add_option("--p", config.p)->capture_default_str();
    app->add_option("--k", config.k)->capture_default_str();
    app->add_option("--s", s_fixed, "Fixed corruption count (default 16; 0 disables in favour of --eta)");
    app->add_option("--eta", eta, "Corrupted fraction when no fixed count applies")->capture_default_str();
    app->add_option("--n", n_list, "Sample sizes (increasing)");
    app->add_option("--sigma", sigma)->capture_default_str();
    app->add_option("--trials", config.trials)->capture_default_str();
    app->add_option("--lambda-family", family, "simulation | corollary1")
        ->check(CLI::IsMember({"simulation", "corollary1"}))
        ->capture_default_str();
    app->add_option("--seed", config.master_seed)->capture_default_str();
    app->add_option("--workers", config.workers)->capture_default_str();
    app->add_option("-o,--output", output, "Result JSON path, - for stdout")->capture_default_str();
  }

  int run() {
    if (!n_list.empty()) config.n_list = n_list;
    if (s_fixed) {
      if (*s_fixed == 0) {
        config.s_fixed.reset();
      } else {
        config.s_fixed = *s_fixed;
      }
    }
    config.eta = eta;
    config.sigma = sigma;
    config.lambda_family = lambda_family_from_string(family);
    config.validate();
    log_config("scaling", {{"p", config.p},
                           {"k", config.k},
                           {"s_fixed", config.s_fixed ? Json(*config.s_fixed) : Json(nullptr)},
                           {"eta", eta},
                           {"n_list", config.n_list},
                           {"sigma", sigma},
                           {"trials", config.trials},
                           {"lambda_family", family},
                           {"seed", config.master_seed},
                           {"workers", config.workers}});
    write_json(to_json(error_scaling_sweep(config)), output);
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended Lasso toolkit: robust sparse regression with gross corruptions"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "Suppress the resolved-config log and progress on stderr");

  GenerateCmd generate;
  SolveCmd solve;
  VerifyCmd verify;
  ParamsCmd params;
  SweepCmd sweep;
  ReportCmd report;
  ScalingCmd scaling;
  generate.add(app.add_subcommand("generate", "Draw a synthetic instance"));
  solve.add(app.add_subcommand("solve", "Solve the extended Lasso on an instance"));
  verify.add(app.add_subcommand("verify", "Certify a solution by its KKT conditions (exit 4 if not certified)"));
  params.add(app.add_subcommand("params", "Print regularization parameters, thresholds and sample bounds"));
  sweep.add(app.add_subcommand("sweep", "Run the phase-transition sweep"));
  report.add(app.add_subcommand("report", "Render curves from sweep results"));
  scaling.add(app.add_subcommand("scaling", "Run the error-scaling sweep"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "generate") return generate.run();
    if (name == "solve") return solve.run();
    if (name == "verify") return verify.run();
    if (name == "params") return params.run();
    if (name == "sweep") return sweep.run();
    if (name == "report") return report.run();
    if (name == "scaling") return scaling.run();
  } catch (const ParseError& e) {
    std::cerr << "rlasso: parse error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "rlasso: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericError& e) {
    std::cerr << "rlasso: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "rlasso: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
