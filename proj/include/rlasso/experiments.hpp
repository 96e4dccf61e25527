#pragma once

#include "rlasso/datagen.hpp"
#include "rlasso/io.hpp"
#include "rlasso/model.hpp"
#include "rlasso/regparams.hpp"
#include "rlasso/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace rlasso {

inline constexpr int kSweepSchemaVersion = 1;

enum class LambdaFamily { simulation, corollary1, theorem2 };
/// Minimum-magnitude policy for the planted vectors.
enum class FloorVariant { none, theorem2 };

const char* to_string(LambdaFamily family);
const char* to_string(FloorVariant variant);
LambdaFamily lambda_family_from_string(const std::string& name);
FloorVariant floor_variant_from_string(const std::string& name);

struct SweepConfig {
  std::vector<Index> p_list{128, 256, 512};
  std::vector<SparsityRegime> regimes{SparsityRegime::sublinear, SparsityRegime::linear,
                                      SparsityRegime::fractional};
  std::vector<Real> theta_grid;  // defaults to 0.1, 0.2, ..., 3.0
  std::size_t trials = 100;
  Real sigma = 0.1L;
  Real s_fraction = 0.5L;  // s = floor(s_fraction * n)
  LambdaFamily lambda_family = LambdaFamily::simulation;
  FloorVariant floor = FloorVariant::none;
  /// Noise level the lambda family is evaluated at when sigma = 0.
  Real lambda_sigma_floor = 5e-8L;
  Real gamma_tuning = 1;
  Real gamma_incoherence = 0.5L;
  CorruptionMode corruption = CorruptionMode::gross;
  Real gross_scale = 1;
  Real zero_tol = kDefaultZeroTol;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  SolverConfig solver;

  SweepConfig();
  void validate() const;
};

Json to_json(const SweepConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
SweepConfig sweep_config_from_json(const Json& doc);

struct SweepCell {
  Index p = 0;
  SparsityRegime regime = SparsityRegime::sublinear;
  Index k = 0;
  Real theta = 0;
  Index n = 0;
  Index s = 0;
  Real lambda_beta = 0;
  Real lambda_e = 0;
  Real beta_floor = 0;
  Real e_floor = 0;
  std::size_t trials = 0;
  std::size_t successes_beta_and_e = 0;
  std::size_t successes_beta = 0;
  std::size_t successes_e = 0;
  std::size_t nonconverged = 0;
  std::size_t kkt_failures = 0;  // converged but not certified by kkt_check
  std::size_t errors = 0;        // trials that raised a numeric error
  Real mean_l2_error = 0;        // ||h||_2 + ||f||_2
  Real mean_linf_error = 0;      // max(||h||_inf, ||f||_inf)
  Real mean_iterations = 0;
  Real max_kkt_residual = 0;     // over converged trials
};

struct SweepResult {
  int schema_version = kSweepSchemaVersion;
  SweepConfig config;
  std::vector<SweepCell> cells;
};

Json to_json(const SweepResult& result);
SweepResult sweep_result_from_json(const Json& doc);

/// Everything recorded about one solved trial.
struct TrialOutcome {
  bool beta_match = false;
  bool e_match = false;
  bool converged = false;
  bool certified = false;
  bool error = false;
  Real l2_error = 0;
  Real linf_error = 0;
  Real kkt_residual = 0;
  std::size_t iterations = 0;
};

/// Seed of trial `trial` in the cell (p, regime, theta).
std::uint64_t trial_seed(std::uint64_t master, Index p, SparsityRegime regime, Real theta,
                         std::size_t trial);

/// Lambdas of the configured family for one cell, after the sigma floor.
LambdaPair sweep_lambdas(const SweepConfig& config, Index n, Index p, Index k, Index s);

/// Cells of the sweep in (p, regime, theta) order, before any trial runs.
std::vector<SweepCell> plan_sweep(const SweepConfig& config);

/// Generator settings shared by every trial of a cell.
InstanceSpec trial_instance_spec(const SweepConfig& config, const SweepCell& cell);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (p, regime, theta) cell. Output depends only on the config and
/// its master seed, never on the worker count or scheduling.
SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress = {});

/// Cells for one (p, regime) pair in theta order.
std::vector<SweepCell> cells_for(const SweepResult& result, Index p, SparsityRegime regime);

struct ErrorScalingConfig {
  Index p = 128;
  Index k = 8;
  /// Fixed corruption count; when unset, s = floor(eta * n).
  std::optional<Index> s_fixed = 16;
  Real eta = 0.5L;
  std::vector<Index> n_list{400, 800, 1600, 3200};
  Real sigma = 0.1L;
  /// Noise level the lambda family is evaluated at when sigma = 0.
  Real lambda_sigma_floor = 5e-8L;
  std::size_t trials = 20;
  LambdaFamily lambda_family = LambdaFamily::corollary1;
  Real gamma_tuning = 1;
  Real gross_scale = 1;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  SolverConfig solver;

  void validate() const;
};

struct ErrorScalingRow {
  Index n = 0;
  Index s = 0;
  Real lambda_beta = 0;
  Real lambda_e = 0;
  std::size_t trials = 0;
  std::size_t nonconverged = 0;
  Real mean_error = 0;  // mean ||h||_2 + ||f||_2
};

struct LogLogFit {
  Real slope = 0;
  Real intercept = 0;
};

/// Least-squares line through (ln x, ln y).
LogLogFit fit_loglog(const std::vector<Real>& x, const std::vector<Real>& y);

struct ErrorScalingResult {
  std::vector<ErrorScalingRow> rows;
  LogLogFit fit;
};

ErrorScalingResult error_scaling_sweep(const ErrorScalingConfig& config,
                                       const ProgressFn& progress = {});

Json to_json(const ErrorScalingResult& result);

/// Runs `count` independent jobs on `workers` threads; job i writes only slot i.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

}  // namespace rlasso
