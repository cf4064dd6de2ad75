#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pasa/envs.hpp"
#include "pasa/loop.hpp"
#include "pasa/stats.hpp"

namespace pasa {

/// Configuration or CLI usage problem (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Request exceeds a built-in capacity limit (exit code 3).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Filesystem failure, annotated with the path (exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { performance, mse };

/**
 * Resolved experiment description.  Serialised as a flat key = value text
 * file with a schema version; unknown keys are rejected with their field
 * path.  The resolved form (defaults filled in) is echoed into every
 * output directory so a run can be reproduced exactly.
 */
struct ExperimentConfig {
  int schema = 1;
  EnvFamily family = EnvFamily::garnet;
  RunMode mode = RunMode::performance;
  AgentVariant agent = AgentVariant::pasa_agg;

  GarnetSpec garnet;
  GridworldSpec grid;
  LogisticsSpec logistics;

  SarsaParams sarsa;
  PasaParams pasa;

  int X = 70;
  int X0 = 0;  // 0 resolves to X/2

  int trials = 20;
  std::int64_t iterations = 1'000'000;
  int windows = 100;
  double measure_fraction = 0.2;       // final share used for the headline metric
  std::int64_t checkpoint_every = 0;   // 0 resolves to iterations/50 (mse mode)
  double ci_level = 0.95;
  std::uint64_t seed = 1;
  int mse_capacity = 4000;  // largest S the dense oracles accept

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_string(const std::string& text);
  void set(const std::string& key, const std::string& value);  // one key = value entry
  void apply_text(const std::string& text, bool require_schema);
  void apply_file(const std::string& path);
  void resolve();   // fill derived defaults (X0, checkpoint cadence)
  void validate() const;
  std::string serialize() const;  // resolved, sorted, parse-back identical
};

const char* to_string(EnvFamily f);
const char* to_string(AgentVariant v);
const char* to_string(RunMode m);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> window_avg_reward;
  double final_reward = 0.0;  // average reward per iteration over the final fraction
  double sqrt_mse = 0.0;      // mse mode only
  std::int64_t repartitions = 0;
  bool theta_soft_bound_ok = true;
  double us_per_iter = 0.0;   // informational; never serialised
};

struct ScoreRow {
  int trial = 0;
  std::int64_t checkpoint = 0;
  double sqrt_mse = 0.0;
  double mse = 0.0;
  double l = 0.0;
  double l_tilde = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  std::vector<ScoreRow> scores;  // mse mode: one row per (trial, checkpoint)
  MeanCi final_reward;
  MeanCi sqrt_mse;  // mse mode
};

/// Runs config.trials independent trials (parallel across the worker pool
/// sized by PASA_WORKERS) and aggregates the headline metric with a t
/// confidence interval.  Byte-identical results for identical configs.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes results.csv, plot.csv, config.resolved.cfg and, in mse mode,
/// mse_scores.csv under out_dir (created if needed).
void emit_results(const ExperimentReport& report, const std::string& out_dir);

/// Reads back the trial rows and aggregate row of an emitted results.csv.
struct ParsedResults {
  std::vector<double> final_reward;
  std::vector<double> sqrt_mse;
  double aggregate_final_reward = 0.0;
  double aggregate_sqrt_mse = 0.0;
};
ParsedResults parse_results_csv(const std::string& path);

struct TimingReport {
  bool valid = false;
  std::int64_t iterations = 0;
  double us_tabular = 0.0;
  double us_fixed = 0.0;
  double us_pasa = 0.0;
  double overhead_pct = 0.0;  // pasa over fixed
};

/// Wall-clock cost per iteration of the fixed and adaptive agents (and the
/// tabular baseline) on one sampled environment, measured with a monotonic
/// clock after a warm-up run; sampling and oracle work excluded.
TimingReport measure_iteration_cost(const ExperimentConfig& config);

int worker_count();  // PASA_WORKERS override, else hardware concurrency

}  // namespace pasa
