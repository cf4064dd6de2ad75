#include <atomic>
#include <limits>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pasa/harness.hpp"

namespace pasa {

int worker_count() {
  if (const char* env = std::getenv("PASA_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

std::string format_real(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

struct TrialSeeds {
  std::uint64_t env, policy, agent, noise;
};

TrialSeeds trial_seeds(std::uint64_t master, int trial) {
  const Rng base(master);
  return {base.derive(4ULL * trial + 0).seed(), base.derive(4ULL * trial + 1).seed(),
          base.derive(4ULL * trial + 2).seed(), base.derive(4ULL * trial + 3).seed()};
}

LoopSetup make_setup(const ExperimentConfig& cfg, const TrialSeeds& seeds, double reward_bound) {
  LoopSetup setup;
  setup.variant = cfg.agent;
  setup.sarsa = cfg.sarsa;
  setup.pasa = cfg.pasa;
  setup.X = cfg.X;
  setup.X0 = cfg.X0;
  setup.iterations = cfg.iterations;
  setup.window_count = cfg.windows;
  setup.measure_from =
      cfg.iterations - static_cast<std::int64_t>(std::floor(cfg.measure_fraction * cfg.iterations));
  setup.agent_seed = seeds.agent;
  setup.env_noise_seed = seeds.noise;
  setup.reward_bound = reward_bound;
  return setup;
}

template <class Env>
TrialResult run_trial(const Env& env, const ExperimentConfig& cfg, int trial,
                      const TrialSeeds& seeds, std::vector<ScoreRow>* scores) {
  TrialResult out;
  out.trial = trial + 1;
  out.seed = seeds.env;

  LoopSetup setup = make_setup(cfg, seeds, env.max_abs_mean_reward());

  FixedPolicy policy;
  std::vector<double> q_true_table, psi;
  TableMdp table;
  CheckpointFn checkpoint;
  std::vector<ScoreRow> local_scores;
  if (cfg.mode == RunMode::mse) {
    if constexpr (requires { env.to_table(); }) {
      Rng policy_rng(seeds.policy);
      policy = FixedPolicy::epsilon_deterministic(env.state_count(), env.action_count(),
                                                  cfg.sarsa.epsilon, policy_rng);
      setup.fixed_policy = &policy;
      table = env.to_table();
      q_true_table = true_q(table, policy, cfg.sarsa.gamma);
      psi = stationary_distribution(table, policy, env.initial_state());
      const int S = env.state_count(), A = env.action_count();
      checkpoint = [&, S, A](std::int64_t iter, const WeightMatrix& theta,
                             const OrderedPartition* part) {
        std::vector<double> q_hat(static_cast<std::size_t>(S) * A);
        for (int s = 1; s <= S; ++s) {
          const int cell = part ? part->cell_of(s) : s;
          for (int a = 1; a <= A; ++a)
            q_hat[static_cast<std::size_t>(s - 1) * A + (a - 1)] = theta.q(cell, a);
        }
        ScoreRow row;
        row.trial = trial + 1;
        row.checkpoint = iter;
        row.mse = score_mse(q_hat, q_true_table, psi, policy);
        row.sqrt_mse = std::sqrt(row.mse);
        row.l = score_l(q_hat, table, policy, psi, cfg.sarsa.gamma);
        row.l_tilde = score_l_tilde(q_hat, table, policy, psi, cfg.sarsa.gamma);
        local_scores.push_back(row);
      };
    } else {
      throw ConfigError("config: mode: mse requires a table-backed family");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  LoopResult loop = run_loop(env, setup, checkpoint, cfg.mode == RunMode::mse ? cfg.checkpoint_every : 0);
  const auto t1 = std::chrono::steady_clock::now();

  out.window_avg_reward = std::move(loop.window_avg_reward);
  out.final_reward = loop.measured_iterations > 0
                         ? loop.measured_reward / static_cast<double>(loop.measured_iterations)
                         : 0.0;
  out.repartitions = loop.repartitions;
  out.theta_soft_bound_ok = loop.theta_within_soft_bound;
  out.us_per_iter =
      cfg.iterations > 0
          ? std::chrono::duration<double, std::micro>(t1 - t0).count() / cfg.iterations
          : 0.0;

  if (cfg.mode == RunMode::mse) {
    double sum = 0.0;
    int count = 0;
    for (const ScoreRow& row : local_scores) {
      if (row.checkpoint > setup.measure_from) {
        sum += row.sqrt_mse;
        ++count;
      }
    }
    out.sqrt_mse = count > 0 ? sum / count : 0.0;
    *scores = std::move(local_scores);
  }
  return out;
}

template <class Sampler>
ExperimentReport run_with_family(const ExperimentConfig& cfg, const Sampler& sample_env) {
  ExperimentReport report;
  report.config = cfg;
  report.trials.resize(cfg.trials);
  std::vector<std::vector<ScoreRow>> scores(cfg.trials);

  std::atomic<int> next{0};
  auto body = [&] {
    for (int i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
      const TrialSeeds seeds = trial_seeds(cfg.seed, i);
      Rng env_rng(seeds.env);
      const auto env = sample_env(env_rng);
      report.trials[i] = run_trial(env, cfg, i, seeds, &scores[i]);
    }
  };
  const int workers = std::max(1, std::min(worker_count(), cfg.trials));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();

  for (auto& rows : scores)
    report.scores.insert(report.scores.end(), rows.begin(), rows.end());

  std::vector<double> finals, mses;
  for (const auto& t : report.trials) {
    finals.push_back(t.final_reward);
    if (cfg.mode == RunMode::mse) mses.push_back(t.sqrt_mse);
  }
  report.final_reward = mean_ci(finals, cfg.ci_level);
  if (cfg.mode == RunMode::mse) report.sqrt_mse = mean_ci(mses, cfg.ci_level);
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  cfg.validate();
  switch (cfg.family) {
    case EnvFamily::garnet:
      return run_with_family(cfg, [&](Rng& rng) { return Garnet::sample(cfg.garnet, rng); });
    case EnvFamily::gridworld:
      return run_with_family(cfg, [&](Rng& rng) { return Gridworld::sample(cfg.grid, rng); });
    default:
      return run_with_family(cfg, [&](Rng& rng) { return Logistics::sample(cfg.logistics, rng); });
  }
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void emit_results(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  write_file(out_dir + "/config.resolved.cfg", report.config.serialize());

  const bool mse = report.config.mode == RunMode::mse;
  {
    std::ostringstream csv;
    csv << "# pasa-results v1\n";
    csv << "row,trial,seed,final_reward,final_reward_ci_half,sqrt_mse,sqrt_mse_ci_half,"
           "repartitions,soft_bound_ok\n";
    for (const auto& t : report.trials) {
      csv << "trial," << t.trial << "," << t.seed << "," << format_real(t.final_reward) << ",,"
          << (mse ? format_real(t.sqrt_mse) : "") << ",," << t.repartitions << ","
          << (t.theta_soft_bound_ok ? 1 : 0) << "\n";
    }
    csv << "aggregate,,," << format_real(report.final_reward.mean) << ","
        << format_real(report.final_reward.half_width) << ","
        << (mse ? format_real(report.sqrt_mse.mean) : "") << ","
        << (mse ? format_real(report.sqrt_mse.half_width) : "") << ",,\n";
    write_file(out_dir + "/results.csv", csv.str());
  }

  {
    // per-window mean reward with a CI across trials, for curve plotting
    std::ostringstream csv;
    csv << "# pasa-plot v1\n";
    csv << "window,iter_end,mean_reward,ci_lo,ci_hi\n";
    std::size_t windows = 0;
    for (const auto& t : report.trials) windows = std::max(windows, t.window_avg_reward.size());
    for (std::size_t w = 0; w < windows; ++w) {
      std::vector<double> vals;
      for (const auto& t : report.trials)
        if (w < t.window_avg_reward.size()) vals.push_back(t.window_avg_reward[w]);
      const MeanCi ci = mean_ci(vals, report.config.ci_level);
      const std::int64_t iter_end =
          static_cast<std::int64_t>(w + 1) * report.config.iterations /
          static_cast<std::int64_t>(windows);
      csv << (w + 1) << "," << iter_end << "," << format_real(ci.mean) << ","
          << format_real(ci.lo) << "," << format_real(ci.hi) << "\n";
    }
    write_file(out_dir + "/plot.csv", csv.str());
  }

  if (mse) {
    std::ostringstream csv;
    csv << "# pasa-mse-scores v1\n";
    csv << "trial,checkpoint,sqrt_mse,mse,l,l_tilde\n";
    for (const auto& row : report.scores) {
      csv << row.trial << "," << row.checkpoint << "," << format_real(row.sqrt_mse) << ","
          << format_real(row.mse) << "," << format_real(row.l) << ","
          << format_real(row.l_tilde) << "\n";
    }
    write_file(out_dir + "/mse_scores.csv", csv.str());
  }
}

ParsedResults parse_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "# pasa-results v1") throw IoError(path + ": unexpected schema line '" + line + "'");
  std::getline(in, line);  // header
  ParsedResults out;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    fields.resize(9);
    if (fields[0] == "trial") {
      out.final_reward.push_back(std::stod(fields[3]));
      if (!fields[5].empty()) out.sqrt_mse.push_back(std::stod(fields[5]));
    } else if (fields[0] == "aggregate") {
      out.aggregate_final_reward = std::stod(fields[3]);
      if (!fields[5].empty()) out.aggregate_sqrt_mse = std::stod(fields[5]);
    }
  }
  return out;
}

namespace {

template <class Env>
double timed_pass_us(const Env& env, const LoopSetup& setup) {
  const auto t0 = std::chrono::steady_clock::now();
  (void)run_loop(env, setup);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::micro>(t1 - t0).count() /
         static_cast<double>(setup.iterations);
}

// Alternate the variants within each round and keep each variant's
// fastest pass; the overhead ratio is the smallest per-round paired
// ratio, which cancels frequency and scheduler drift.
template <class Env>
TimingReport time_family(const Env& env, const ExperimentConfig& cfg) {
  TimingReport report;
  report.iterations = cfg.iterations;
  if (cfg.iterations <= 0) return report;  // reported as not applicable
  const TrialSeeds seeds = trial_seeds(cfg.seed, 0);
  LoopSetup setup = make_setup(cfg, seeds, env.max_abs_mean_reward());

  const bool with_tabular =
      static_cast<std::int64_t>(env.state_count()) * env.action_count() <= 4'000'000;
  auto pass = [&](AgentVariant variant) {
    setup.variant = variant;
    LoopSetup warm = setup;
    warm.iterations = std::max<std::int64_t>(1, setup.iterations / 10);
    (void)run_loop(env, warm);
    return timed_pass_us(env, setup);
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double best_fixed = kInf, best_pasa = kInf, best_tabular = kInf, best_ratio = kInf;
  for (int round = 0; round < 5; ++round) {
    double fixed_us, pasa_us;
    if (round % 2 == 0) {
      fixed_us = pass(AgentVariant::fixed_agg);
      pasa_us = pass(AgentVariant::pasa_agg);
    } else {
      pasa_us = pass(AgentVariant::pasa_agg);
      fixed_us = pass(AgentVariant::fixed_agg);
    }
    best_fixed = std::min(best_fixed, fixed_us);
    best_pasa = std::min(best_pasa, pasa_us);
    best_ratio = std::min(best_ratio, pasa_us / fixed_us);
    if (with_tabular) best_tabular = std::min(best_tabular, pass(AgentVariant::tabular));
  }
  report.us_fixed = best_fixed;
  report.us_pasa = best_pasa;
  report.us_tabular = with_tabular ? best_tabular : 0.0;
  report.overhead_pct = 100.0 * (best_ratio - 1.0);
  report.valid = true;
  return report;
}

}  // namespace

TimingReport measure_iteration_cost(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  cfg.validate();
  const TrialSeeds seeds = trial_seeds(cfg.seed, 0);
  Rng env_rng(seeds.env);
  switch (cfg.family) {
    case EnvFamily::garnet:
      return time_family(Garnet::sample(cfg.garnet, env_rng), cfg);
    case EnvFamily::gridworld:
      return time_family(Gridworld::sample(cfg.grid, env_rng), cfg);
    default:
      return time_family(Logistics::sample(cfg.logistics, env_rng), cfg);
  }
}

}  // namespace pasa
