#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "pasa/harness.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::int64_t iterations = 0;
  std::string agent;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& default_out) {
  flags.out_dir = default_out;
  cmd->add_option("--config", flags.config_path, "experiment config file (key = value lines)");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed")->each([&](const std::string&) {
    flags.seed_set = true;
  });
  cmd->add_option("--trials", flags.trials, "trial count override");
  cmd->add_option("--iterations", flags.iterations, "iterations per trial override");
  cmd->add_option("--agent", flags.agent, "agent variant: tabular|fixed|pasa")
      ->check(CLI::IsMember({"tabular", "fixed", "pasa"}));
}

void apply_common(pasa::ExperimentConfig& cfg, const CommonFlags& flags) {
  if (!flags.config_path.empty()) cfg.apply_file(flags.config_path);
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.trials > 0) cfg.trials = flags.trials;
  if (flags.iterations > 0) cfg.iterations = flags.iterations;
  if (!flags.agent.empty()) cfg.set("agent", flags.agent);
}

// Desk-scale defaults; the paper-scale parameter set uses far longer runs
// (the visit-estimate step size scales with trial length accordingly).
pasa::ExperimentConfig base_defaults() {
  pasa::ExperimentConfig cfg;
  cfg.sarsa.eta = 3e-4;
  cfg.sarsa.gamma = 0.98;
  cfg.sarsa.epsilon = 0.01;
  cfg.pasa.nu = 50000;
  cfg.pasa.vartheta = 0.9;
  cfg.pasa.threshold_mode = pasa::ThresholdMode::multiplicative;
  cfg.pasa.counter_mode = pasa::CounterMode::batched;
  cfg.pasa.varsigma = 2e-7;
  return cfg;
}

int run_standard(const pasa::ExperimentConfig& cfg, const std::string& out_dir) {
  pasa::ExperimentReport report = pasa::run_experiment(cfg);
  pasa::emit_results(report, out_dir);
  std::printf("family=%s agent=%s trials=%d iterations=%lld\n", pasa::to_string(cfg.family),
              pasa::to_string(cfg.agent), cfg.trials,
              static_cast<long long>(cfg.iterations));
  std::printf("final_reward mean=%s ci_half=%s\n", fmt(report.final_reward.mean).c_str(),
              fmt(report.final_reward.half_width).c_str());
  if (cfg.mode == pasa::RunMode::mse)
    std::printf("sqrt_mse mean=%s ci_half=%s\n", fmt(report.sqrt_mse.mean).c_str(),
                fmt(report.sqrt_mse.half_width).c_str());
  std::printf("results written to %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive state aggregation experiment harness"};
  app.require_subcommand(1);

  CommonFlags perf_flags, mse_flags, grid_flags, logi_flags, timing_flags;

  CLI::App* perf = app.add_subcommand("garnet-perf", "GARNET learning performance runs");
  add_common(perf, perf_flags, "pasa-out/garnet-perf");

  CLI::App* mse = app.add_subcommand("garnet-mse", "GARNET fixed-policy value error runs");
  add_common(mse, mse_flags, "pasa-out/garnet-mse");

  CLI::App* grid = app.add_subcommand("gridworld", "Gridworld learning performance runs");
  add_common(grid, grid_flags, "pasa-out/gridworld");

  CLI::App* logi = app.add_subcommand("logistics", "Logistics learning performance runs");
  add_common(logi, logi_flags, "pasa-out/logistics");

  CLI::App* cyc = app.add_subcommand("cycle-stats", "Cycle statistics of random successor maps");
  int cyc_S = 10000;
  int cyc_samples = 10000;
  std::uint64_t cyc_seed = 1;
  std::string cyc_out = "pasa-out/cycle-stats";
  cyc->add_option("--S", cyc_S, "state count");
  cyc->add_option("--samples", cyc_samples, "number of sampled maps");
  cyc->add_option("--seed", cyc_seed, "seed");
  cyc->add_option("--out", cyc_out, "output directory");

  CLI::App* timing = app.add_subcommand("timing", "Per-iteration cost of fixed vs adaptive agents");
  add_common(timing, timing_flags, "pasa-out/timing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (perf->parsed()) {
      pasa::ExperimentConfig cfg = base_defaults();
      cfg.family = pasa::EnvFamily::garnet;
      cfg.mode = pasa::RunMode::performance;
      cfg.garnet = {250, 2, 30.0, 0.0};
      cfg.X = 70;
      cfg.trials = 10;
      cfg.iterations = 5'000'000;
      apply_common(cfg, perf_flags);
      return run_standard(cfg, perf_flags.out_dir);
    }
    if (mse->parsed()) {
      pasa::ExperimentConfig cfg = base_defaults();
      cfg.family = pasa::EnvFamily::garnet;
      cfg.mode = pasa::RunMode::mse;
      cfg.garnet = {250, 2, 30.0, 0.0};
      cfg.X = 70;
      cfg.trials = 20;
      cfg.iterations = 20'000'000;
      apply_common(cfg, mse_flags);
      return run_standard(cfg, mse_flags.out_dir);
    }
    if (grid->parsed()) {
      pasa::ExperimentConfig cfg = base_defaults();
      cfg.family = pasa::EnvFamily::gridworld;
      cfg.mode = pasa::RunMode::performance;
      cfg.grid = {32, 24, false};
      cfg.X = 140;
      cfg.trials = 10;
      cfg.iterations = 5'000'000;
      apply_common(cfg, grid_flags);
      return run_standard(cfg, grid_flags.out_dir);
    }
    if (logi->parsed()) {
      pasa::ExperimentConfig cfg = base_defaults();
      cfg.family = pasa::EnvFamily::logistics;
      cfg.mode = pasa::RunMode::performance;
      cfg.X = 140;
      cfg.trials = 10;
      cfg.iterations = 5'000'000;
      apply_common(cfg, logi_flags);
      return run_standard(cfg, logi_flags.out_dir);
    }
    if (cyc->parsed()) {
      pasa::Rng rng(cyc_seed);
      const pasa::CycleStats st = pasa::cycle_statistics(cyc_S, cyc_samples, rng);
      const double predicted_mean = std::sqrt(3.14159265358979323846 * cyc_S / 8.0);
      const double predicted_var = (32.0 - 8.0 * 3.14159265358979323846) / 24.0 * cyc_S;
      std::error_code ec;
      std::filesystem::create_directories(cyc_out, ec);
      if (ec) throw pasa::IoError("cannot create output directory " + cyc_out);
      std::ofstream csv(cyc_out + "/cycle_stats.csv", std::ios::binary);
      if (!csv) throw pasa::IoError("cannot write " + cyc_out + "/cycle_stats.csv");
      csv << "# pasa-cycle-stats v1\n";
      csv << "S,samples,mean_c1,var_c1,mean_l1,mean_c,predicted_mean_c1,predicted_var_c1\n";
      csv << cyc_S << "," << cyc_samples << "," << fmt(st.mean_c1) << "," << fmt(st.var_c1) << ","
          << fmt(st.mean_l1) << "," << fmt(st.mean_c) << "," << fmt(predicted_mean) << ","
          << fmt(predicted_var) << "\n";
      std::printf("S=%d samples=%d\n", cyc_S, cyc_samples);
      std::printf("mean_c1=%s (leading order %s)\n", fmt(st.mean_c1).c_str(),
                  fmt(predicted_mean).c_str());
      std::printf("var_c1=%s (leading order %s)\n", fmt(st.var_c1).c_str(),
                  fmt(predicted_var).c_str());
      std::printf("mean_l1=%s mean_c=%s\n", fmt(st.mean_l1).c_str(), fmt(st.mean_c).c_str());
      std::printf("results written to %s\n", cyc_out.c_str());
      return 0;
    }
    if (timing->parsed()) {
      pasa::ExperimentConfig cfg = base_defaults();
      cfg.family = pasa::EnvFamily::garnet;
      cfg.mode = pasa::RunMode::performance;
      cfg.garnet = {8000, 2, 30.0, 0.0};
      cfg.X = 380;
      cfg.trials = 1;
      cfg.iterations = 2'000'000;
      apply_common(cfg, timing_flags);
      cfg.resolve();
      cfg.validate();
      // measurements go to stdout only; files under --out stay deterministic
      std::error_code ec;
      std::filesystem::create_directories(timing_flags.out_dir, ec);
      if (ec) throw pasa::IoError("cannot create output directory " + timing_flags.out_dir);
      std::ofstream echo(timing_flags.out_dir + "/config.resolved.cfg", std::ios::binary);
      if (!echo) throw pasa::IoError("cannot write config echo in " + timing_flags.out_dir);
      echo << cfg.serialize();
      echo.close();
      const pasa::TimingReport report = pasa::measure_iteration_cost(cfg);
      if (!report.valid) {
        std::printf("timing: not applicable (zero iterations)\n");
        return 0;
      }
      std::printf("iterations=%lld\n", static_cast<long long>(report.iterations));
      std::printf("us_per_iter tabular=%.4f fixed=%.4f pasa=%.4f\n", report.us_tabular,
                  report.us_fixed, report.us_pasa);
      std::printf("pasa_overhead_pct=%.2f\n", report.overhead_pct);
      return 0;
    }
  } catch (const pasa::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pasa::CapacityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const pasa::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
