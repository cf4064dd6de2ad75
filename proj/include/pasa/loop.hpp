#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pasa/eval.hpp"
#include "pasa/pasa.hpp"
#include "pasa/sarsa.hpp"

namespace pasa {

enum class AgentVariant { tabular, fixed_agg, pasa_agg };

struct LoopSetup {
  AgentVariant variant = AgentVariant::pasa_agg;
  SarsaParams sarsa;
  PasaParams pasa;               // pasa_agg only
  int X = 0;                     // cells (aggregated variants)
  int X0 = 0;                    // base cells (pasa_agg)
  std::int64_t iterations = 0;
  int window_count = 100;
  std::int64_t measure_from = 0;  // iterations at or past this index feed measured_reward
  const FixedPolicy* fixed_policy = nullptr;  // policy evaluation mode when set
  std::uint64_t agent_seed = 1;
  std::uint64_t env_noise_seed = 2;
  double reward_bound = 0.0;  // R_m of the environment, for the divergence monitor
};

struct LoopResult {
  std::vector<double> window_avg_reward;
  double total_reward = 0.0;
  double measured_reward = 0.0;
  std::int64_t measured_iterations = 0;
  std::int64_t iterations = 0;
  std::int64_t repartitions = 0;
  double max_abs_theta = 0.0;
  bool theta_within_soft_bound = true;
  WeightMatrix theta{1, 1};
  std::optional<OrderedPartition> partition;  // absent for tabular
};

using CheckpointFn =
    std::function<void(std::int64_t, const WeightMatrix&, const OrderedPartition*)>;

/// Continuing-task driver: T steps of act / observe / learn with no
/// episode resets.  For the adaptive variant each observed state also
/// feeds the aggregation layer, and when the partition changes the weight
/// rows are carried over before the update for the transition in flight
/// is applied against the new cells.  Fully determined by the seeds.
template <class Env>
LoopResult run_loop(const Env& env, const LoopSetup& setup, const CheckpointFn& checkpoint = {},
                    std::int64_t checkpoint_every = 0) {
  setup.sarsa.validate();
  const int S = env.state_count();
  const int A = env.action_count();
  const std::int64_t T = setup.iterations;
  if (T < 0) throw std::invalid_argument("run_loop: negative iteration count");

  const bool tabular = setup.variant == AgentVariant::tabular;
  const bool adaptive = setup.variant == AgentVariant::pasa_agg;
  const int X = tabular ? S : setup.X;
  if (!tabular && (X < 1 || X > S))
    throw std::invalid_argument("run_loop: need 1 <= X <= S for aggregated agents");

  LoopResult out;
  out.theta = WeightMatrix(X, A);
  WeightMatrix& theta = out.theta;

  std::optional<Pasa> driver;
  std::optional<OrderedPartition> fixed_partition;
  if (adaptive) {
    driver.emplace(S, setup.X0, X, setup.pasa);
  } else if (!tabular) {
    fixed_partition = OrderedPartition::base(S, X);  // equal cells, held fixed
  }
  const OrderedPartition* part =
      adaptive ? &driver->partition() : (tabular ? nullptr : &*fixed_partition);

  std::vector<Interval> live_cells;  // mirror for weight transfer
  if (adaptive) live_cells = part->cells();

  Rng agent_rng(setup.agent_seed);
  Rng env_rng(setup.env_noise_seed);

  const double soft_bound =
      setup.reward_bound > 0.0 ? setup.reward_bound / (1.0 - setup.sarsa.gamma) + 1.0 : 0.0;

  int s = env.initial_state();
  int cell_s = tabular ? s : part->cell_of(s);
  auto pick_action = [&](int state, int cell) {
    if (setup.fixed_policy) return setup.fixed_policy->sample(state, agent_rng);
    return select_action(theta, cell, setup.sarsa.epsilon, agent_rng);
  };
  auto prob_of = [&](int state, int cell, int action) {
    if (setup.fixed_policy) return setup.fixed_policy->prob(state, action);
    return action_probability(theta, cell, setup.sarsa.epsilon, action);
  };
  int a = pick_action(s, cell_s);

  const int windows = T > 0 ? static_cast<int>(std::min<std::int64_t>(setup.window_count, T)) : 0;
  out.window_avg_reward.reserve(windows);
  std::int64_t done = 0;
  int window = 0;
  double window_accum = 0.0;

  while (done < T) {
    std::int64_t stop = T;
    if (windows > 0) stop = std::min(stop, (window + 1) * T / windows);
    if (checkpoint_every > 0)
      stop = std::min(stop, (done / checkpoint_every + 1) * checkpoint_every);
    if (done < setup.measure_from) stop = std::min(stop, setup.measure_from);

    const bool batched = setup.pasa.counter_mode == CounterMode::batched;
    double segment_reward = 0.0;
    for (std::int64_t t = done; t < stop; ++t) {
      double r = 0.0;
      const int s_next = env.step(s, a, env_rng, &r);
      segment_reward += r;

      int cell_next;
      if (adaptive) {
        bool repartitioned;
        if (batched) {
          cell_next = driver->observe(s_next);
          repartitioned = cell_next < 0;
          if (repartitioned) cell_next = -cell_next;
        } else {
          repartitioned = driver->tick(s_next).has_value();
          cell_next = part->cell_of(s_next);
        }
        if (repartitioned) {
          ++out.repartitions;
          if (driver->last_report().partition_changed) {
            if (setup.sarsa.weight_transfer)
              transfer_weights(theta, live_cells, part->cells(), setup.sarsa.eta);
            live_cells = part->cells();
            cell_s = part->cell_of(s);
          }
        }
      } else {
        cell_next = tabular ? s_next : part->cell_of(s_next);
      }
      const int a_next = pick_action(s_next, cell_next);
      const double pi_prob = setup.sarsa.reciprocal_pi_weighting
                                 ? prob_of(s_next, cell_next, a_next)
                                 : 1.0;
      td_update(theta, setup.sarsa, cell_s, a, r, cell_next, a_next, pi_prob);
      s = s_next;
      cell_s = cell_next;
      a = a_next;
    }

    out.total_reward += segment_reward;
    window_accum += segment_reward;
    if (done >= setup.measure_from) {
      out.measured_reward += segment_reward;
      out.measured_iterations += stop - done;
    }
    done = stop;
    if (windows > 0 && done == (window + 1) * T / windows) {
      const std::int64_t w_lo = static_cast<std::int64_t>(window) * T / windows;
      out.window_avg_reward.push_back(window_accum / static_cast<double>(done - w_lo));
      window_accum = 0.0;
      ++window;
    }
    if (checkpoint && checkpoint_every > 0 && done % checkpoint_every == 0 && done > 0)
      checkpoint(done, theta, part);

    if (!theta.all_finite()) throw std::runtime_error("run_loop: weights diverged (non-finite)");
    out.max_abs_theta = std::max(out.max_abs_theta, theta.max_abs());
    if (soft_bound > 0.0 && out.max_abs_theta > soft_bound) out.theta_within_soft_bound = false;
  }

  out.iterations = T;
  if (!tabular) out.partition = *part;
  return out;
}

}  // namespace pasa
