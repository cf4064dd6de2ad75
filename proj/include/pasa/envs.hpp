#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pasa/rng.hpp"
#include "pasa/table_mdp.hpp"

namespace pasa {

enum class EnvFamily { garnet, gridworld, logistics };

// Environments share one shape: state_count/action_count/initial_state
// plus step(s, a, rng, &reward) -> next state, all 1-based.  The run loop
// is templated on the concrete type, so no virtual dispatch per step.

struct GarnetSpec {
  int S = 250;
  int A = 2;
  double zeta = 30.0;   // expected number of rewarding pairs
  double delta = 0.0;   // transition noise: mix of uniform into the deterministic map

  void validate() const;
};

/// Random MDP with uniformly sampled successors and sparse rewards of
/// value S placed with probability zeta/S per state-action pair.
class Garnet {
 public:
  static Garnet sample(const GarnetSpec& spec, Rng& rng);

  int state_count() const { return spec_.S; }
  int action_count() const { return spec_.A; }
  int initial_state() const { return initial_; }
  const GarnetSpec& spec() const { return spec_; }

  int step(int s, int a, Rng& rng, double* reward) const {
    const std::size_t idx = static_cast<std::size_t>(s - 1) * spec_.A + (a - 1);
    *reward = reward_[idx];
    if (spec_.delta > 0.0 && rng.uniform01() < spec_.delta)
      return 1 + static_cast<int>(rng.uniform_below(spec_.S));
    return succ_[idx];
  }

  int successor(int s, int a) const {
    return succ_[static_cast<std::size_t>(s - 1) * spec_.A + (a - 1)];
  }
  double reward_value(int s, int a) const {
    return reward_[static_cast<std::size_t>(s - 1) * spec_.A + (a - 1)];
  }
  double max_abs_mean_reward() const;

  TableMdp to_table() const;

  /// Versioned text serialisation so oracle runs can reuse exact instances.
  void dump(std::ostream& out) const;
  static Garnet load(std::istream& in);

 private:
  GarnetSpec spec_;
  std::vector<std::int32_t> succ_;
  std::vector<double> reward_;
  int initial_ = 1;
};

struct GridworldSpec {
  int N = 32;
  int r = 24;                    // number of reward positions
  bool random_teleport = false;  // entering a reward position lands anywhere

  void validate() const;
};

/// N-by-N grid, actions up/down/left/right (1..4), moves into walls keep
/// the position.  Attempting to enter a reward position pays 1 and
/// teleports to that position's paired start (or anywhere when
/// random_teleport).  State index is (row-1)*N + col.
class Gridworld {
 public:
  static Gridworld sample(const GridworldSpec& spec, Rng& rng);

  int state_count() const { return spec_.N * spec_.N; }
  int action_count() const { return 4; }
  int initial_state() const { return initial_; }
  const GridworldSpec& spec() const { return spec_; }

  int step(int s, int a, Rng& rng, double* reward) const {
    const std::size_t idx = static_cast<std::size_t>(s - 1) * 4 + (a - 1);
    *reward = reward_[idx];
    const int t = succ_[idx];
    if (t < 0) return 1 + static_cast<int>(rng.uniform_below(state_count()));
    return t;
  }

  double max_abs_mean_reward() const { return 1.0; }
  const std::vector<int>& reward_positions() const { return reward_pos_; }
  const std::vector<int>& start_positions() const { return start_pos_; }

  TableMdp to_table() const;

 private:
  GridworldSpec spec_;
  std::vector<std::int32_t> succ_;  // -1 marks a uniform teleport
  std::vector<double> reward_;
  std::vector<int> reward_pos_, start_pos_;
  int initial_ = 1;
};

struct LogisticsSpec {
  // One depot feeding four stores; a single truck carries one unit at a
  // time.  Randomness is confined to the prior draws below.
  std::array<int, 5> capacities{12, 3, 4, 3, 6};  // depot first
  double order_cost = -2.0;
  double sale_revenue = 7.0;
  int sales_rate = 1;
  double transport_cost_lo = -1.2, transport_cost_hi = -0.6;
  std::array<std::pair<double, double>, 5> rent_range{{{-0.2, -0.05},
                                                       {-0.05, -0.01},
                                                       {-0.08, -0.03},
                                                       {-0.08, -0.01},
                                                       {-0.4, -0.001}}};
};

/// Stock levels and truck position as seen by the agent: the state is the
/// 18-bit concatenation of the component binary expansions.
struct LogisticsState {
  int depot = 0;
  std::array<int, 4> store{0, 0, 0, 0};
  int truck_location = 0;  // 0 = depot, 1..4 = stores
  int truck_loaded = 0;
};

class Logistics {
 public:
  static Logistics sample(const LogisticsSpec& spec, Rng& rng);

  int state_count() const { return 1 << 18; }
  int action_count() const { return 8; }  // order, load, unload, move x5
  int initial_state() const { return initial_; }
  const LogisticsSpec& spec() const { return spec_; }
  double transport_cost() const { return transport_cost_; }
  const std::array<double, 5>& rents() const { return rent_; }

  int step(int s, int a, Rng& rng, double* reward) const;

  double max_abs_mean_reward() const;

  /// Number of distinct occupiable states (the capacity product).
  static std::int64_t reachable_state_count(const LogisticsSpec& spec);
  bool is_reachable(const LogisticsState& st) const;

  static int encode(const LogisticsState& st);        // 1-based state index
  static LogisticsState decode(int state_index);      // throws if no valid decoding

 private:
  LogisticsSpec spec_;
  double transport_cost_ = 0.0;
  std::array<double, 5> rent_{};
  int initial_ = 1;
};

}  // namespace pasa
