#include <numeric>
#include <stdexcept>

#include "pasa/envs.hpp"

namespace pasa {

void GridworldSpec::validate() const {
  if (N < 2) throw std::invalid_argument("gridworld: need N >= 2");
  if (r < 1) throw std::invalid_argument("gridworld: need at least one reward position");
  if (2 * r > N * N)
    throw std::invalid_argument("gridworld: reward and start positions do not fit on the grid");
}

Gridworld Gridworld::sample(const GridworldSpec& spec, Rng& rng) {
  spec.validate();
  Gridworld env;
  env.spec_ = spec;
  const int S = spec.N * spec.N;

  // distinct placement of r reward and r start cells: partial Fisher-Yates
  std::vector<int> cells(S);
  std::iota(cells.begin(), cells.end(), 1);
  for (int i = 0; i < 2 * spec.r; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(S - i));
    std::swap(cells[i], cells[j]);
  }
  env.reward_pos_.assign(cells.begin(), cells.begin() + spec.r);
  env.start_pos_.assign(cells.begin() + spec.r, cells.begin() + 2 * spec.r);

  std::vector<int> paired_start(S + 1, 0);  // reward cell -> its start cell
  for (int i = 0; i < spec.r; ++i) paired_start[env.reward_pos_[i]] = env.start_pos_[i];

  env.succ_.resize(static_cast<std::size_t>(S) * 4);
  env.reward_.resize(static_cast<std::size_t>(S) * 4);
  const int N = spec.N;
  for (int s = 1; s <= S; ++s) {
    const int row = (s - 1) / N;
    const int col = (s - 1) % N;
    for (int a = 1; a <= 4; ++a) {
      int tr = row, tc = col;
      switch (a) {
        case 1: tr = row - 1; break;  // up
        case 2: tr = row + 1; break;  // down
        case 3: tc = col - 1; break;  // left
        case 4: tc = col + 1; break;  // right
      }
      const std::size_t idx = static_cast<std::size_t>(s - 1) * 4 + (a - 1);
      if (tr < 0 || tr >= N || tc < 0 || tc >= N) {
        env.succ_[idx] = s;  // boundary bump
        env.reward_[idx] = 0.0;
        continue;
      }
      const int target = tr * N + tc + 1;
      if (paired_start[target] != 0) {
        env.reward_[idx] = 1.0;
        env.succ_[idx] = spec.random_teleport ? -1 : paired_start[target];
      } else {
        env.reward_[idx] = 0.0;
        env.succ_[idx] = target;
      }
    }
  }

  // start anywhere that is not a reward position
  int pick = 1 + static_cast<int>(rng.uniform_below(S - spec.r));
  for (int s = 1; s <= S; ++s) {
    if (paired_start[s] != 0) continue;
    if (--pick == 0) { env.initial_ = s; break; }
  }
  return env;
}

TableMdp Gridworld::to_table() const {
  TableMdp t;
  t.S = state_count();
  t.A = 4;
  const std::size_t n = succ_.size();
  t.rows.resize(n);
  t.rewards.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (succ_[i] < 0) {
      t.rows[i].uniform_mix = 1.0;
    } else {
      t.rows[i].entries.push_back({succ_[i], 1.0});
    }
    t.rewards[i] = RewardDist::constant(reward_[i]);
  }
  return t;
}

}  // namespace pasa
