#pragma once

#include <cstdint>
#include <vector>

namespace pasa {

/// One transition row: explicit (state, probability) entries plus an
/// optional uniform component spreading `uniform_mix` mass over all S
/// states.  Entry probabilities plus uniform_mix sum to one.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;
  double uniform_mix = 0.0;
};

/// Discrete reward distribution for one state-action pair.
struct RewardDist {
  std::vector<std::pair<double, double>> outcomes;  // (value, probability)

  double mean() const {
    double m = 0.0;
    for (auto [v, p] : outcomes) m += v * p;
    return m;
  }
  double variance() const {
    const double m = mean();
    double v2 = 0.0;
    for (auto [v, p] : outcomes) v2 += (v - m) * (v - m) * p;
    return v2;
  }
  static RewardDist constant(double v) { return {{{v, 1.0}}}; }
};

/// Dense-exact MDP view used by the evaluation oracles: every transition
/// row and reward distribution is available in closed form.
struct TableMdp {
  int S = 0;
  int A = 0;
  std::vector<SparseRow> rows;       // index (s-1)*A + (a-1)
  std::vector<RewardDist> rewards;   // same indexing

  const SparseRow& row(int s, int a) const {
    return rows[static_cast<std::size_t>(s - 1) * A + (a - 1)];
  }
  const RewardDist& reward(int s, int a) const {
    return rewards[static_cast<std::size_t>(s - 1) * A + (a - 1)];
  }
  double reward_mean(int s, int a) const { return reward(s, a).mean(); }

  double max_abs_mean_reward() const;
  /// Throws std::invalid_argument unless every row sums to 1 within 1e-12.
  void validate() const;
};

}  // namespace pasa
