#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "pasa/partition.hpp"
#include "pasa/rng.hpp"

namespace pasa {

struct SarsaParams {
  double eta = 3e-4;     // step size
  double gamma = 0.98;   // discount
  double epsilon = 0.01; // exploration rate
  bool reciprocal_pi_weighting = false;  // weight the bootstrap term by 1/pi(a'|s')
  bool weight_transfer = true;           // carry weights across repartitions

  void validate() const;
};

/// Cell-by-action weight matrix theta (zero initialised).  With one cell
/// per state this is the tabular value table.
class WeightMatrix {
 public:
  WeightMatrix(int cells, int actions)
      : cells_(cells), actions_(actions), theta_(static_cast<std::size_t>(cells) * actions, 0.0) {}

  int cell_count() const { return cells_; }
  int action_count() const { return actions_; }

  double q(int cell, int action) const { return theta_[index(cell, action)]; }
  void set(int cell, int action, double v) { theta_[index(cell, action)] = v; }

  const double* row(int cell) const { return theta_.data() + static_cast<std::size_t>(cell - 1) * actions_; }
  double* row(int cell) { return theta_.data() + static_cast<std::size_t>(cell - 1) * actions_; }

  double max_abs() const;
  bool all_finite() const;

  /// Dense line-oriented snapshot, one row per cell.
  void dump(std::ostream& out) const;

 private:
  std::size_t index(int cell, int action) const {
    return static_cast<std::size_t>(cell - 1) * actions_ + (action - 1);
  }
  int cells_;
  int actions_;
  std::vector<double> theta_;
};

/// Lowest-index argmax of the row.
int greedy_action(const WeightMatrix& theta, int cell);

/// Epsilon-greedy selection: the greedy action with probability
/// 1 - epsilon, otherwise uniform.
int select_action(const WeightMatrix& theta, int cell, double epsilon, Rng& rng);

/// Probability that select_action picks `action` in this cell.
double action_probability(const WeightMatrix& theta, int cell, double epsilon, int action);

/// Temporal difference update for one transition.  pi_prob is the
/// probability the behaviour policy assigned to next_action; it only
/// enters when reciprocal weighting of the bootstrap term is enabled.
/// Returns the bootstrap value d that was used.
double td_update(WeightMatrix& theta, const SarsaParams& params, int cell, int action,
                 double reward, int next_cell, int next_action, double pi_prob);

struct LastTransition {
  int state = 0;
  int action = 0;
  double d = 0.0;
};

/// Rebuilds theta for a changed partition: each new cell's row becomes the
/// mean of the rows of the old cells its interval overlaps, so refinements
/// copy the parent row exactly and coarser cells average their parts.
/// When `last` is given, eta * d is additionally credited at the last
/// pre-change state-action for every new cell overlapping the old cell
/// that contained it.  Scratch memory is one column vector; partitions are
/// taken as interval lists.
void transfer_weights(WeightMatrix& theta, const std::vector<Interval>& old_cells,
                      const std::vector<Interval>& new_cells, double eta,
                      const std::optional<LastTransition>& last = std::nullopt);

}  // namespace pasa
