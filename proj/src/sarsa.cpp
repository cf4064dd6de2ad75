#include "pasa/sarsa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace pasa {

void SarsaParams::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("sarsa: eta must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("sarsa: gamma must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("sarsa: epsilon must lie in [0, 1]");
}

double WeightMatrix::max_abs() const {
  double m = 0.0;
  for (double v : theta_) m = std::max(m, std::fabs(v));
  return m;
}

bool WeightMatrix::all_finite() const {
  for (double v : theta_)
    if (!std::isfinite(v)) return false;
  return true;
}

void WeightMatrix::dump(std::ostream& out) const {
  char buf[40];
  for (int k = 1; k <= cells_; ++k) {
    const double* r = row(k);
    for (int j = 0; j < actions_; ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g", j ? " " : "", r[j]);
      out << buf;
    }
    out << "\n";
  }
}

int greedy_action(const WeightMatrix& theta, int cell) {
  const double* r = theta.row(cell);
  int best = 1;
  for (int j = 1; j < theta.action_count(); ++j)
    if (r[j] > r[best - 1]) best = j + 1;
  return best;
}

int select_action(const WeightMatrix& theta, int cell, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform01() < epsilon)
    return 1 + static_cast<int>(rng.uniform_below(theta.action_count()));
  return greedy_action(theta, cell);
}

double action_probability(const WeightMatrix& theta, int cell, double epsilon, int action) {
  const double uniform = epsilon / theta.action_count();
  return uniform + (action == greedy_action(theta, cell) ? 1.0 - epsilon : 0.0);
}

double td_update(WeightMatrix& theta, const SarsaParams& params, int cell, int action,
                 double reward, int next_cell, int next_action, double pi_prob) {
  double d = theta.q(next_cell, next_action);
  if (params.reciprocal_pi_weighting) {
    if (!(pi_prob > 0.0))
      throw std::invalid_argument("td_update: reciprocal weighting needs pi_prob > 0");
    d /= pi_prob;
  }
  double* cur = theta.row(cell) + (action - 1);
  *cur += params.eta * (reward + params.gamma * d - *cur);
  return d;
}

void transfer_weights(WeightMatrix& theta, const std::vector<Interval>& old_cells,
                      const std::vector<Interval>& new_cells, double eta,
                      const std::optional<LastTransition>& last) {
  const int A = theta.action_count();
  const int n_new = static_cast<int>(new_cells.size());
  const int n_old = static_cast<int>(old_cells.size());
  if (theta.cell_count() < std::max(n_new, n_old))
    throw std::invalid_argument("transfer_weights: matrix smaller than partitions");

  // position order of old cells for overlap sweeps
  std::vector<int> order(n_old);
  std::iota(order.begin(), order.end(), 0);
  order.erase(std::remove_if(order.begin(), order.end(),
                             [&](int k) { return old_cells[k].empty(); }),
              order.end());
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return old_cells[a].lo < old_cells[b].lo; });

  int last_old = 0;
  if (last) {
    for (int k : order)
      if (old_cells[k].contains(last->state)) { last_old = k + 1; break; }
  }

  std::vector<double> column(n_old);
  for (int a = 1; a <= A; ++a) {
    for (int k = 0; k < n_old; ++k) column[k] = theta.q(k + 1, a);
    for (int j = 0; j < n_new; ++j) {
      const Interval& iv = new_cells[j];
      if (iv.empty()) continue;
      // old cells overlapping [iv.lo, iv.hi]
      auto it = std::partition_point(order.begin(), order.end(),
                                     [&](int k) { return old_cells[k].hi < iv.lo; });
      double sum = 0.0;
      int count = 0;
      bool credit = false;
      for (; it != order.end() && old_cells[*it].lo <= iv.hi; ++it) {
        sum += column[*it];
        ++count;
        if (last_old == *it + 1) credit = true;
      }
      double v = count ? sum / count : column[j];
      if (credit && last && a == last->action) v += eta * last->d;
      theta.set(j + 1, a, v);
    }
  }
}

}  // namespace pasa
