#include "pasa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pasa {

int FixedPolicy::sample(int s, Rng& rng) const {
  double x = rng.uniform01();
  const std::size_t base = static_cast<std::size_t>(s - 1) * A;
  for (int a = 0; a < A - 1; ++a) {
    x -= pi[base + a];
    if (x < 0.0) return a + 1;
  }
  return A;
}

void FixedPolicy::validate() const {
  if (static_cast<std::size_t>(S) * A != pi.size())
    throw std::invalid_argument("policy: table size mismatch");
  for (int s = 1; s <= S; ++s) {
    double total = 0.0;
    for (int a = 1; a <= A; ++a) total += prob(s, a);
    if (std::fabs(total - 1.0) > 1e-12)
      throw std::invalid_argument("policy: row " + std::to_string(s) + " sums to " +
                                  std::to_string(total));
  }
}

double FixedPolicy::delta_pi() const {
  double min_peak = 1.0;
  for (int s = 1; s <= S; ++s) {
    double peak = 0.0;
    for (int a = 1; a <= A; ++a) peak = std::max(peak, prob(s, a));
    min_peak = std::min(min_peak, peak);
  }
  return 1.0 - min_peak;
}

FixedPolicy FixedPolicy::epsilon_deterministic(int S, int A, double epsilon, Rng& rng) {
  FixedPolicy p;
  p.S = S;
  p.A = A;
  p.pi.assign(static_cast<std::size_t>(S) * A, epsilon / A);
  for (int s = 0; s < S; ++s) {
    const int pick = static_cast<int>(rng.uniform_below(A));
    p.pi[static_cast<std::size_t>(s) * A + pick] += 1.0 - epsilon;
  }
  return p;
}

namespace {

// One application of the Bellman operator; vnext[s] = sum_a pi(a|s) q(s,a)
// is maintained alongside.
void apply_bellman(const TableMdp& mdp, const FixedPolicy& pi, double gamma,
                   const std::vector<double>& q, std::vector<double>& out,
                   std::vector<double>& v) {
  const int S = mdp.S, A = mdp.A;
  for (int s = 1; s <= S; ++s) {
    double val = 0.0;
    const std::size_t base = static_cast<std::size_t>(s - 1) * A;
    for (int a = 0; a < A; ++a) val += pi.pi[base + a] * q[base + a];
    v[s - 1] = val;
  }
  const double v_mean = std::accumulate(v.begin(), v.end(), 0.0) / S;
  for (int s = 1; s <= S; ++s) {
    for (int a = 1; a <= A; ++a) {
      const SparseRow& row = mdp.row(s, a);
      double ev = row.uniform_mix * v_mean;
      for (auto [t, p] : row.entries) ev += p * v[t - 1];
      out[static_cast<std::size_t>(s - 1) * A + (a - 1)] = mdp.reward_mean(s, a) + gamma * ev;
    }
  }
}

}  // namespace

std::vector<double> true_q(const TableMdp& mdp, const FixedPolicy& pi, double gamma, double tol) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("true_q: gamma must lie in [0, 1)");
  mdp.validate();
  pi.validate();
  std::vector<double> q(static_cast<std::size_t>(mdp.S) * mdp.A, 0.0);
  std::vector<double> next(q.size());
  std::vector<double> v(mdp.S);
  for (;;) {
    apply_bellman(mdp, pi, gamma, q, next, v);
    double change = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) change = std::max(change, std::fabs(next[i] - q[i]));
    q.swap(next);
    if (change < tol) break;
  }
  return q;
}

double bellman_residual(const TableMdp& mdp, const FixedPolicy& pi, double gamma,
                        const std::vector<double>& q) {
  std::vector<double> out(q.size());
  std::vector<double> v(mdp.S);
  apply_bellman(mdp, pi, gamma, q, out, v);
  double r = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) r = std::max(r, std::fabs(out[i] - q[i]));
  return r;
}

std::vector<double> stationary_distribution(const TableMdp& mdp, const FixedPolicy& pi, int s1,
                                            double tol, std::int64_t max_iters) {
  if (s1 < 1 || s1 > mdp.S) throw std::invalid_argument("stationary: bad initial state");
  const int S = mdp.S, A = mdp.A;

  // induced chain rows M(s, .) = sum_a pi(a|s) P(.|s, a)
  std::vector<std::vector<std::pair<int, double>>> rows(S);
  std::vector<double> mix(S, 0.0);
  for (int s = 1; s <= S; ++s) {
    auto& out = rows[s - 1];
    for (int a = 1; a <= A; ++a) {
      const double pa = pi.prob(s, a);
      if (pa == 0.0) continue;
      const SparseRow& row = mdp.row(s, a);
      mix[s - 1] += pa * row.uniform_mix;
      for (auto [t, p] : row.entries) out.push_back({t, pa * p});
    }
    std::sort(out.begin(), out.end());
    std::size_t w = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (w > 0 && out[w - 1].first == out[i].first) out[w - 1].second += out[i].second;
      else out[w++] = out[i];
    }
    out.resize(w);
  }

  std::vector<double> v(S, 0.0), next(S);
  v[s1 - 1] = 1.0;
  for (std::int64_t it = 0; it < max_iters; ++it) {
    // half-lazy step: next = (v + v M) / 2
    std::fill(next.begin(), next.end(), 0.0);
    double mixed = 0.0;
    for (int s = 0; s < S; ++s) {
      const double mass = v[s];
      if (mass == 0.0) continue;
      for (auto [t, p] : rows[s]) next[t - 1] += mass * p;
      mixed += mass * mix[s];
    }
    const double spread = mixed / S;
    double change = 0.0;
    for (int s = 0; s < S; ++s) {
      next[s] = 0.5 * (v[s] + next[s] + spread);
      change = std::max(change, std::fabs(next[s] - v[s]));
    }
    v.swap(next);
    if (change < tol) break;
  }
  // clean tiny negatives from rounding and renormalise
  double total = 0.0;
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

std::vector<double> stationary_distribution_empirical(const TableMdp& mdp, const FixedPolicy& pi,
                                                      int s1, std::int64_t steps, Rng& rng) {
  std::vector<double> counts(mdp.S, 0.0);
  int s = s1;
  for (std::int64_t t = 0; t < steps; ++t) {
    counts[s - 1] += 1.0;
    const int a = pi.sample(s, rng);
    const SparseRow& row = mdp.row(s, a);
    double x = rng.uniform01();
    int target = -1;
    for (auto [tgt, p] : row.entries) {
      x -= p;
      if (x < 0.0) { target = tgt; break; }
    }
    if (target < 0) target = 1 + static_cast<int>(rng.uniform_below(mdp.S));
    s = target;
  }
  for (double& c : counts) c /= static_cast<double>(steps);
  return counts;
}

double score_mse(const std::vector<double>& q_hat, const std::vector<double>& q_true,
                 const std::vector<double>& psi, const FixedPolicy& pi) {
  double total = 0.0;
  for (int s = 1; s <= pi.S; ++s) {
    const std::size_t base = static_cast<std::size_t>(s - 1) * pi.A;
    for (int a = 0; a < pi.A; ++a) {
      const double diff = q_true[base + a] - q_hat[base + a];
      total += psi[s - 1] * pi.pi[base + a] * diff * diff;
    }
  }
  return total;
}

double score_l(const std::vector<double>& q_hat, const TableMdp& mdp, const FixedPolicy& pi,
               const std::vector<double>& psi, double gamma, const ActionWeighting& wt) {
  std::vector<double> tq(q_hat.size());
  std::vector<double> v(mdp.S);
  apply_bellman(mdp, pi, gamma, q_hat, tq, v);
  double total = 0.0;
  for (int s = 1; s <= mdp.S; ++s) {
    const std::size_t base = static_cast<std::size_t>(s - 1) * mdp.A;
    for (int a = 1; a <= mdp.A; ++a) {
      const double diff = tq[base + a - 1] - q_hat[base + a - 1];
      total += psi[s - 1] * wt.value(pi, s, a) * diff * diff;
    }
  }
  return total;
}

double score_l_tilde(const std::vector<double>& q_hat, const TableMdp& mdp,
                     const FixedPolicy& pi, const std::vector<double>& psi, double gamma,
                     const ActionWeighting& wt) {
  const int S = mdp.S, A = mdp.A;
  std::vector<double> v(S, 0.0);
  for (int s = 1; s <= S; ++s) {
    double val = 0.0;
    for (int a = 1; a <= A; ++a) val += pi.prob(s, a) * q_hat[(s - 1) * A + (a - 1)];
    v[s - 1] = val;
  }
  // E over successors of the squared one-step error, with the reward
  // integral expanded exactly; E[(r + g q' - q)^2] decomposes into the
  // squared mean plus reward variance.
  std::vector<double> sq(S, 0.0);  // sum_a' pi q'^2 per state
  for (int s = 1; s <= S; ++s) {
    double val = 0.0;
    for (int a = 1; a <= A; ++a) {
      const double q = q_hat[(s - 1) * A + (a - 1)];
      val += pi.prob(s, a) * q * q;
    }
    sq[s - 1] = val;
  }
  const double v_mean = std::accumulate(v.begin(), v.end(), 0.0) / S;
  const double sq_mean = std::accumulate(sq.begin(), sq.end(), 0.0) / S;

  double total = 0.0;
  for (int s = 1; s <= S; ++s) {
    for (int a = 1; a <= A; ++a) {
      const SparseRow& row = mdp.row(s, a);
      const RewardDist& rd = mdp.reward(s, a);
      const double q = q_hat[(s - 1) * A + (a - 1)];
      double expect = 0.0;
      for (auto [rv, rp] : rd.outcomes) {
        // over successor states and next actions
        double inner = row.uniform_mix * (sq_mean * gamma * gamma +
                                          2.0 * gamma * (rv - q) * v_mean);
        for (auto [t, p] : row.entries)
          inner += p * (gamma * gamma * sq[t - 1] + 2.0 * gamma * (rv - q) * v[t - 1]);
        expect += rp * ((rv - q) * (rv - q) + inner);
      }
      total += psi[s - 1] * wt.value(pi, s, a) * expect;
    }
  }
  return total;
}

SubsetMetrics subset_metrics(const TableMdp& mdp, const FixedPolicy& pi,
                             const std::vector<double>& psi, const std::vector<int>& subset) {
  std::vector<char> in_set(mdp.S + 1, 0);
  for (int s : subset) {
    if (s < 1 || s > mdp.S) throw std::invalid_argument("subset_metrics: bad state in subset");
    in_set[s] = 1;
  }
  SubsetMetrics m;
  for (int s : subset) m.h += psi[s - 1];
  for (int s : subset) {
    double escape = 0.0;
    for (int a = 1; a <= mdp.A; ++a) {
      const double pa = pi.prob(s, a);
      if (pa == 0.0) continue;
      const SparseRow& row = mdp.row(s, a);
      double outside = row.uniform_mix * (mdp.S - static_cast<int>(subset.size())) / mdp.S;
      for (auto [t, p] : row.entries)
        if (!in_set[t]) outside += p;
      escape += pa * outside;
    }
    m.delta_i = std::max(m.delta_i, escape);
  }
  return m;
}

double delta_p(const TableMdp& mdp) {
  double min_peak = 1.0;
  for (int s = 1; s <= mdp.S; ++s) {
    for (int a = 1; a <= mdp.A; ++a) {
      const SparseRow& row = mdp.row(s, a);
      const double uniform_each = row.uniform_mix / mdp.S;
      double peak = row.entries.empty() ? uniform_each : 0.0;
      for (auto [t, p] : row.entries) peak = std::max(peak, p + uniform_each);
      min_peak = std::min(min_peak, peak);
    }
  }
  return 1.0 - min_peak;
}

double delta_r(const TableMdp& mdp) {
  double worst = 0.0;
  for (const auto& rd : mdp.rewards) worst = std::max(worst, rd.variance());
  return worst;
}

CycleStats cycle_statistics(int S, int n_samples, Rng& rng) {
  if (S < 2) throw std::invalid_argument("cycle_statistics: need S >= 2");
  if (n_samples < 1) throw std::invalid_argument("cycle_statistics: need at least one sample");
  std::vector<std::int32_t> succ(S);
  std::vector<std::int32_t> seen_at(S);  // step index when first visited, else -1
  std::vector<std::int8_t> color(S);     // 0 unvisited, 1 in progress, 2 done

  double sum_c1 = 0.0, sum_c1_sq = 0.0, sum_l1 = 0.0, sum_c = 0.0;
  for (int sample = 0; sample < n_samples; ++sample) {
    for (int i = 0; i < S; ++i) succ[i] = static_cast<std::int32_t>(rng.uniform_below(S));

    // walk from state 0 to the first repeat
    std::fill(seen_at.begin(), seen_at.end(), -1);
    int at = 0, step = 0;
    while (seen_at[at] < 0) {
      seen_at[at] = step++;
      at = succ[at];
    }
    const int l1 = step;
    const int c1 = step - seen_at[at];
    sum_c1 += c1;
    sum_c1_sq += static_cast<double>(c1) * c1;
    sum_l1 += l1;

    // total cyclic states across the whole successor map
    std::fill(color.begin(), color.end(), 0);
    int cyclic = 0;
    std::vector<int> path;
    for (int s0 = 0; s0 < S; ++s0) {
      if (color[s0]) continue;
      path.clear();
      int u = s0;
      while (color[u] == 0) {
        color[u] = 1;
        path.push_back(u);
        u = succ[u];
      }
      if (color[u] == 1) {
        // found a new cycle; count its states
        int v = u;
        do {
          ++cyclic;
          v = succ[v];
        } while (v != u);
      }
      for (int w : path) color[w] = 2;
    }
    sum_c += cyclic;
  }

  CycleStats st;
  const double n = n_samples;
  st.mean_c1 = sum_c1 / n;
  st.var_c1 = n_samples > 1 ? (sum_c1_sq - sum_c1 * sum_c1 / n) / (n - 1.0) : 0.0;
  st.mean_l1 = sum_l1 / n;
  st.mean_c = sum_c / n;
  return st;
}

std::vector<double> expand_q(const std::function<int(int)>& cell_of, int S, int A,
                             const std::function<double(int, int)>& q_cell_action) {
  std::vector<double> q(static_cast<std::size_t>(S) * A);
  for (int s = 1; s <= S; ++s) {
    const int cell = cell_of(s);
    for (int a = 1; a <= A; ++a) q[static_cast<std::size_t>(s - 1) * A + (a - 1)] = q_cell_action(cell, a);
  }
  return q;
}

}  // namespace pasa
