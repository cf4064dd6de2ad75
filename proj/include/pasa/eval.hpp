#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pasa/rng.hpp"
#include "pasa/table_mdp.hpp"

namespace pasa {

/// Stochastic policy over a finite MDP, stored as a dense S-by-A table.
struct FixedPolicy {
  int S = 0;
  int A = 0;
  std::vector<double> pi;  // (s-1)*A + (a-1)

  double prob(int s, int a) const { return pi[static_cast<std::size_t>(s - 1) * A + (a - 1)]; }
  int sample(int s, Rng& rng) const;
  void validate() const;  // rows sum to 1 within 1e-12

  /// Smallest delta such that the policy is a (1-delta) mix of a
  /// deterministic policy with something arbitrary.
  double delta_pi() const;

  /// Deterministic base action per state, an epsilon share spread
  /// uniformly over all actions.
  static FixedPolicy epsilon_deterministic(int S, int A, double epsilon, Rng& rng);
};

/// Value function of `pi` as the fixed point of the Bellman operator,
/// computed by iterating until the sup-norm change drops below tol.
/// Returns the S*A table indexed (s-1)*A + (a-1).
std::vector<double> true_q(const TableMdp& mdp, const FixedPolicy& pi, double gamma,
                           double tol = 1e-10);

/// Same value by a direct dense linear solve of (I - gamma P_pi) Q = r;
/// the independent cross-check for true_q.
std::vector<double> true_q_linear(const TableMdp& mdp, const FixedPolicy& pi, double gamma);

/// Sup-norm Bellman residual sup |T^pi q - q| of a candidate table.
double bellman_residual(const TableMdp& mdp, const FixedPolicy& pi, double gamma,
                        const std::vector<double>& q);

/// Long-run state occupation from initial state s1 (the Cesaro limit of
/// the chain induced by pi on the transition table).  Computed by power
/// iteration on the half-lazy chain (I + M)/2, which has the same limit
/// and converges on periodic chains too.
std::vector<double> stationary_distribution(const TableMdp& mdp, const FixedPolicy& pi, int s1,
                                            double tol = 1e-10,
                                            std::int64_t max_iters = 20'000'000);

/// Empirical visit frequencies from a simulated trajectory (cross-check).
std::vector<double> stationary_distribution_empirical(const TableMdp& mdp, const FixedPolicy& pi,
                                                      int s1, std::int64_t steps, Rng& rng);

/// Action weighting w-tilde used inside the Bellman-error scores.
struct ActionWeighting {
  enum class Kind { policy, uniform, custom } kind = Kind::policy;
  std::vector<double> custom;  // (s-1)*A + (a-1), used when kind == custom

  double value(const FixedPolicy& pi, int s, int a) const {
    switch (kind) {
      case Kind::policy: return pi.prob(s, a);
      case Kind::uniform: return 1.0 / pi.A;
      default: return custom[static_cast<std::size_t>(s - 1) * pi.A + (a - 1)];
    }
  }
};

/// Squared VF estimation error, each state-action weighted by
/// psi_i * pi(a|s).
double score_mse(const std::vector<double>& q_hat, const std::vector<double>& q_true,
                 const std::vector<double>& psi, const FixedPolicy& pi);

/// Weighted squared Bellman error with w = psi * w_tilde.
double score_l(const std::vector<double>& q_hat, const TableMdp& mdp, const FixedPolicy& pi,
               const std::vector<double>& psi, double gamma,
               const ActionWeighting& wt = {});

/// Sampled-form Bellman error: the expectation moves outside the square,
/// with the reward integral taken exactly over the discrete reward
/// distributions.
double score_l_tilde(const std::vector<double>& q_hat, const TableMdp& mdp,
                     const FixedPolicy& pi, const std::vector<double>& psi, double gamma,
                     const ActionWeighting& wt = {});

struct SubsetMetrics {
  double h = 0.0;        // occupation mass of the subset
  double delta_i = 0.0;  // max per-step escape probability from inside it
};

SubsetMetrics subset_metrics(const TableMdp& mdp, const FixedPolicy& pi,
                             const std::vector<double>& psi, const std::vector<int>& subset);

/// Smallest delta such that the transition function is a (1-delta) mix of
/// a deterministic map with something arbitrary.
double delta_p(const TableMdp& mdp);
/// Largest per-pair reward variance.
double delta_r(const TableMdp& mdp);

struct CycleStats {
  double mean_c1 = 0.0;  // cycle reached from state 1
  double var_c1 = 0.0;
  double mean_l1 = 0.0;  // path length from state 1 including the cycle
  double mean_c = 0.0;   // total cyclic states over the whole map
};

/// Monte-Carlo statistics of cycle structure in uniformly random
/// successor maps on S states.
CycleStats cycle_statistics(int S, int n_samples, Rng& rng);

/// The VF estimate of an aggregated weight matrix expanded to a dense
/// S*A table via the state-to-cell map.
std::vector<double> expand_q(const std::function<int(int)>& cell_of, int S, int A,
                             const std::function<double(int, int)>& q_cell_action);

}  // namespace pasa
