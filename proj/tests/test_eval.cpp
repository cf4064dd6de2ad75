#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pasa/eval.hpp"

using pasa::ActionWeighting;
using pasa::FixedPolicy;
using pasa::RewardDist;
using pasa::Rng;
using pasa::SparseRow;
using pasa::TableMdp;

namespace {

TableMdp single_loop(double reward) {
  TableMdp m;
  m.S = 1;
  m.A = 1;
  m.rows.push_back({{{1, 1.0}}, 0.0});
  m.rewards.push_back(RewardDist::constant(reward));
  return m;
}

FixedPolicy uniform_policy(int S, int A) {
  FixedPolicy p;
  p.S = S;
  p.A = A;
  p.pi.assign(static_cast<std::size_t>(S) * A, 1.0 / A);
  return p;
}

TableMdp random_table(Rng& rng, int S, int A, double reward_scale = 1.0) {
  TableMdp m;
  m.S = S;
  m.A = A;
  for (int i = 0; i < S * A; ++i) {
    SparseRow row;
    double total = 0.0;
    std::vector<double> weights(S);
    for (int t = 0; t < S; ++t) {
      weights[t] = rng.uniform01();
      total += weights[t];
    }
    for (int t = 0; t < S; ++t) row.entries.push_back({t + 1, weights[t] / total});
    // repair rounding so the row sums to one exactly
    double sum = 0.0;
    for (auto& [t, p] : row.entries) sum += p;
    row.entries.back().second += 1.0 - sum;
    m.rows.push_back(row);
    m.rewards.push_back(RewardDist::constant(rng.uniform(-reward_scale, reward_scale)));
  }
  return m;
}

FixedPolicy random_policy(Rng& rng, int S, int A) {
  FixedPolicy p;
  p.S = S;
  p.A = A;
  p.pi.resize(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    double total = 0.0;
    for (int a = 0; a < A; ++a) {
      p.pi[s * A + a] = 0.05 + rng.uniform01();
      total += p.pi[s * A + a];
    }
    double sum = 0.0;
    for (int a = 0; a < A; ++a) p.pi[s * A + a] /= total;
    for (int a = 0; a < A; ++a) sum += p.pi[s * A + a];
    p.pi[s * A + A - 1] += 1.0 - sum;
  }
  return p;
}

}  // namespace

TEST_CASE("the fixed point oracle solves tiny chains in closed form") {
  const std::vector<double> q2 = pasa::true_q(single_loop(1.0), uniform_policy(1, 1), 0.5);
  CHECK(q2[0] == doctest::Approx(2.0).epsilon(1e-9));

  TableMdp cycle;
  cycle.S = 2;
  cycle.A = 1;
  cycle.rows.push_back({{{2, 1.0}}, 0.0});
  cycle.rows.push_back({{{1, 1.0}}, 0.0});
  cycle.rewards.push_back(RewardDist::constant(1.0));
  cycle.rewards.push_back(RewardDist::constant(0.0));
  const std::vector<double> q = pasa::true_q(cycle, uniform_policy(2, 1), 0.5);
  CHECK(q[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(q[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  const std::vector<double> zero = pasa::true_q(single_loop(0.0), uniform_policy(1, 1), 0.9);
  CHECK(zero[0] == 0.0);
}

TEST_CASE("fixed point iteration agrees with the direct linear solve") {
  Rng rng(12);
  for (int round = 0; round < 8; ++round) {
    const int S = 2 + static_cast<int>(rng.uniform_below(30));
    const int A = 1 + static_cast<int>(rng.uniform_below(3));
    const TableMdp m = random_table(rng, S, A);
    const FixedPolicy pi = random_policy(rng, S, A);
    const double gamma = rng.uniform(0.3, 0.95);
    const auto q_iter = pasa::true_q(m, pi, gamma, 1e-12);
    const auto q_solve = pasa::true_q_linear(m, pi, gamma);
    for (std::size_t i = 0; i < q_iter.size(); ++i)
      CHECK(q_iter[i] == doctest::Approx(q_solve[i]).epsilon(1e-8));
    CHECK(pasa::bellman_residual(m, pi, gamma, q_iter) < 1e-11);
  }
}

TEST_CASE("stationary distribution handles symmetry, absorption, periodicity") {
  TableMdp swap;
  swap.S = 2;
  swap.A = 1;
  swap.rows.push_back({{{2, 1.0}}, 0.0});
  swap.rows.push_back({{{1, 1.0}}, 0.0});
  swap.rewards.assign(2, RewardDist::constant(0.0));
  const auto psi = pasa::stationary_distribution(swap, uniform_policy(2, 1), 1);
  CHECK(psi[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(psi[1] == doctest::Approx(0.5).epsilon(1e-8));

  TableMdp absorb;
  absorb.S = 3;
  absorb.A = 1;
  absorb.rows.push_back({{{2, 1.0}}, 0.0});
  absorb.rows.push_back({{{3, 1.0}}, 0.0});
  absorb.rows.push_back({{{3, 1.0}}, 0.0});
  absorb.rewards.assign(3, RewardDist::constant(0.0));
  const auto point = pasa::stationary_distribution(absorb, uniform_policy(3, 1), 1);
  CHECK(point[2] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("power and empirical stationary estimates agree") {
  Rng rng(99);
  for (int round = 0; round < 3; ++round) {
    const int S = 20;
    const int A = 2;
    const TableMdp m = random_table(rng, S, A);
    const FixedPolicy pi = random_policy(rng, S, A);
    const auto psi = pasa::stationary_distribution(m, pi, 1);

    // fixed point property of the induced chain
    std::vector<double> through(S, 0.0);
    for (int s = 1; s <= S; ++s)
      for (int a = 1; a <= A; ++a)
        for (auto [t, p] : m.row(s, a).entries)
          through[t - 1] += psi[s - 1] * pi.prob(s, a) * p;
    for (int s = 0; s < S; ++s) CHECK(through[s] == doctest::Approx(psi[s]).epsilon(1e-7));

    Rng sim(round + 1);
    const auto emp = pasa::stationary_distribution_empirical(m, pi, 1, 5'000'000, sim);
    for (int s = 0; s < S; ++s) CHECK(std::fabs(emp[s] - psi[s]) < 1e-3);
  }
}

TEST_CASE("scores vanish on the true value function and expand shifts") {
  Rng rng(4);
  const int S = 6, A = 2;
  const TableMdp m = random_table(rng, S, A);
  const FixedPolicy pi = random_policy(rng, S, A);
  const double gamma = 0.8;
  const auto q_true = pasa::true_q(m, pi, gamma, 1e-12);
  const auto psi = pasa::stationary_distribution(m, pi, 1);

  CHECK(pasa::score_mse(q_true, q_true, psi, pi) == doctest::Approx(0.0));
  CHECK(pasa::score_l(q_true, m, pi, psi, gamma) < 1e-18);

  // constant shift with gamma = 0: MSE is c^2 under the psi * pi weighting
  const auto q0 = pasa::true_q(m, pi, 0.0, 1e-12);
  std::vector<double> shifted = q0;
  for (double& v : shifted) v += 0.7;
  CHECK(pasa::score_mse(shifted, q0, psi, pi) == doctest::Approx(0.49).epsilon(1e-9));
}

TEST_CASE("the sampled Bellman score matches a brute force expansion") {
  Rng rng(8);
  const int S = 5, A = 2;
  TableMdp m = random_table(rng, S, A);
  // two-point rewards to exercise the reward integral
  for (auto& rd : m.rewards) {
    const double v = rng.uniform(-1.0, 1.0);
    rd.outcomes = {{v, 0.25}, {v + 0.5, 0.75}};
  }
  // mix some uniform mass into a few rows
  for (int i = 0; i < 3; ++i) {
    auto& row = m.rows[i];
    for (auto& [t, p] : row.entries) p *= 0.6;
    row.uniform_mix = 0.4;
  }
  const FixedPolicy pi = random_policy(rng, S, A);
  const double gamma = 0.7;
  std::vector<double> q_hat(static_cast<std::size_t>(S) * A);
  for (double& v : q_hat) v = rng.uniform(-2.0, 2.0);
  const auto psi = pasa::stationary_distribution(m, pi, 1);

  double brute = 0.0;
  for (int s = 1; s <= S; ++s) {
    for (int a = 1; a <= A; ++a) {
      const auto& row = m.row(s, a);
      const auto& rd = m.reward(s, a);
      double inner = 0.0;
      for (int t = 1; t <= S; ++t) {
        double p = row.uniform_mix / S;
        for (auto [entry, ep] : row.entries)
          if (entry == t) p += ep;
        for (int a2 = 1; a2 <= A; ++a2) {
          for (auto [rv, rp] : rd.outcomes) {
            const double diff = rv + gamma * q_hat[(t - 1) * A + (a2 - 1)] -
                                q_hat[(s - 1) * A + (a - 1)];
            inner += p * pi.prob(t, a2) * rp * diff * diff;
          }
        }
      }
      brute += psi[s - 1] * pi.prob(s, a) * inner;
    }
  }
  const double fast = pasa::score_l_tilde(q_hat, m, pi, psi, gamma);
  CHECK(fast == doctest::Approx(brute).epsilon(1e-10));
}

TEST_CASE("mse weighting is invariant to consistent relabelling") {
  Rng rng(31);
  const int S = 7, A = 2;
  const TableMdp m = random_table(rng, S, A);
  const FixedPolicy pi = random_policy(rng, S, A);
  const double gamma = 0.6;
  const auto q_true = pasa::true_q(m, pi, gamma, 1e-12);
  const auto psi = pasa::stationary_distribution(m, pi, 1);
  std::vector<double> q_hat(q_true.size());
  for (double& v : q_hat) v = rng.uniform(-1.0, 1.0);
  const double base = pasa::score_mse(q_hat, q_true, psi, pi);

  // reversal permutation applied to every input consistently
  std::vector<int> perm(S);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  FixedPolicy pi2 = pi;
  std::vector<double> psi2(S), qh2(q_hat.size()), qt2(q_true.size());
  for (int s = 0; s < S; ++s) {
    psi2[perm[s]] = psi[s];
    for (int a = 0; a < A; ++a) {
      pi2.pi[perm[s] * A + a] = pi.pi[s * A + a];
      qh2[perm[s] * A + a] = q_hat[s * A + a];
      qt2[perm[s] * A + a] = q_true[s * A + a];
    }
  }
  CHECK(pasa::score_mse(qh2, qt2, psi2, pi2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("subset metrics report occupation and escape probability") {
  // deterministic three-cycle with a tail state feeding it
  TableMdp m;
  m.S = 4;
  m.A = 1;
  m.rows.push_back({{{2, 1.0}}, 0.0});
  m.rows.push_back({{{3, 1.0}}, 0.0});
  m.rows.push_back({{{1, 1.0}}, 0.0});
  m.rows.push_back({{{1, 1.0}}, 0.0});
  m.rewards.assign(4, RewardDist::constant(0.0));
  const FixedPolicy pi = uniform_policy(4, 1);
  const auto psi = pasa::stationary_distribution(m, pi, 4);

  const auto all = pasa::subset_metrics(m, pi, psi, {1, 2, 3, 4});
  CHECK(all.h == doctest::Approx(1.0));
  CHECK(all.delta_i == 0.0);

  const auto cycle = pasa::subset_metrics(m, pi, psi, {1, 2, 3});
  CHECK(cycle.h == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(cycle.delta_i == 0.0);

  const auto pair = pasa::subset_metrics(m, pi, psi, {1, 2});
  CHECK(pair.delta_i == doctest::Approx(1.0));  // state 2 always leaves
}

TEST_CASE("determinism gaps match their definitions") {
  Rng rng(41);
  const FixedPolicy eps_det = FixedPolicy::epsilon_deterministic(10, 4, 0.2, rng);
  eps_det.validate();
  CHECK(eps_det.delta_pi() == doctest::Approx(0.2 * (1.0 - 0.25)).epsilon(1e-12));

  TableMdp m = single_loop(0.0);
  m.rows[0] = {{{1, 0.7}}, 0.3};
  CHECK(pasa::delta_p(m) == doctest::Approx(0.3 * (1.0 - 1.0)));  // S = 1: uniform is the same state

  TableMdp two;
  two.S = 2;
  two.A = 1;
  two.rows.push_back({{{1, 0.7}}, 0.3});
  two.rows.push_back({{{2, 1.0}}, 0.0});
  two.rewards.assign(2, RewardDist{{{0.0, 0.5}, {1.0, 0.5}}});
  CHECK(pasa::delta_p(two) == doctest::Approx(1.0 - 0.85));
  CHECK(pasa::delta_r(two) == doctest::Approx(0.25));
}

TEST_CASE("cycle statistics match exhaustive enumeration at S = 2") {
  Rng rng(6);
  const pasa::CycleStats st = pasa::cycle_statistics(2, 40000, rng);
  // over the four equally likely maps: E C1 = 1.25, E L1 = 1.5, E C = 1.5
  CHECK(st.mean_c1 == doctest::Approx(1.25).epsilon(0.02));
  CHECK(st.mean_l1 == doctest::Approx(1.5).epsilon(0.02));
  CHECK(st.mean_c == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("cycle statistics follow the square root law") {
  Rng rng(16);
  const pasa::CycleStats st = pasa::cycle_statistics(1000, 2000, rng);
  const double predicted = std::sqrt(3.14159265358979323846 * 1000.0 / 8.0);
  CHECK(std::fabs(st.mean_c1 - predicted) < 0.1 * predicted);
  CHECK(st.mean_c < st.mean_c1 * (std::log(1000.0) + 1.0));

  const pasa::CycleStats small = pasa::cycle_statistics(100, 2000, rng);
  CHECK(small.mean_c < small.mean_c1 * (std::log(100.0) + 1.0));
}
