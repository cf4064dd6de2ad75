#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pasa/loop.hpp"
#include "pasa/sarsa.hpp"

using pasa::Interval;
using pasa::LastTransition;
using pasa::OrderedPartition;
using pasa::Rng;
using pasa::SarsaParams;
using pasa::WeightMatrix;

TEST_CASE("q values read the weight matrix directly") {
  WeightMatrix theta(3, 2);
  for (int k = 1; k <= 3; ++k)
    for (int a = 1; a <= 2; ++a) CHECK(theta.q(k, a) == 0.0);
  theta.set(2, 1, 0.7);
  CHECK(theta.q(2, 1) == 0.7);

  // indicator-sum form over all cells
  const OrderedPartition p = OrderedPartition::from_split_vector(9, 3, {});
  for (int s = 1; s <= 9; ++s) {
    double via_sum = 0.0;
    for (int k = 1; k <= p.cell_count(); ++k)
      if (p.cell(k).contains(s)) via_sum += theta.q(k, 1);
    CHECK(theta.q(p.cell_of(s), 1) == via_sum);
  }
}

TEST_CASE("action selection is greedy with epsilon exploration") {
  WeightMatrix theta(1, 2);
  theta.set(1, 1, 0.1);
  theta.set(1, 2, 0.9);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(pasa::select_action(theta, 1, 0.0, rng) == 2);

  WeightMatrix tie(1, 2);
  tie.set(1, 1, 0.5);
  tie.set(1, 2, 0.5);
  CHECK(pasa::greedy_action(tie, 1) == 1);

  // epsilon = 1: binomial check within three standard deviations
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (pasa::select_action(theta, 1, 1.0, rng) == 1) ++first;
  const double sd = std::sqrt(n * 0.25);
  CHECK(std::fabs(first - n / 2.0) < 3.0 * sd);

  CHECK(pasa::action_probability(theta, 1, 0.2, 2) == doctest::Approx(0.9));
  CHECK(pasa::action_probability(theta, 1, 0.2, 1) == doctest::Approx(0.1));
}

TEST_CASE("temporal difference updates move toward the target") {
  SarsaParams params;
  params.eta = 0.5;
  params.gamma = 0.0;
  WeightMatrix theta(2, 2);
  pasa::td_update(theta, params, 1, 1, 1.0, 2, 1, 1.0);
  CHECK(theta.q(1, 1) == doctest::Approx(0.5));

  params.eta = 1.0;
  params.gamma = 0.98;
  WeightMatrix theta2(2, 2);
  theta2.set(2, 1, 1.0);  // bootstrap source
  pasa::td_update(theta2, params, 1, 1, 0.0, 2, 1, 1.0);
  CHECK(theta2.q(1, 1) == doctest::Approx(0.98));

  // geometric approach to r + gamma d at rate (1 - eta)
  params.eta = 0.25;
  params.gamma = 0.5;
  WeightMatrix theta3(2, 1);
  theta3.set(2, 1, 2.0);
  const double target = 1.0 + 0.5 * 2.0;
  for (int t = 1; t <= 20; ++t) {
    pasa::td_update(theta3, params, 1, 1, 1.0, 2, 1, 1.0);
    const double expect = target * (1.0 - std::pow(1.0 - params.eta, t));
    CHECK(theta3.q(1, 1) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("reciprocal weighting scales the bootstrap term") {
  SarsaParams params;
  params.eta = 1.0;
  params.gamma = 0.5;
  params.reciprocal_pi_weighting = true;
  WeightMatrix theta(2, 1);
  theta.set(2, 1, 1.0);
  pasa::td_update(theta, params, 1, 1, 0.0, 2, 1, 0.25);
  CHECK(theta.q(1, 1) == doctest::Approx(0.5 * 1.0 / 0.25));
  CHECK_THROWS_AS(pasa::td_update(theta, params, 1, 1, 0.0, 2, 1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("weight transfer averages overlapping rows") {
  // identical partitions: no change
  const std::vector<Interval> cells{{1, 2}, {3, 4}};
  WeightMatrix theta(2, 2);
  theta.set(1, 1, 1.0);
  theta.set(2, 2, -2.0);
  WeightMatrix copy = theta;
  pasa::transfer_weights(theta, cells, cells, 0.1);
  for (int k = 1; k <= 2; ++k)
    for (int a = 1; a <= 2; ++a) CHECK(theta.q(k, a) == copy.q(k, a));

  // pure refinement: children inherit the parent row exactly
  const std::vector<Interval> coarse{{1, 4}, {5, 8}};
  const std::vector<Interval> fine{{1, 2}, {3, 4}, {5, 6}, {7, 8}};
  WeightMatrix wide(4, 2);
  wide.set(1, 1, 3.0);
  wide.set(1, 2, -1.0);
  wide.set(2, 1, 7.0);
  pasa::transfer_weights(wide, coarse, fine, 0.1);
  CHECK(wide.q(1, 1) == 3.0);
  CHECK(wide.q(2, 1) == 3.0);
  CHECK(wide.q(1, 2) == -1.0);
  CHECK(wide.q(2, 2) == -1.0);
  CHECK(wide.q(3, 1) == 7.0);
  CHECK(wide.q(4, 1) == 7.0);

  // a new cell spanning two old cells takes the arithmetic mean
  const std::vector<Interval> old_cells{{1, 1}, {3, 4}, {2, 2}};
  const std::vector<Interval> new_cells{{1, 2}, {3, 3}, {4, 4}};
  WeightMatrix merged(3, 1);
  merged.set(1, 1, 2.0);
  merged.set(2, 1, 10.0);
  merged.set(3, 1, 4.0);
  pasa::transfer_weights(merged, old_cells, new_cells, 0.1);
  CHECK(merged.q(1, 1) == doctest::Approx(0.5 * (2.0 + 4.0)));
  CHECK(merged.q(2, 1) == 10.0);
  CHECK(merged.q(3, 1) == 10.0);
}

TEST_CASE("weight transfer credits the in-flight transition when asked") {
  // four states; the last pre-change step was from state 3 (old cell 2)
  const std::vector<Interval> old_cells{{1, 1}, {3, 4}, {2, 2}};
  const std::vector<Interval> new_cells{{1, 2}, {3, 3}, {4, 4}};
  WeightMatrix theta(3, 2);
  theta.set(1, 1, 2.0);
  theta.set(2, 1, 10.0);
  theta.set(3, 1, 4.0);
  const LastTransition last{3, 1, 2.0};
  const double eta = 0.5;
  pasa::transfer_weights(theta, old_cells, new_cells, eta, last);
  // new cells 2 and 3 overlap old cell 2, so both receive eta * d at action 1
  CHECK(theta.q(1, 1) == doctest::Approx(3.0));
  CHECK(theta.q(2, 1) == doctest::Approx(10.0 + eta * 2.0));
  CHECK(theta.q(3, 1) == doctest::Approx(10.0 + eta * 2.0));
  CHECK(theta.q(2, 2) == 0.0);
}

TEST_CASE("refinement-only transfer keeps every state value") {
  Rng rng(9);
  for (int round = 0; round < 30; ++round) {
    const int S = 16 + static_cast<int>(rng.uniform_below(48));
    const int coarse_n = 2 + static_cast<int>(rng.uniform_below(4));
    OrderedPartition coarse = OrderedPartition::base(S, coarse_n);
    OrderedPartition fine = coarse;
    for (int extra = 0; extra < 4; ++extra) {
      std::vector<int> candidates;
      for (int j = 1; j <= fine.cell_count(); ++j)
        if (!fine.is_singleton(j)) candidates.push_back(j);
      fine.split(candidates[rng.uniform_below(candidates.size())]);
    }
    WeightMatrix theta(fine.cell_count(), 2);
    for (int k = 1; k <= coarse.cell_count(); ++k)
      for (int a = 1; a <= 2; ++a) theta.set(k, a, rng.uniform(-5.0, 5.0));
    std::vector<double> before(S);
    for (int s = 1; s <= S; ++s) before[s - 1] = theta.q(coarse.cell_of(s), 1);
    pasa::transfer_weights(theta, coarse.cells(), fine.cells(), 0.1);
    for (int s = 1; s <= S; ++s) CHECK(theta.q(fine.cell_of(s), 1) == before[s - 1]);
  }
}

namespace {

// one state, one action, unit reward
struct UnitEnv {
  int state_count() const { return 1; }
  int action_count() const { return 1; }
  int initial_state() const { return 1; }
  double max_abs_mean_reward() const { return 1.0; }
  int step(int, int, Rng&, double* r) const {
    *r = 1.0;
    return 1;
  }
};

}  // namespace

TEST_CASE("the loop contracts: empty run, determinism, geometric limit") {
  UnitEnv env;
  pasa::LoopSetup setup;
  setup.variant = pasa::AgentVariant::tabular;
  setup.iterations = 0;
  const pasa::LoopResult empty = pasa::run_loop(env, setup);
  CHECK(empty.window_avg_reward.empty());
  CHECK(empty.theta.q(1, 1) == 0.0);

  setup.iterations = 200000;
  setup.sarsa.eta = 0.01;
  setup.sarsa.gamma = 0.5;
  setup.sarsa.epsilon = 0.0;
  const pasa::LoopResult a = pasa::run_loop(env, setup);
  const pasa::LoopResult b = pasa::run_loop(env, setup);
  CHECK(a.window_avg_reward == b.window_avg_reward);
  CHECK(a.total_reward == b.total_reward);

  // value of the constant-reward loop is 1 / (1 - gamma) = 2
  CHECK(a.theta.q(1, 1) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("weight matrix snapshots are dense text") {
  WeightMatrix theta(2, 2);
  theta.set(1, 2, 0.5);
  std::ostringstream out;
  theta.dump(out);
  CHECK(out.str() == "0 0.5\n0 0\n");
}
