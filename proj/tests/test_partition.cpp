#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "pasa/partition.hpp"
#include "pasa/rng.hpp"

using pasa::Interval;
using pasa::OrderedPartition;
using pasa::Rng;

namespace {

// independent check: sorted intervals must tile [1, S] exactly
void check_partition_tiles(const OrderedPartition& p) {
  std::vector<Interval> ivs;
  for (const Interval& iv : p.cells())
    if (!iv.empty()) ivs.push_back(iv);
  std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  int expect = 1;
  for (const Interval& iv : ivs) {
    REQUIRE(iv.lo == expect);
    REQUIRE(iv.hi >= iv.lo);
    expect = iv.hi + 1;
  }
  REQUIRE(expect == p.state_count() + 1);
}

// brute-force bar membership by interval containment
std::vector<int> bar_membership_scan(const OrderedPartition& p, int s) {
  std::vector<int> out;
  for (int j = 1; j <= p.cell_count(); ++j)
    if (p.bar_set(j).contains(s)) out.push_back(j);
  return out;
}

OrderedPartition random_partition(Rng& rng, int S, int X0, int splits) {
  OrderedPartition p = OrderedPartition::base(S, X0);
  for (int k = 0; k < splits; ++k) {
    std::vector<int> candidates;
    for (int j = 1; j <= p.cell_count(); ++j)
      if (!p.is_singleton(j)) candidates.push_back(j);
    REQUIRE(!candidates.empty());
    p.split(candidates[rng.uniform_below(candidates.size())]);
  }
  return p;
}

}  // namespace

TEST_CASE("base partition splits the range into near-equal cells") {
  const OrderedPartition p = OrderedPartition::base(36, 3);
  CHECK(p.cell(1) == Interval{1, 12});
  CHECK(p.cell(2) == Interval{13, 24});
  CHECK(p.cell(3) == Interval{25, 36});

  const OrderedPartition single = OrderedPartition::base(5, 1);
  CHECK(single.cell(1) == Interval{1, 5});

  const OrderedPartition p74 = OrderedPartition::base(7, 4);
  std::multiset<int> sizes;
  for (int j = 1; j <= 4; ++j) sizes.insert(p74.cell(j).size());
  CHECK(sizes == std::multiset<int>{1, 2, 2, 2});

  CHECK_THROWS_AS(OrderedPartition::base(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(OrderedPartition::base(10, 0), std::invalid_argument);
}

TEST_CASE("split halves an interval with the documented boundary") {
  OrderedPartition p = OrderedPartition::base(36, 3);
  p.split(1);
  CHECK(p.cell(1) == Interval{1, 6});
  CHECK(p.cell(4) == Interval{7, 12});
  CHECK(p.bar_set(4) == Interval{7, 12});

  // boundary formula on [5, 9]: lo + (hi - lo - 1) / 2 = 6
  const Interval iv{5, 9};
  CHECK(pasa::split_bound(iv) == 6);
  // direct check of the child intervals on a fresh partition over [5,9]
  OrderedPartition r = OrderedPartition::base(9, 1);
  r.split(1);  // [1,4],[5,9]
  REQUIRE(r.cell(2) == Interval{5, 9});
  r.split(2);
  CHECK(r.cell(2) == Interval{5, 6});
  CHECK(r.cell(3) == Interval{7, 9});

  OrderedPartition tiny = OrderedPartition::base(2, 1);
  tiny.split(1);
  CHECK(tiny.cell(1) == Interval{1, 1});
  CHECK(tiny.cell(2) == Interval{2, 2});
  CHECK(tiny.is_singleton(1));
  CHECK(tiny.is_singleton(2));
  CHECK_THROWS_AS(tiny.split(1), std::invalid_argument);
}

TEST_CASE("split vector reproduces the worked six-cell partition") {
  const OrderedPartition p = OrderedPartition::from_split_vector(36, 3, {1, 2, 5});
  CHECK(p.cell(1) == Interval{1, 6});
  CHECK(p.cell(2) == Interval{13, 18});
  CHECK(p.cell(3) == Interval{25, 36});
  CHECK(p.cell(4) == Interval{7, 12});
  CHECK(p.cell(5) == Interval{19, 21});
  CHECK(p.cell(6) == Interval{22, 24});
  check_partition_tiles(p);

  CHECK(p.debug_dump() ==
        "1-6:1\n7-12:4\n13-18:2\n19-21:5\n22-24:6\n25-36:3\n");

  // empty vector is the identity
  const OrderedPartition base = OrderedPartition::base(36, 3);
  CHECK(OrderedPartition::from_split_vector(36, 3, {}).same_cells(base));

  // step-by-step hand traces from a single base cell
  const OrderedPartition two = OrderedPartition::from_split_vector(8, 1, {1, 1});
  std::set<std::pair<int, int>> got;
  for (const Interval& iv : two.cells()) got.insert({iv.lo, iv.hi});
  CHECK(got == std::set<std::pair<int, int>>{{1, 2}, {3, 4}, {5, 8}});

  const OrderedPartition three = OrderedPartition::from_split_vector(8, 1, {1, 1, 2});
  got.clear();
  for (const Interval& iv : three.cells()) got.insert({iv.lo, iv.hi});
  CHECK(got == std::set<std::pair<int, int>>{{1, 2}, {3, 4}, {5, 6}, {7, 8}});

  CHECK_THROWS_AS(OrderedPartition::from_split_vector(8, 1, {2}), std::invalid_argument);
  CHECK_THROWS_AS(OrderedPartition::from_split_vector(2, 1, {1, 1}), std::invalid_argument);
}

TEST_CASE("cell lookup agrees with a linear scan") {
  const OrderedPartition fig = OrderedPartition::from_split_vector(36, 3, {1, 2, 5});
  CHECK(fig.cell_of(13) == 2);

  const OrderedPartition single = OrderedPartition::base(5, 1);
  for (int s = 1; s <= 5; ++s) CHECK(single.cell_of(s) == 1);

  for (int s = 1; s <= 36; ++s) CHECK(fig.cell_of(s) == fig.cell_of_linear(s));
  CHECK_THROWS_AS(fig.cell_of(0), std::invalid_argument);
  CHECK_THROWS_AS(fig.cell_of(37), std::invalid_argument);
}

TEST_CASE("bar membership lists every tracking set holding the state") {
  const OrderedPartition fig = OrderedPartition::from_split_vector(36, 3, {1, 2, 5});
  // a state in the split-off upper half of base cell 1 sits in bars 1 and 4
  auto bars = fig.bar_membership(9);
  std::sort(bars.begin(), bars.end());
  CHECK(bars == std::vector<int>{1, 4});

  // a base cell never split afterwards tracks exactly itself
  auto only = fig.bar_membership(30);
  CHECK(only == std::vector<int>{3});

  Rng rng(7);
  for (int round = 0; round < 50; ++round) {
    const int S = 2 + static_cast<int>(rng.uniform_below(60));
    const int X0 = 1 + static_cast<int>(rng.uniform_below(S));
    const int max_splits = S - X0;
    const int splits = static_cast<int>(rng.uniform_below(max_splits + 1));
    const OrderedPartition p = random_partition(rng, S, X0, splits);
    for (int s = 1; s <= S; ++s) {
      auto got = p.bar_membership(s);
      std::sort(got.begin(), got.end());
      CHECK(got == bar_membership_scan(p, s));
    }
  }
}

TEST_CASE("partition properties hold on random split vectors") {
  Rng rng(42);
  for (int round = 0; round < 300; ++round) {
    const int S = 2 + static_cast<int>(rng.uniform_below(200));
    const int X0 = 1 + static_cast<int>(rng.uniform_below(S));
    const int splits = static_cast<int>(rng.uniform_below(S - X0 + 1));
    const OrderedPartition p = random_partition(rng, S, X0, splits);

    check_partition_tiles(p);

    // children sizes differ by at most one across every recorded split
    const std::vector<int>& rho = p.split_vector();
    OrderedPartition replay = OrderedPartition::base(S, X0);
    for (std::size_t k = 0; k < rho.size(); ++k) {
      const Interval parent = replay.cell(rho[k]);
      replay.split(rho[k]);
      const Interval lower = replay.cell(rho[k]);
      const Interval upper = replay.cell(X0 + static_cast<int>(k) + 1);
      CHECK(lower.lo == parent.lo);
      CHECK(upper.hi == parent.hi);
      CHECK(lower.hi + 1 == upper.lo);
      CHECK(std::abs(lower.size() - upper.size()) <= 1);
    }
    CHECK(replay.same_cells(p));

    // rebuilding from the recorded vector matches
    CHECK(OrderedPartition::from_split_vector(S, X0, rho).same_cells(p));

    // tree agrees with scan; bar sets contain their cells
    for (int s = 1; s <= S; ++s) CHECK(p.cell_of(s) == p.cell_of_linear(s));
    for (int j = 1; j <= p.cell_count(); ++j) {
      CHECK(p.bar_set(j).lo <= p.cell(j).lo);
      CHECK(p.bar_set(j).hi >= p.cell(j).hi);
      CHECK(p.is_singleton(j) == (p.cell(j).size() == 1));
    }

    // depth bound from the split count and base cell size
    int max_base = 0;
    for (int j = 1; j <= X0; ++j)
      max_base = std::max(max_base, OrderedPartition::base(S, X0).cell(j).size());
    const int bound = splits + static_cast<int>(std::ceil(std::log2(std::max(2, max_base))));
    CHECK(p.max_walk_depth() <= bound);
  }
}

TEST_CASE("reset and skipped splits keep the structure consistent") {
  OrderedPartition p = OrderedPartition::from_split_vector(20, 2, {1, 2, 1});
  p.reset_to_base();
  CHECK(p.same_cells(OrderedPartition::base(20, 2)));
  p.split(1);
  p.split_skipped();
  p.split(2);
  CHECK(p.cell_count() == 5);
  CHECK(p.cell(4).empty());
  CHECK(p.is_singleton(4));
  check_partition_tiles(p);
  for (int s = 1; s <= 20; ++s) CHECK(p.cell_of(s) == p.cell_of_linear(s));
}
