#include "pasa/partition.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pasa {

OrderedPartition OrderedPartition::base(int S, int X0) {
  if (S < 1) throw std::invalid_argument("partition: S must be >= 1");
  if (X0 < 1 || X0 > S)
    throw std::invalid_argument("partition: need 1 <= X0 <= S, got X0=" + std::to_string(X0) +
                                " S=" + std::to_string(S));
  OrderedPartition p;
  p.S_ = S;
  p.X0_ = X0;
  const int q = S / X0;
  const int r = S % X0;
  int lo = 1;
  for (int j = 0; j < X0; ++j) {
    const int size = q + (j < r ? 1 : 0);
    p.cells_.push_back({lo, lo + size - 1});
    p.bars_.push_back({lo, lo + size - 1});
    p.singleton_.push_back(size == 1 ? 1 : 0);
    p.base_hi_.push_back(lo + size - 1);
    p.base_root_.push_back(~(j + 1));  // leaf link for 1-based cell j+1
    p.slot_.push_back({-1 - j, 0});
    lo += size;
  }
  return p;
}

OrderedPartition OrderedPartition::from_split_vector(int S, int X0, const std::vector<int>& rho) {
  OrderedPartition p = base(S, X0);
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const int target = rho[k];
    if (target < 1 || target > X0 + static_cast<int>(k))
      throw std::invalid_argument("split vector: entry " + std::to_string(k + 1) + " is " +
                                  std::to_string(target) + ", outside [1, " +
                                  std::to_string(X0 + static_cast<int>(k)) + "]");
    if (p.is_singleton(target))
      throw std::invalid_argument("split vector: entry " + std::to_string(k + 1) +
                                  " targets singleton cell " + std::to_string(target));
    p.split(target);
  }
  return p;
}

void OrderedPartition::split(int target) {
  if (target < 1 || target > cell_count())
    throw std::invalid_argument("split: no cell " + std::to_string(target));
  Interval iv = cells_[target - 1];
  if (iv.size() < 2)
    throw std::invalid_argument("split: cell " + std::to_string(target) + " is a singleton");

  const int b = split_bound(iv);
  const int new_cell = cell_count() + 1;  // == X0 + k for step k

  cells_[target - 1] = {iv.lo, b};
  cells_.push_back({b + 1, iv.hi});
  bars_.push_back({b + 1, iv.hi});
  singleton_[target - 1] = (b == iv.lo) ? 1 : 0;
  singleton_.push_back((b + 1 == iv.hi) ? 1 : 0);
  rho_.push_back(target);

  const int node = static_cast<int>(nodes_.size());
  nodes_.push_back({b, ~target, ~new_cell, new_cell});
  auto [where, side] = slot_[target - 1];
  if (where < 0) {
    base_root_[-1 - where] = node;
  } else {
    (side == 0 ? nodes_[where].lower : nodes_[where].upper) = node;
  }
  slot_[target - 1] = {node, 0};
  slot_.push_back({node, 1});
}

void OrderedPartition::split_skipped() {
  cells_.push_back({1, 0});
  bars_.push_back({1, 0});
  singleton_.push_back(1);
  rho_.push_back(0);  // marker: no target
  slot_.push_back({-1 - X0_, 0});  // unused; keeps vectors aligned
}

void OrderedPartition::reset_to_base() {
  cells_.resize(X0_);
  bars_.resize(X0_);
  singleton_.resize(X0_);
  slot_.resize(X0_);
  rho_.clear();
  nodes_.clear();
  int lo = 1;
  for (int j = 0; j < X0_; ++j) {
    cells_[j] = {lo, base_hi_[j]};
    singleton_[j] = (lo == base_hi_[j]) ? 1 : 0;
    base_root_[j] = ~(j + 1);
    slot_[j] = {-1 - j, 0};
    lo = base_hi_[j] + 1;
  }
}

int OrderedPartition::cell_of_linear(int s) const {
  check_state(s);
  for (int j = 0; j < cell_count(); ++j)
    if (cells_[j].contains(s)) return j + 1;
  throw std::logic_error("partition does not cover state " + std::to_string(s));
}

int OrderedPartition::max_walk_depth() const {
  int deepest = 0;
  for (int root : base_root_) {
    // depth-first over the node pool, iterative
    std::vector<std::pair<int, int>> stack;  // link, depth
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto [link, d] = stack.back();
      stack.pop_back();
      if (link < 0) {
        deepest = std::max(deepest, d);
      } else {
        stack.push_back({nodes_[link].lower, d + 1});
        stack.push_back({nodes_[link].upper, d + 1});
      }
    }
  }
  return deepest;
}

std::string OrderedPartition::debug_dump() const {
  std::vector<int> order;
  for (int j = 0; j < cell_count(); ++j)
    if (!cells_[j].empty()) order.push_back(j);
  std::sort(order.begin(), order.end(),
            [this](int a, int b) { return cells_[a].lo < cells_[b].lo; });
  std::ostringstream out;
  for (int j : order)
    out << cells_[j].lo << "-" << cells_[j].hi << ":" << (j + 1) << "\n";
  return out.str();
}

void OrderedPartition::check_state(int s) const {
  if (s < 1 || s > S_)
    throw std::invalid_argument("state " + std::to_string(s) + " outside [1, " +
                                std::to_string(S_) + "]");
}

}  // namespace pasa
