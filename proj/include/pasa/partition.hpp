#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pasa {

/// Inclusive interval of 1-based state indices.
struct Interval {
  int lo = 1;
  int hi = 0;

  int size() const { return hi - lo + 1; }
  bool empty() const { return hi < lo; }
  bool contains(int s) const { return lo <= s && s <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Boundary of the standard halving split of [lo, hi]: the lower child is
/// [lo, lo + (hi - lo - 1) / 2], the upper child holds the remainder.
/// Child sizes differ by at most one; only defined for size >= 2.
inline int split_bound(const Interval& iv) { return iv.lo + (iv.hi - iv.lo - 1) / 2; }

/**
 * Ordered partition of the state range [1, S] into contiguous interval
 * cells, produced from X0 base cells by a sequence of recorded cell splits.
 *
 * Cell indexing follows the construction: base cells are 1..X0; the split
 * at step k replaces the target cell's interval with its lower half and
 * creates cell X0+k holding the upper half.  Alongside the cells the
 * partition keeps, for every index j, the tracking set ("bar set"): for
 * j <= X0 this is the base cell, for j > X0 it is the interval cell j had
 * at the moment of its creation.  Bar sets are supersets of their cells
 * and are what the visit-frequency estimates are defined over.
 *
 * The split history is kept as a binary tree per base cell, giving
 * state-to-cell lookup in O(split depth + log2 X0) and the list of bar
 * sets containing a state along the same walk.
 *
 * Immutable-after-build within one repartition epoch: concurrent reads are
 * safe, mutation requires exclusive access.
 */
class OrderedPartition {
 public:
  /// Base partition of X0 cells with sizes as equal as possible (the first
  /// S mod X0 cells are one state larger).  Throws std::invalid_argument
  /// unless 1 <= X0 <= S.
  static OrderedPartition base(int S, int X0);

  /// Base partition refined by the given split vector.  Throws
  /// std::invalid_argument if any entry is out of range for its step or
  /// targets a singleton cell at its step.
  static OrderedPartition from_split_vector(int S, int X0, const std::vector<int>& rho);

  /// Splits cell `target` as step split_count()+1.  Throws
  /// std::invalid_argument if the target is a singleton or out of range.
  void split(int target);

  /// Records a skipped split step: cell X0+k is created empty and flagged
  /// singular so it is never targeted.  Only reachable when more cells are
  /// requested than states exist.
  void split_skipped();

  /// Drops all splits, returning to the base partition (capacity kept).
  void reset_to_base();

  int state_count() const { return S_; }
  int base_cell_count() const { return X0_; }
  int cell_count() const { return static_cast<int>(cells_.size()); }
  int split_count() const { return static_cast<int>(rho_.size()); }

  const Interval& cell(int j) const { return cells_[j - 1]; }
  const Interval& bar_set(int j) const { return bars_[j - 1]; }
  bool is_singleton(int j) const { return singleton_[j - 1] != 0; }
  const std::vector<int>& split_vector() const { return rho_; }
  const std::vector<Interval>& cells() const { return cells_; }
  const std::vector<Interval>& bar_sets() const { return bars_; }

  /// Cell index containing state s, via the split tree.
  int cell_of(int s) const {
    check_state(s);
    return walk(s, [](int) {});
  }

  /// Reference implementation of cell_of by scanning all cells.
  int cell_of_linear(int s) const;

  /// Indices j with s in bar_set(j), in walk order (base cell first).
  std::vector<int> bar_membership(int s) const {
    check_state(s);
    std::vector<int> out;
    out.push_back(base_cell_index(s));
    walk(s, [&out](int j) { out.push_back(j); });
    return out;
  }

  /// Walks the tree for state s, invoking fn(j) for every created cell j
  /// whose bar set contains s (in creation order).  Returns the cell index
  /// containing s.  The base cell index, whose bar set always contains s,
  /// is base_cell_index(s).  No bounds check: hot path.
  template <typename Fn>
  int walk(int s, Fn&& fn) const {
    return walk_from_base(base_cell_index(s), s, static_cast<Fn&&>(fn));
  }

  template <typename Fn>
  int walk_from_base(int base, int s, Fn&& fn) const {
    int link = base_root_[base - 1];
    while (link >= 0) {
      const Node& n = nodes_[link];
      if (s <= n.bound) {
        link = n.lower;
      } else {
        fn(n.new_cell);
        link = n.upper;
      }
    }
    return ~link;
  }

  int base_cell_index(int s) const {
    // binary search over base cell upper bounds
    int lo = 0, hi = X0_ - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (s <= base_hi_[mid]) hi = mid; else lo = mid + 1;
    }
    return lo + 1;
  }

  /// Longest root-to-leaf walk over all base cells (split nodes only).
  int max_walk_depth() const;

  /// One "lo-hi:cell_index" record per line, ordered by interval start.
  std::string debug_dump() const;

  bool same_cells(const OrderedPartition& other) const {
    return S_ == other.S_ && cells_ == other.cells_;
  }

 private:
  OrderedPartition() = default;
  void check_state(int s) const;

  struct Node {
    int bound;     // states <= bound take the lower branch
    int lower;     // node index, or ~cell_index when negative (leaf)
    int upper;
    int new_cell;  // cell created by this split (X0 + step)
  };

  int S_ = 0;
  int X0_ = 0;
  std::vector<Interval> cells_;
  std::vector<Interval> bars_;
  std::vector<std::uint8_t> singleton_;
  std::vector<int> rho_;
  std::vector<int> base_hi_;
  std::vector<Node> nodes_;
  std::vector<int> base_root_;          // link per base cell
  std::vector<std::pair<int, int>> slot_;  // per cell: {-1-base_idx, 0} or {node, side}
};

}  // namespace pasa
