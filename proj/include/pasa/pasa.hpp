#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "pasa/partition.hpp"

namespace pasa {

enum class ThresholdMode { additive, multiplicative };
enum class CounterMode { per_step, batched };

struct PasaParams {
  double varsigma = 1e-8;     // visit estimate step size
  double vartheta = 0.9;      // split reassignment threshold
  std::int64_t nu = 50000;    // iterations between repartitions
  ThresholdMode threshold_mode = ThresholdMode::multiplicative;
  CounterMode counter_mode = CounterMode::batched;
  bool preserve_estimates = true;     // carry estimates across matching recreated bar sets
  std::vector<double> varsigma_vector;  // optional per-index step sizes (per-step mode only)

  void validate(int X) const;
};

struct RepartitionReport {
  std::int64_t iteration = 0;
  std::vector<int> old_rho;
  std::vector<int> new_rho;
  int cells_changed = 0;
  bool partition_changed = false;
};

/// Deterministic cell-to-split sequence used to initialise the split
/// vector: rounds (1), (1,2), (1,2,3,4), (1,...,8), ...  Entry at 0-based
/// position p.
int split_sequence_at(std::int64_t p);

/**
 * Visit-frequency tracker and periodic repartitioner.
 *
 * Each call to tick(s) updates the estimates u_bar of how often the agent
 * visits each tracking set, and every nu calls regenerates the split
 * vector and with it the partition: a working copy u of u_bar is refined
 * step by step, at each step the non-singleton candidate cell with the
 * highest estimate is found, the stored split target is replaced when it
 * falls behind that maximum by more than the threshold, the parent
 * estimate is reduced by the estimate of the newly split-off cell, and the
 * split is applied.
 *
 * In per_step counter mode every estimate is updated every iteration; in
 * batched mode only membership counters are incremented per iteration and
 * the estimates are folded once per repartition with the step size
 * reweighted as 1-(1-varsigma)^nu, so one fold matches nu per-step
 * updates of a constant signal.
 *
 * Single writer; one instance per agent.
 */
class Pasa {
 public:
  /// Builds the base partition plus an initial split vector that continues
  /// the base splitting sequence, skipping entries that would target a
  /// singleton or an out-of-range cell.  Requires X0 <= X <= S so every
  /// split step always has a non-singleton candidate.
  Pasa(int S, int X0, int X, PasaParams params);

  /// Starts from an explicitly provided initial split configuration.
  Pasa(OrderedPartition initial, PasaParams params);

  /// One iteration: update estimates for state s, advance the counter, and
  /// repartition when the counter wraps the period.
  std::optional<RepartitionReport> tick(int s);

  /// Hot-path variant of tick: shares one tree walk between the visit
  /// counting and the cell lookup.  Returns the cell containing s, negated
  /// when this call ran the periodic update (in which case the cell refers
  /// to the new partition).  Batched counter mode only.
  int observe(int s) {
    const int base = partition_.base_cell_index(s);
    ++counters_[base - 1];
    const int cell = partition_.walk_from_base(base, s, [this](int j) { ++counters_[j - 1]; });
    if (++c_ != params_.nu) return cell;
    last_report_ = repartition();
    return -partition_.cell_of(s);
  }

  const RepartitionReport& last_report() const { return last_report_; }

  /// Forces the periodic update now (tests and manual drivers).  The tick
  /// counter is reset.
  RepartitionReport repartition();

  const OrderedPartition& partition() const { return partition_; }
  const std::vector<double>& u_bar() const { return u_bar_; }
  const std::vector<double>& last_working_u() const { return u_; }
  const std::vector<std::int32_t>& visit_counters() const { return counters_; }
  std::int64_t counter() const { return c_; }
  std::int64_t total_ticks() const { return ticks_base_ + c_; }
  std::int64_t repartition_count() const { return repartitions_; }
  const PasaParams& params() const { return params_; }

  /// Overwrites the visit estimates (tests and walkthrough drivers).
  void set_u_bar(const std::vector<double>& values);

  /// Optional line-per-repartition event log (iteration, old and new split
  /// vector, estimate snapshot).
  void set_event_log(std::ostream* sink) { log_ = sink; }

 private:
  void fold_batched_counters();
  double step_size(int index) const;

  PasaParams params_;
  OrderedPartition partition_;
  std::vector<double> u_bar_;
  std::vector<double> u_;
  std::vector<int> rho_;
  std::vector<std::int32_t> counters_;
  std::int64_t c_ = 0;
  std::int64_t ticks_base_ = 0;
  std::int64_t repartitions_ = 0;
  double batched_step_ = 0.0;
  RepartitionReport last_report_;
  std::ostream* log_ = nullptr;
  // scratch for estimate preservation
  std::vector<Interval> old_bars_;
  std::vector<double> old_u_bar_;
};

}  // namespace pasa
