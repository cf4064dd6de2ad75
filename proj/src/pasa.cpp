#include "pasa/pasa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pasa {

void PasaParams::validate(int X) const {
  if (nu < 1) throw std::invalid_argument("pasa: nu must be >= 1");
  if (!(varsigma >= 0.0 && varsigma <= 1.0))
    throw std::invalid_argument("pasa: varsigma must lie in [0, 1]");
  if (threshold_mode == ThresholdMode::additive) {
    if (!(vartheta > 0.0)) throw std::invalid_argument("pasa: additive vartheta must be > 0");
  } else {
    if (!(vartheta > 0.0 && vartheta < 1.0))
      throw std::invalid_argument("pasa: multiplicative vartheta must lie in (0, 1)");
  }
  if (!varsigma_vector.empty()) {
    if (counter_mode != CounterMode::per_step)
      throw std::invalid_argument("pasa: per-index step sizes require per-step counter mode");
    if (static_cast<int>(varsigma_vector.size()) != X)
      throw std::invalid_argument("pasa: step size vector must have one entry per cell");
    for (double v : varsigma_vector)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("pasa: step size entries must lie in [0, 1]");
  }
}

int split_sequence_at(std::int64_t p) {
  std::int64_t len = 1;
  while (p >= len) {
    p -= len;
    len *= 2;
  }
  return static_cast<int>(p + 1);
}

namespace {

OrderedPartition initial_partition(int S, int X0, int X) {
  if (X < X0) throw std::invalid_argument("pasa: need X >= X0");
  if (X > S) throw std::invalid_argument("pasa: need X <= S so every split has a target");
  OrderedPartition p = OrderedPartition::base(S, X0);
  // Continue the base splitting sequence; the base construction stands in
  // for its first X0-1 entries.
  std::int64_t pos = X0 - 1;
  for (int k = 1; k <= X - X0; ++k) {
    for (;;) {
      const int candidate = split_sequence_at(pos++);
      if (candidate <= X0 + k - 1 && !p.is_singleton(candidate)) {
        p.split(candidate);
        break;
      }
    }
  }
  return p;
}

}  // namespace

Pasa::Pasa(int S, int X0, int X, PasaParams params)
    : Pasa(initial_partition(S, X0, X), std::move(params)) {}

Pasa::Pasa(OrderedPartition initial, PasaParams params)
    : params_(std::move(params)), partition_(std::move(initial)) {
  const int X = partition_.cell_count();
  if (X > partition_.state_count())
    throw std::invalid_argument("pasa: need X <= S so every split has a target");
  params_.validate(X);
  u_bar_.assign(X, 0.0);
  u_.assign(X, 0.0);
  rho_ = partition_.split_vector();
  counters_.assign(X, 0);
  batched_step_ = -std::expm1(static_cast<double>(params_.nu) * std::log1p(-params_.varsigma));
}

double Pasa::step_size(int index) const {
  return params_.varsigma_vector.empty() ? params_.varsigma : params_.varsigma_vector[index];
}

std::optional<RepartitionReport> Pasa::tick(int s) {
  if (params_.counter_mode == CounterMode::per_step) {
    const int X = partition_.cell_count();
    const auto& bars = partition_.bar_sets();
    for (int j = 0; j < X; ++j) {
      const double indicator = bars[j].contains(s) ? 1.0 : 0.0;
      u_bar_[j] += step_size(j) * (indicator - u_bar_[j]);
    }
  } else {
    ++counters_[partition_.base_cell_index(s) - 1];
    partition_.walk(s, [this](int j) { ++counters_[j - 1]; });
  }
  if (++c_ == params_.nu) {
    return repartition();
  }
  return std::nullopt;
}

void Pasa::fold_batched_counters() {
  if (c_ == 0) return;
  const double denom = static_cast<double>(c_);
  const double step = (c_ == params_.nu)
                          ? batched_step_
                          : -std::expm1(denom * std::log1p(-params_.varsigma));
  for (std::size_t j = 0; j < u_bar_.size(); ++j) {
    u_bar_[j] += step * (static_cast<double>(counters_[j]) / denom - u_bar_[j]);
    counters_[j] = 0;
  }
}

RepartitionReport Pasa::repartition() {
  if (params_.counter_mode == CounterMode::batched) fold_batched_counters();
  ticks_base_ += c_;
  c_ = 0;

  const int X = partition_.cell_count();
  const int X0 = partition_.base_cell_count();

  RepartitionReport report;
  report.iteration = ticks_base_;
  report.old_rho = rho_;

  old_bars_ = partition_.bar_sets();
  old_u_bar_ = u_bar_;
  std::vector<Interval> old_cells = partition_.cells();

  u_ = u_bar_;
  partition_.reset_to_base();

  for (int k = 1; k <= X - X0; ++k) {
    // highest-estimate candidate among live non-singleton cells, lowest
    // index winning ties
    double u_max = 0.0;
    int i_max = 0;
    for (int i = 1; i <= X0 + k - 1; ++i) {
      if (partition_.is_singleton(i)) continue;
      if (i_max == 0 || u_[i - 1] > u_max) {
        u_max = u_[i - 1];
        i_max = i;
      }
    }
    if (i_max == 0) {
      // no splittable cell (only possible when X > S, which construction
      // rejects); leave rho alone and skip the step
      partition_.split_skipped();
      continue;
    }
    const int current = rho_[k - 1];
    const bool current_splittable =
        current >= 1 && current <= X0 + k - 1 && !partition_.is_singleton(current);
    const double held = current_splittable ? u_[current - 1] : 0.0;
    bool move = params_.threshold_mode == ThresholdMode::additive
                    ? held < u_max - params_.vartheta
                    : held < u_max * params_.vartheta;
    if (!current_splittable) move = true;  // a singleton target cannot be split
    if (move) rho_[k - 1] = i_max;

    u_[rho_[k - 1] - 1] -= u_[X0 + k - 1];
    partition_.split(rho_[k - 1]);
  }

  if (params_.preserve_estimates) {
    // carry estimates over to recreated tracking sets that cover the same
    // interval as before, wherever they ended up in the index order
    std::vector<std::pair<std::int64_t, double>> lookup;
    lookup.reserve(old_bars_.size());
    for (std::size_t j = 0; j < old_bars_.size(); ++j) {
      const Interval& iv = old_bars_[j];
      if (!iv.empty())
        lookup.push_back({(static_cast<std::int64_t>(iv.lo) << 32) | iv.hi, old_u_bar_[j]});
    }
    std::sort(lookup.begin(), lookup.end());
    for (int j = X0 + 1; j <= partition_.cell_count(); ++j) {
      const Interval& iv = partition_.bar_set(j);
      if (iv.empty()) continue;
      const std::int64_t key = (static_cast<std::int64_t>(iv.lo) << 32) | iv.hi;
      auto it = std::lower_bound(lookup.begin(), lookup.end(), key,
                                 [](const auto& a, std::int64_t b) { return a.first < b; });
      if (it != lookup.end() && it->first == key) u_bar_[j - 1] = it->second;
    }
  }

  report.new_rho = rho_;
  report.partition_changed = report.new_rho != report.old_rho;
  for (int j = 0; j < partition_.cell_count(); ++j)
    if (partition_.cells()[j] != old_cells[j]) ++report.cells_changed;
  ++repartitions_;
  last_report_ = report;

  if (log_) {
    auto join = [](const std::vector<int>& v) {
      std::string s;
      char buf[16];
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%d", i ? "," : "", v[i]);
        s += buf;
      }
      return s;
    };
    *log_ << "t=" << report.iteration << " old=" << join(report.old_rho)
          << " new=" << join(report.new_rho) << " ubar=";
    char buf[32];
    for (std::size_t j = 0; j < u_bar_.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.9g", j ? "," : "", u_bar_[j]);
      *log_ << buf;
    }
    *log_ << "\n";
  }
  return report;
}

void Pasa::set_u_bar(const std::vector<double>& values) {
  if (values.size() != u_bar_.size())
    throw std::invalid_argument("u_bar size mismatch");
  u_bar_ = values;
}

}  // namespace pasa
