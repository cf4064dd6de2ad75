#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "pasa/envs.hpp"

namespace pasa {

double TableMdp::max_abs_mean_reward() const {
  double m = 0.0;
  for (const auto& r : rewards) m = std::max(m, std::fabs(r.mean()));
  return m;
}

void TableMdp::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double total = rows[i].uniform_mix;
    for (auto [state, p] : rows[i].entries) {
      if (state < 1 || state > S) throw std::invalid_argument("table row references bad state");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12)
      throw std::invalid_argument("table row " + std::to_string(i) + " sums to " +
                                  std::to_string(total));
  }
}

void GarnetSpec::validate() const {
  if (S < 1 || A < 1) throw std::invalid_argument("garnet: need S >= 1 and A >= 1");
  if (!(zeta > 0.0)) throw std::invalid_argument("garnet: zeta must be > 0");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("garnet: delta must lie in [0, 1]");
}

Garnet Garnet::sample(const GarnetSpec& spec, Rng& rng) {
  spec.validate();
  Garnet env;
  env.spec_ = spec;
  const std::size_t n = static_cast<std::size_t>(spec.S) * spec.A;
  env.succ_.resize(n);
  env.reward_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    env.succ_[i] = 1 + static_cast<std::int32_t>(rng.uniform_below(spec.S));
  const double p = std::min(1.0, spec.zeta / spec.S);
  for (std::size_t i = 0; i < n; ++i)
    env.reward_[i] = rng.bernoulli(p) ? static_cast<double>(spec.S) : 0.0;
  env.initial_ = 1 + static_cast<int>(rng.uniform_below(spec.S));
  return env;
}

double Garnet::max_abs_mean_reward() const {
  for (double r : reward_)
    if (r != 0.0) return static_cast<double>(spec_.S);
  return 0.0;
}

TableMdp Garnet::to_table() const {
  TableMdp t;
  t.S = spec_.S;
  t.A = spec_.A;
  const std::size_t n = succ_.size();
  t.rows.resize(n);
  t.rewards.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.rows[i].uniform_mix = spec_.delta;
    t.rows[i].entries.push_back({succ_[i], 1.0 - spec_.delta});
    t.rewards[i] = RewardDist::constant(reward_[i]);
  }
  return t;
}

void Garnet::dump(std::ostream& out) const {
  out << "pasa-garnet v1\n";
  out << spec_.S << " " << spec_.A << " ";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", spec_.zeta, spec_.delta);
  out << buf;
  for (int s = 1; s <= spec_.S; ++s) {
    for (int a = 1; a <= spec_.A; ++a)
      out << successor(s, a) << (a == spec_.A ? "\n" : " ");
  }
  for (int s = 1; s <= spec_.S; ++s) {
    for (int a = 1; a <= spec_.A; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", reward_value(s, a));
      out << buf << (a == spec_.A ? "\n" : " ");
    }
  }
  out << initial_ << "\n";
}

Garnet Garnet::load(std::istream& in) {
  std::string tag, version;
  in >> tag >> version;
  if (tag != "pasa-garnet" || version != "v1")
    throw std::runtime_error("garnet load: unrecognised header '" + tag + " " + version + "'");
  Garnet env;
  in >> env.spec_.S >> env.spec_.A >> env.spec_.zeta >> env.spec_.delta;
  if (!in) throw std::runtime_error("garnet load: truncated spec line");
  env.spec_.validate();
  const std::size_t n = static_cast<std::size_t>(env.spec_.S) * env.spec_.A;
  env.succ_.resize(n);
  env.reward_.resize(n);
  for (auto& v : env.succ_) {
    in >> v;
    if (v < 1 || v > env.spec_.S) throw std::runtime_error("garnet load: successor out of range");
  }
  for (auto& v : env.reward_) in >> v;
  in >> env.initial_;
  if (!in) throw std::runtime_error("garnet load: truncated table");
  return env;
}

}  // namespace pasa
