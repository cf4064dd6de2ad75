#include <cmath>
#include <stdexcept>

#include "pasa/envs.hpp"

namespace pasa {

// Bit layout of the 18-digit state string, most significant first:
//   depot stock   4 bits (0..12)
//   store 1       2 bits (0..3)
//   store 2       3 bits (0..4)
//   store 3       2 bits (0..3)
//   store 4       3 bits (0..6)
//   truck at      3 bits (0 = depot, 1..4 = stores)
//   truck loaded  1 bit
// Occupiable combinations: 13*4*5*4*7*5*2 = 72,800 of the 2^18 = 262,144
// encodable strings.

namespace {
constexpr int kBits[7] = {4, 2, 3, 2, 3, 3, 1};
}

int Logistics::encode(const LogisticsState& st) {
  const int fields[7] = {st.depot,    st.store[0], st.store[1], st.store[2],
                         st.store[3], st.truck_location, st.truck_loaded};
  int bits = 0;
  for (int i = 0; i < 7; ++i) bits = (bits << kBits[i]) | fields[i];
  return bits + 1;
}

LogisticsState Logistics::decode(int state_index) {
  if (state_index < 1 || state_index > (1 << 18))
    throw std::invalid_argument("logistics: state index outside [1, 2^18]");
  int bits = state_index - 1;
  int fields[7];
  for (int i = 6; i >= 0; --i) {
    fields[i] = bits & ((1 << kBits[i]) - 1);
    bits >>= kBits[i];
  }
  LogisticsState st;
  st.depot = fields[0];
  st.store = {fields[1], fields[2], fields[3], fields[4]};
  st.truck_location = fields[5];
  st.truck_loaded = fields[6];
  return st;
}

bool Logistics::is_reachable(const LogisticsState& st) const {
  if (st.depot < 0 || st.depot > spec_.capacities[0]) return false;
  for (int i = 0; i < 4; ++i)
    if (st.store[i] < 0 || st.store[i] > spec_.capacities[i + 1]) return false;
  if (st.truck_location < 0 || st.truck_location > 4) return false;
  return st.truck_loaded == 0 || st.truck_loaded == 1;
}

std::int64_t Logistics::reachable_state_count(const LogisticsSpec& spec) {
  std::int64_t n = 1;
  for (int c : spec.capacities) n *= c + 1;
  return n * 5 * 2;  // truck location, loaded flag
}

Logistics Logistics::sample(const LogisticsSpec& spec, Rng& rng) {
  Logistics env;
  env.spec_ = spec;
  env.transport_cost_ = rng.uniform(spec.transport_cost_lo, spec.transport_cost_hi);
  for (int i = 0; i < 5; ++i)
    env.rent_[i] = rng.uniform(spec.rent_range[i].first, spec.rent_range[i].second);
  env.initial_ = encode(LogisticsState{});  // empty network, truck at depot
  return env;
}

// Dynamics rules, applied in order within one iteration:
//   1. the chosen action (one of order / load / unload / move), where an
//      action whose precondition fails leaves the stocks and truck
//      unchanged but still incurs its cost:
//        order   depot stock +1 if below capacity; costs order_cost
//        load    if the truck is empty and its location has stock, move
//                one unit onto the truck; free
//        unload  if the truck is loaded and its location is below
//                capacity, move the unit into the location; free
//        move k  relocate the truck to location k; costs transport_cost
//                unless already there
//   2. sales: every store with stock sells sales_rate units (stock
//      permitting), each earning sale_revenue
//   3. rent accrues on every unit held at every location
int Logistics::step(int s, int a, Rng&, double* reward) const {
  LogisticsState st = decode(s);
  if (!is_reachable(st))
    throw std::invalid_argument("logistics: state " + std::to_string(s) + " is not occupiable");
  if (a < 1 || a > 8) throw std::invalid_argument("logistics: action outside [1, 8]");

  double r = 0.0;
  auto stock_at = [&](int loc) -> int& { return loc == 0 ? st.depot : st.store[loc - 1]; };

  if (a == 1) {  // order
    r += spec_.order_cost;
    if (st.depot < spec_.capacities[0]) ++st.depot;
  } else if (a == 2) {  // load
    int& stock = stock_at(st.truck_location);
    if (st.truck_loaded == 0 && stock > 0) {
      --stock;
      st.truck_loaded = 1;
    }
  } else if (a == 3) {  // unload
    int& stock = stock_at(st.truck_location);
    if (st.truck_loaded == 1 && stock < spec_.capacities[st.truck_location]) {
      ++stock;
      st.truck_loaded = 0;
    }
  } else {  // move to location a-4
    const int target = a - 4;
    if (target != st.truck_location) {
      st.truck_location = target;
      r += transport_cost_;
    }
  }

  for (int i = 0; i < 4; ++i) {
    const int sold = std::min(st.store[i], spec_.sales_rate);
    st.store[i] -= sold;
    r += sold * spec_.sale_revenue;
  }

  r += st.depot * rent_[0];
  for (int i = 0; i < 4; ++i) r += st.store[i] * rent_[i + 1];

  *reward = r;
  return encode(st);
}

double Logistics::max_abs_mean_reward() const {
  double worst_rent = 0.0;
  for (int i = 0; i < 5; ++i) worst_rent += spec_.capacities[i] * std::fabs(rent_[i]);
  const double best_sales = 4.0 * spec_.sales_rate * spec_.sale_revenue;
  return best_sales + std::fabs(spec_.order_cost) + std::fabs(transport_cost_) + worst_rent;
}

}  // namespace pasa
