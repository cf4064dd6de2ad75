#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pasa/harness.hpp"

namespace pasa {

const char* to_string(EnvFamily f) {
  switch (f) {
    case EnvFamily::garnet: return "garnet";
    case EnvFamily::gridworld: return "gridworld";
    default: return "logistics";
  }
}
const char* to_string(AgentVariant v) {
  switch (v) {
    case AgentVariant::tabular: return "tabular";
    case AgentVariant::fixed_agg: return "fixed";
    default: return "pasa";
  }
}
const char* to_string(RunMode m) { return m == RunMode::performance ? "performance" : "mse"; }

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config: " + key + ": " + why);
}

std::int64_t parse_int(const std::string& key, const std::string& v, std::int64_t lo,
                       std::int64_t hi) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad(key, "expected integer, got '" + v + "'");
  if (out < lo || out > hi)
    bad(key, "value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    bad(key, "expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  bad(key, "expected 0/1/true/false, got '" + v + "'");
}

std::string format_real(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "schema") {
    schema = static_cast<int>(parse_int(key, value, 1, 1));
  } else if (key == "family") {
    if (value == "garnet") family = EnvFamily::garnet;
    else if (value == "gridworld") family = EnvFamily::gridworld;
    else if (value == "logistics") family = EnvFamily::logistics;
    else bad(key, "expected garnet|gridworld|logistics");
  } else if (key == "mode") {
    if (value == "performance") mode = RunMode::performance;
    else if (value == "mse") mode = RunMode::mse;
    else bad(key, "expected performance|mse");
  } else if (key == "agent") {
    if (value == "tabular") agent = AgentVariant::tabular;
    else if (value == "fixed") agent = AgentVariant::fixed_agg;
    else if (value == "pasa") agent = AgentVariant::pasa_agg;
    else bad(key, "expected tabular|fixed|pasa");
  } else if (key == "garnet.S") {
    garnet.S = static_cast<int>(parse_int(key, value, 1, 100'000'000));
  } else if (key == "garnet.A") {
    garnet.A = static_cast<int>(parse_int(key, value, 1, 1024));
  } else if (key == "garnet.zeta") {
    garnet.zeta = parse_real(key, value);
  } else if (key == "garnet.delta") {
    garnet.delta = parse_real(key, value);
  } else if (key == "grid.N") {
    grid.N = static_cast<int>(parse_int(key, value, 2, 10'000));
  } else if (key == "grid.r") {
    grid.r = static_cast<int>(parse_int(key, value, 1, 100'000'000));
  } else if (key == "grid.random_teleport") {
    grid.random_teleport = parse_bool(key, value);
  } else if (key == "sarsa.eta") {
    sarsa.eta = parse_real(key, value);
  } else if (key == "sarsa.gamma") {
    sarsa.gamma = parse_real(key, value);
  } else if (key == "sarsa.epsilon") {
    sarsa.epsilon = parse_real(key, value);
  } else if (key == "sarsa.reciprocal_pi") {
    sarsa.reciprocal_pi_weighting = parse_bool(key, value);
  } else if (key == "sarsa.weight_transfer") {
    sarsa.weight_transfer = parse_bool(key, value);
  } else if (key == "pasa.varsigma") {
    pasa.varsigma = parse_real(key, value);
  } else if (key == "pasa.vartheta") {
    pasa.vartheta = parse_real(key, value);
  } else if (key == "pasa.nu") {
    pasa.nu = parse_int(key, value, 1, 1'000'000'000);
  } else if (key == "pasa.threshold_mode") {
    if (value == "additive") pasa.threshold_mode = ThresholdMode::additive;
    else if (value == "multiplicative") pasa.threshold_mode = ThresholdMode::multiplicative;
    else bad(key, "expected additive|multiplicative");
  } else if (key == "pasa.counter_mode") {
    if (value == "per_step") pasa.counter_mode = CounterMode::per_step;
    else if (value == "batched") pasa.counter_mode = CounterMode::batched;
    else bad(key, "expected per_step|batched");
  } else if (key == "pasa.preserve_estimates") {
    pasa.preserve_estimates = parse_bool(key, value);
  } else if (key == "X") {
    X = static_cast<int>(parse_int(key, value, 1, 100'000'000));
  } else if (key == "X0") {
    X0 = static_cast<int>(parse_int(key, value, 0, 100'000'000));
  } else if (key == "trials") {
    trials = static_cast<int>(parse_int(key, value, 0, 1'000'000));
  } else if (key == "iterations") {
    iterations = parse_int(key, value, 0, 1'000'000'000'000LL);
  } else if (key == "windows") {
    windows = static_cast<int>(parse_int(key, value, 1, 1'000'000));
  } else if (key == "measure_fraction") {
    measure_fraction = parse_real(key, value);
  } else if (key == "checkpoint_every") {
    checkpoint_every = parse_int(key, value, 0, 1'000'000'000'000LL);
  } else if (key == "ci_level") {
    ci_level = parse_real(key, value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value, 0, 9'007'199'254'740'992LL));
  } else if (key == "mse_capacity") {
    mse_capacity = static_cast<int>(parse_int(key, value, 1, 100'000'000));
  } else {
    bad(key, "unknown key");
  }
}

void ExperimentConfig::apply_text(const std::string& text, bool require_schema) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_schema = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "schema") saw_schema = true;
    set(key, value);
  }
  if (require_schema && !saw_schema)
    throw ConfigError("config: schema: missing (expected 'schema = 1')");
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  ExperimentConfig cfg;
  cfg.apply_text(text, true);
  return cfg;
}

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_text(buf.str(), true);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ExperimentConfig cfg;
  cfg.apply_file(path);
  return cfg;
}

void ExperimentConfig::resolve() {
  if (X0 == 0) X0 = std::max(1, X / 2);
  if (checkpoint_every == 0) checkpoint_every = std::max<std::int64_t>(1, iterations / 50);
}

void ExperimentConfig::validate() const {
  if (X0 > X) throw ConfigError("config: X0: must not exceed X");
  try {
    sarsa.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: sarsa: ") + e.what());
  }
  try {
    pasa.validate(X);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: pasa: ") + e.what());
  }
  if (!(measure_fraction > 0.0 && measure_fraction <= 1.0))
    throw ConfigError("config: measure_fraction: must lie in (0, 1]");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw ConfigError("config: ci_level: must lie in (0, 1)");
  int S = 0;
  switch (family) {
    case EnvFamily::garnet:
      try {
        garnet.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: garnet: ") + e.what());
      }
      S = garnet.S;
      break;
    case EnvFamily::gridworld:
      try {
        grid.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: grid: ") + e.what());
      }
      S = grid.N * grid.N;
      break;
    case EnvFamily::logistics:
      S = 1 << 18;
      break;
  }
  if (agent != AgentVariant::tabular && X > S)
    throw ConfigError("config: X: exceeds the state count " + std::to_string(S));
  if (mode == RunMode::mse) {
    if (family == EnvFamily::logistics)
      throw ConfigError("config: mode: mse requires a table-backed family (garnet or gridworld)");
    if (S > mse_capacity)
      throw CapacityError("mse oracle: S = " + std::to_string(S) + " exceeds the dense capacity " +
                          std::to_string(mse_capacity));
  }
}

std::string ExperimentConfig::serialize() const {
  std::map<std::string, std::string> kv;
  kv["schema"] = std::to_string(schema);
  kv["family"] = to_string(family);
  kv["mode"] = to_string(mode);
  kv["agent"] = to_string(agent);
  kv["garnet.S"] = std::to_string(garnet.S);
  kv["garnet.A"] = std::to_string(garnet.A);
  kv["garnet.zeta"] = format_real(garnet.zeta);
  kv["garnet.delta"] = format_real(garnet.delta);
  kv["grid.N"] = std::to_string(grid.N);
  kv["grid.r"] = std::to_string(grid.r);
  kv["grid.random_teleport"] = grid.random_teleport ? "1" : "0";
  kv["sarsa.eta"] = format_real(sarsa.eta);
  kv["sarsa.gamma"] = format_real(sarsa.gamma);
  kv["sarsa.epsilon"] = format_real(sarsa.epsilon);
  kv["sarsa.reciprocal_pi"] = sarsa.reciprocal_pi_weighting ? "1" : "0";
  kv["sarsa.weight_transfer"] = sarsa.weight_transfer ? "1" : "0";
  kv["pasa.varsigma"] = format_real(pasa.varsigma);
  kv["pasa.vartheta"] = format_real(pasa.vartheta);
  kv["pasa.nu"] = std::to_string(pasa.nu);
  kv["pasa.threshold_mode"] =
      pasa.threshold_mode == ThresholdMode::additive ? "additive" : "multiplicative";
  kv["pasa.counter_mode"] = pasa.counter_mode == CounterMode::per_step ? "per_step" : "batched";
  kv["pasa.preserve_estimates"] = pasa.preserve_estimates ? "1" : "0";
  kv["X"] = std::to_string(X);
  kv["X0"] = std::to_string(X0);
  kv["trials"] = std::to_string(trials);
  kv["iterations"] = std::to_string(iterations);
  kv["windows"] = std::to_string(windows);
  kv["measure_fraction"] = format_real(measure_fraction);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);
  kv["ci_level"] = format_real(ci_level);
  kv["seed"] = std::to_string(seed);
  kv["mse_capacity"] = std::to_string(mse_capacity);

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace pasa
