#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "odyssey/core/types.hpp"
#include "odyssey/diffusion/schedule.hpp"
#include "odyssey/search/config.hpp"

namespace odyssey {

enum class Method { naive, best_of_n, beam, zero_order, eps_greedy, mcts };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::best_of_n: return "best_of_n";
    case Method::beam: return "beam";
    case Method::zero_order: return "zero_order";
    case Method::eps_greedy: return "eps_greedy";
    case Method::mcts: return "mcts";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "naive") return Method::naive;
  if (s == "best_of_n") return Method::best_of_n;
  if (s == "beam") return Method::beam;
  if (s == "zero_order") return Method::zero_order;
  if (s == "eps_greedy") return Method::eps_greedy;
  if (s == "mcts") return Method::mcts;
  throw ConfigError("unknown method '" + s +
                    "' (expected naive|best_of_n|beam|zero_order|eps_greedy|mcts)");
}

// Fully resolved experiment description, parsed from the exp-v1 text format.
struct ExperimentConfig {
  std::string model_spec;  // gmm-v1 path or builtin:<name>
  ScheduleKind sampler = ScheduleKind::VE;
  int steps = 18;
  double sigma_min = 0.002, sigma_max = 80.0, rho = 7.0;
  std::optional<double> churn;  // VE; defaults to 0 for naive, 40 when search is active
  double beta_min = 1e-4, beta_max = 0.02, eta = 1.0;  // VP
  Method method = Method::naive;
  std::string reward_spec = "classifier";
  std::vector<std::string> contexts;  // empty: every context in the model
  int images_per_context = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int repeats = 1;
  SearchConfig search;

  std::set<std::string> keys_set;

  bool has(const std::string& key) const { return keys_set.count(key) > 0; }

  double effective_churn() const {
    if (churn) return *churn;
    return method == Method::naive ? 0.0 : 40.0;
  }

  NoiseSchedule make_schedule() const {
    if (sampler == ScheduleKind::VE)
      return build_ve_schedule(steps, sigma_min, sigma_max, rho, effective_churn());
    return build_vp_schedule(steps, beta_min, beta_max, eta);
  }

  void validate() const {
    if (!has("method")) throw ConfigError("missing required field 'method'");
    if (model_spec.empty()) throw ConfigError("missing required field 'model'");
    if (images_per_context < 1) throw ConfigError("images_per_context must be >= 1");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    auto require = [&](const char* key) {
      if (!has(key))
        throw ConfigError(std::string("method '") + to_string(method) + "' requires field '" +
                          key + "'");
    };
    switch (method) {
      case Method::naive: break;
      case Method::best_of_n: require("N"); break;
      case Method::beam: require("N"); require("B"); break;
      case Method::zero_order: require("N"); require("K"); break;
      case Method::eps_greedy: require("N"); require("K"); break;
      case Method::mcts: require("N"); require("S"); break;
    }
    search.validate(steps);
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
  }
}

inline int to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(n);
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("field '" + key + "': expected 0/1/true/false, got '" + v + "'");
}

}  // namespace detail

// Applies one key/value pair; shared by the file parser and sweep overrides.
inline void apply_config_value(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int;
  if (key == "model") {
    cfg.model_spec = value;
  } else if (key == "sampler") {
    if (value == "ve") cfg.sampler = ScheduleKind::VE;
    else if (value == "vp") cfg.sampler = ScheduleKind::VP;
    else throw ConfigError("field 'sampler': expected ve|vp, got '" + value + "'");
  } else if (key == "steps") {
    cfg.steps = to_int(value, key);
  } else if (key == "sigma_min") {
    cfg.sigma_min = to_double(value, key);
  } else if (key == "sigma_max") {
    cfg.sigma_max = to_double(value, key);
  } else if (key == "rho") {
    cfg.rho = to_double(value, key);
  } else if (key == "churn") {
    cfg.churn = to_double(value, key);
  } else if (key == "beta_min") {
    cfg.beta_min = to_double(value, key);
  } else if (key == "beta_max") {
    cfg.beta_max = to_double(value, key);
  } else if (key == "eta") {
    cfg.eta = to_double(value, key);
  } else if (key == "method") {
    cfg.method = parse_method(value);
  } else if (key == "reward") {
    cfg.reward_spec = value;
  } else if (key == "contexts") {
    cfg.contexts = detail::split(value, ',');
  } else if (key == "images_per_context") {
    cfg.images_per_context = to_int(value, key);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "repeats") {
    cfg.repeats = to_int(value, key);
  } else if (key == "N") {
    cfg.search.branching = to_int(value, key);
  } else if (key == "K") {
    auto parts = detail::split(value, ',');
    if (parts.size() == 1) {
      cfg.search.local_iters = to_int(parts[0], key);
      cfg.search.k_schedule.clear();
    } else {
      cfg.search.k_schedule.clear();
      for (const auto& p : parts) cfg.search.k_schedule.push_back(to_int(p, key));
    }
  } else if (key == "lambda") {
    cfg.search.lambda = to_double(value, key);
  } else if (key == "epsilon") {
    cfg.search.epsilon = to_double(value, key);
  } else if (key == "S") {
    cfg.search.simulations = to_int(value, key);
  } else if (key == "B") {
    cfg.search.beam_width = to_int(value, key);
  } else if (key == "C") {
    cfg.search.ucb_c = to_double(value, key);
  } else if (key == "strict_pivot_replacement") {
    cfg.search.strict_pivot_replacement = to_bool(value, key);
  } else if (key == "mcts_fresh_rollout_noise") {
    cfg.search.mcts_fresh_rollout_noise = to_bool(value, key);
  } else if (key == "zero_order_mode") {
    if (value == "fixed") cfg.search.zero_order_mode = LocalMode::fixed_radius;
    else if (value == "uniform") cfg.search.zero_order_mode = LocalMode::uniform_radius;
    else throw ConfigError("field 'zero_order_mode': expected fixed|uniform, got '" + value + "'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
  cfg.keys_set.insert(key);
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<stream>") {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::size_t h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (!saw_header) {
      if (key != "exp-v1")
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'exp-v1' header");
      saw_header = true;
      continue;
    }
    std::string value;
    ls >> value;
    std::string extra;
    if (ls >> extra)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": unexpected trailing tokens");
    try {
      apply_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!saw_header) throw ConfigError(source + ": expected 'exp-v1' header");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(f, path);
}

}  // namespace odyssey
