#pragma once

// Scenario configs, runs and reports.
//
// Config format: one `key = value` per line, `#` starts a comment. Keys:
//
//   name         free text label
//   environment  heavenhell:<i> | onlyone:<N>:<y*> | lazy | sp:<bits> | sg:<file>
//                | fm:<file>:<truth-index> | tabular:<file> | program:<hex>
//   agent        aimu | aixi | greedy | aixitl | fixed-program
//   program      hex code of the policy for agent = fixed-program
//   l_max        program length bound in bits (pool for aixi/aixitl on program-backed classes)
//   t_max        steps per cycle
//   horizon      fixed:<m> | moving:<h> | proportional:<beta> | geometric:<gamma>:<window>
//   lifetime     number of cycles
//   seed         seed for sampled percepts
//   output       output directory
//   actions, observations, rewards (comma list), r_max
//                alphabet for program environments
//   bounds       yes to emit convergence and loss bound reports (program environments)
//
// File paths are relative to the config file's directory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aixi/aixitl.hpp"
#include "aixi/core.hpp"
#include "aixi/domains.hpp"
#include "aixi/eval.hpp"
#include "aixi/model.hpp"
#include "aixi/planner.hpp"
#include "aixi/vm.hpp"

namespace aixi::cli {

inline constexpr const char* version = "0.1.0";

struct config_caps {
  std::size_t max_lifetime = 64;
  std::size_t max_l = 12;
  std::size_t max_t = 100000;
};

struct scenario_config {
  std::string name = "scenario";
  std::string environment;
  std::string agent;
  std::string program;
  std::size_t l_max = 6;
  std::size_t t_max = 32;
  horizon_policy horizon = fixed_horizon{1};
  std::size_t lifetime = 0;
  std::uint64_t seed = 0;
  std::string output = "out";
  alphabet symbols;
  bool bounds = false;
  std::filesystem::path base_dir = ".";
  /// Canonical key = value lines, sorted by key.
  std::map<std::string, std::string> entries;
};

inline const std::set<std::string>& agent_kinds() {
  static const std::set<std::string> kinds{"aimu", "aixi", "greedy", "aixitl", "fixed-program"};
  return kinds;
}

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& value, std::vector<std::string>& problems) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(value, &used);
    if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    problems.push_back(key + ": expected a nonnegative integer, got '" + value + "'");
    return 0;
  }
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw validation_error({"cannot read '" + p.string() + "'"});
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace detail

/// Files the environment spec refers to, resolved against the config directory.
inline std::vector<std::filesystem::path> referenced_files(const scenario_config& cfg) {
  auto parts = detail::split(cfg.environment, ':');
  if (parts.size() >= 2 && (parts[0] == "sg" || parts[0] == "fm" || parts[0] == "tabular"))
    return {cfg.base_dir / parts[1]};
  return {};
}

/// Parses and validates; throws validation_error listing every violation.
inline scenario_config parse_config(std::istream& in, const std::filesystem::path& base_dir = ".",
                                    const config_caps& caps = {}) {
  scenario_config cfg;
  cfg.base_dir = base_dir;
  std::vector<std::string> problems;
  static const std::set<std::string> known{"name",    "environment", "agent",   "program", "l_max",
                                           "t_max",   "horizon",     "lifetime", "seed",    "output",
                                           "actions", "observations", "rewards", "r_max",   "bounds"};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (!known.count(key)) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    if (cfg.entries.count(key)) problems.push_back("duplicate key '" + key + "'");
    cfg.entries[key] = value;
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = cfg.entries.find(key);
    if (it == cfg.entries.end()) return std::nullopt;
    return it->second;
  };
  for (const char* required : {"environment", "agent", "lifetime"})
    if (!get(required)) problems.push_back(std::string("missing key '") + required + "'");

  if (auto v = get("name")) cfg.name = *v;
  if (auto v = get("environment")) cfg.environment = *v;
  if (auto v = get("agent")) {
    cfg.agent = *v;
    if (!agent_kinds().count(cfg.agent)) problems.push_back("unknown agent kind '" + cfg.agent + "'");
  }
  if (auto v = get("program")) cfg.program = *v;
  if (auto v = get("l_max")) cfg.l_max = detail::parse_count("l_max", *v, problems);
  if (auto v = get("t_max")) cfg.t_max = detail::parse_count("t_max", *v, problems);
  if (auto v = get("lifetime")) cfg.lifetime = detail::parse_count("lifetime", *v, problems);
  if (auto v = get("seed")) cfg.seed = detail::parse_count("seed", *v, problems);
  if (auto v = get("output")) cfg.output = *v;
  if (auto v = get("bounds")) cfg.bounds = *v == "yes" || *v == "true" || *v == "1";
  if (auto v = get("horizon")) {
    try {
      cfg.horizon = parse_horizon(*v);
      for (auto& p : horizon_violations(cfg.horizon)) problems.push_back("horizon: " + p);
    } catch (const std::exception& e) {
      problems.push_back(std::string("horizon: ") + e.what());
    }
  } else {
    cfg.horizon = fixed_horizon{cfg.lifetime == 0 ? 1 : cfg.lifetime};
  }
  if (auto v = get("actions")) cfg.symbols.actions = detail::parse_count("actions", *v, problems);
  if (auto v = get("observations")) cfg.symbols.observations = detail::parse_count("observations", *v, problems);
  try {
    if (auto v = get("r_max")) cfg.symbols.r_max = parse_rational(*v);
    if (auto v = get("rewards")) {
      cfg.symbols.rewards.clear();
      for (const auto& r : detail::split(*v, ',')) cfg.symbols.rewards.push_back(parse_rational(detail::trim(r)));
    } else if (get("r_max")) {
      cfg.symbols.rewards = {rational(0), cfg.symbols.r_max};
    }
  } catch (const std::exception& e) {
    problems.push_back(std::string("alphabet: ") + e.what());
  }
  for (auto& p : cfg.symbols.violations()) problems.push_back("alphabet: " + p);

  if (get("lifetime") && (cfg.lifetime < 1 || cfg.lifetime > caps.max_lifetime))
    problems.push_back("lifetime must be in [1, " + std::to_string(caps.max_lifetime) + "]");
  if (cfg.l_max < 1 || cfg.l_max > caps.max_l) problems.push_back("l_max must be in [1, " + std::to_string(caps.max_l) + "]");
  if (cfg.t_max < 1 || cfg.t_max > caps.max_t) problems.push_back("t_max must be in [1, " + std::to_string(caps.max_t) + "]");
  if (cfg.agent == "fixed-program") {
    if (cfg.program.empty()) problems.emplace_back("agent fixed-program needs key 'program'");
    else if (!vm::decode_hex(cfg.program)) problems.push_back("program '" + cfg.program + "' does not decode");
  }

  if (!cfg.environment.empty()) {
    auto parts = detail::split(cfg.environment, ':');
    const auto& kind = parts[0];
    auto want = [&](std::size_t n) {
      if (parts.size() != n) problems.push_back("environment '" + cfg.environment + "' needs " + std::to_string(n - 1) + " argument(s)");
    };
    if (kind == "heavenhell") {
      want(2);
      if (parts.size() == 2 && parts[1] != "0" && parts[1] != "1") problems.emplace_back("heavenhell index must be 0 or 1");
    } else if (kind == "onlyone") {
      want(3);
      if (parts.size() == 3) {
        auto n = detail::parse_count("onlyone N", parts[1], problems);
        auto y = detail::parse_count("onlyone y*", parts[2], problems);
        if (n < 1 || y >= n) problems.emplace_back("onlyone needs y* < N");
      }
    } else if (kind == "lazy") {
      want(1);
    } else if (kind == "sp") {
      want(2);
      if (parts.size() == 2 && (parts[1].empty() || parts[1].find_first_not_of("01") != std::string::npos))
        problems.emplace_back("sp needs a bit string");
    } else if (kind == "sg" || kind == "tabular") {
      want(2);
    } else if (kind == "fm") {
      want(3);
      if (parts.size() == 3) detail::parse_count("fm truth index", parts[2], problems);
    } else if (kind == "program") {
      want(2);
      if (parts.size() == 2 && !vm::decode_hex(parts[1])) problems.push_back("environment program does not decode");
    } else {
      problems.push_back("unknown environment kind '" + kind + "'");
    }
    for (const auto& f : referenced_files(cfg))
      if (!std::filesystem::exists(f)) problems.push_back("referenced file '" + f.string() + "' does not exist");
  }
  if (!problems.empty()) throw validation_error(std::move(problems));
  return cfg;
}

inline scenario_config load_config(const std::filesystem::path& path, const config_caps& caps = {}) {
  std::ifstream in(path);
  if (!in) throw validation_error({"cannot read config '" + path.string() + "'"});
  return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), caps);
}

/// Canonical config text: sorted key = value lines.
inline std::string canonical_config(const scenario_config& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries) out += k + " = " + v + "\n";
  return out;
}

/// The environment a scenario runs against and the model each agent kind plans with.
struct environment_setup {
  model_ptr truth;
  /// Model used by aimu and greedy (the truth unless the class is Bayesian, as for fm).
  model_ptr informed;
  /// Mixture used by aixi.
  std::shared_ptr<mixture_model> mixture;
  alphabet symbols;
};

inline environment_setup build_environment(const scenario_config& cfg) {
  auto parts = detail::split(cfg.environment, ':');
  const auto& kind = parts[0];
  vm::run_budget budget{cfg.t_max};
  environment_setup env;
  auto uniform_class = [](const std::vector<model_ptr>& models) {
    std::vector<semimeasure_mixture::component> comps;
    for (std::size_t i = 0; i < models.size(); ++i)
      comps.push_back({"env-" + std::to_string(i), ratio(1, static_cast<long>(models.size())), models[i], 0});
    return std::make_shared<semimeasure_mixture>(std::move(comps));
  };
  if (kind == "heavenhell") {
    auto i = static_cast<std::uint32_t>(std::stoul(parts[1]));
    env.truth = domains::make_heavenhell(i);
    env.mixture = uniform_class({domains::make_heavenhell(0), domains::make_heavenhell(1)});
  } else if (kind == "onlyone") {
    auto n = std::stoul(parts[1]);
    auto y = static_cast<std::uint32_t>(std::stoul(parts[2]));
    env.truth = domains::make_onlyone(n, {y});
    std::vector<model_ptr> all;
    for (std::uint32_t i = 0; i < n; ++i) all.push_back(domains::make_onlyone(n, {i}));
    env.mixture = uniform_class(all);
  } else if (kind == "lazy") {
    env.truth = domains::make_lazy(std::max<std::size_t>(cfg.lifetime, 2));
    env.mixture = uniform_class({env.truth});
  } else if (kind == "sp") {
    std::vector<int> bits;
    for (char c : parts[1]) bits.push_back(c == '1' ? 1 : 0);
    env.truth = domains::make_sp_env(domains::deterministic_sequence(bits));
    env.mixture = eval::sp_program_class(vm::enumerate_programs(cfg.l_max), cfg.lifetime, budget);
  } else if (kind == "sg") {
    std::ifstream in(cfg.base_dir / parts[1]);
    env.truth = domains::make_sg_env(domains::parse_game_spec(in));
    env.mixture = uniform_class({env.truth});
  } else if (kind == "fm") {
    std::ifstream in(cfg.base_dir / parts[1]);
    auto c = domains::parse_function_class(in);
    auto truth_index = std::stoul(parts[2]);
    if (truth_index >= c.functions.size()) throw validation_error({"fm truth index beyond the function class"});
    env.truth = domains::make_fm_truth(c, truth_index);
    env.informed = domains::make_fm_env(c);
    std::vector<semimeasure_mixture::component> comps;
    for (std::size_t i = 0; i < c.functions.size(); ++i)
      comps.push_back({"f" + std::to_string(i), c.prior[i], domains::make_fm_truth(c, i), 0});
    env.mixture = std::make_shared<semimeasure_mixture>(std::move(comps));
  } else if (kind == "tabular") {
    std::ifstream in(cfg.base_dir / parts[1]);
    env.truth = parse_tabular_model(in);
    env.mixture = uniform_class({env.truth});
  } else if (kind == "program") {
    auto q = *vm::decode_hex(parts[1]);
    env.truth = std::make_shared<program_model>(q, cfg.symbols, budget);
    env.mixture = build_mixture(vm::enumerate_programs(cfg.l_max), cfg.symbols, budget);
  } else {
    throw validation_error({"unknown environment kind '" + kind + "'"});
  }
  if (!env.informed) env.informed = env.truth;
  env.symbols = env.truth->symbols();
  return env;
}

struct trace_row {
  std::size_t cycle = 0;
  std::uint32_t action = 0;
  std::uint32_t observation = 0;
  rational reward = 0;
  std::optional<rational> value;
  std::string posterior_top;
};

struct run_artifacts {
  scenario_config config;
  std::vector<trace_row> trace;
  std::vector<eval::bound_report> bounds;
  std::optional<eval::disagreement_report> disagreement;
  std::string selection_log;
};

inline run_artifacts run_scenario(const scenario_config& cfg) {
  auto env = build_environment(cfg);
  run_artifacts out;
  out.config = cfg;
  vm::run_budget budget{cfg.t_max};
  std::vector<std::optional<rational>> values;
  history trace;

  if (cfg.agent == "aixitl") {
    tl::validation_context ctx{vm::enumerate_programs(cfg.l_max), env.symbols, budget, cfg.horizon, cfg.lifetime};
    auto pool = tl::program_candidates(cfg.l_max, env.symbols, budget, env.symbols.r_max);
    auto run = tl::run_aixitl(pool, *env.truth, ctx, cfg.seed);
    trace = run.trace;
    for (const auto& e : run.log)
      if (e.selected) values.emplace_back(e.valid ? e.claimed : rational(0));
    out.selection_log = tl::log_csv(run.log);
  } else {
    policy_oracle agent;
    std::shared_ptr<expectimax_agent> planner_agent;
    if (cfg.agent == "aimu") planner_agent = std::make_shared<expectimax_agent>(*env.informed, cfg.horizon, cfg.lifetime);
    else if (cfg.agent == "greedy") planner_agent = std::make_shared<expectimax_agent>(*env.informed, moving_horizon{1}, cfg.lifetime);
    else if (cfg.agent == "aixi") planner_agent = std::make_shared<expectimax_agent>(*env.mixture, cfg.horizon, cfg.lifetime);
    if (planner_agent) {
      agent = [planner_agent, &values](const history& h) {
        values.emplace_back(planner_agent->value(h));
        return (*planner_agent)(h);
      };
    } else {
      auto p = program_policy(*vm::decode_hex(cfg.program), env.symbols, budget);
      agent = [p, &values](const history& h) {
        values.emplace_back(std::nullopt);
        return p(h);
      };
    }
    trace = run_interaction(agent, *env.truth, cfg.lifetime, cfg.seed);
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace_row row;
    row.cycle = i + 1;
    row.action = trace[i].action.index;
    row.observation = trace[i].perceived.observation;
    row.reward = trace[i].perceived.reward;
    row.value = i < values.size() ? values[i] : std::nullopt;
    if (cfg.agent == "aixi") {
      auto post = env.mixture->masses(trace.prefix(i + 1));
      if (post.total > 0) row.posterior_top = env.mixture->component_name(post.top());
    }
    out.trace.push_back(std::move(row));
  }

  if (cfg.agent == "aixi" && env.informed == env.truth)
    out.disagreement = eval::disagreement_rate(*env.truth, *env.mixture, cfg.horizon, cfg.lifetime, cfg.seed);

  auto parts = detail::split(cfg.environment, ':');
  if (cfg.bounds && parts[0] == "program") {
    auto xi = build_mixture(vm::enumerate_programs(cfg.l_max), env.symbols, budget);
    auto q = *vm::decode_hex(parts[1]);
    action_rule pi = [](const history&) { return action_symbol{0}; };
    auto loss = eval::error_loss(env.symbols, env.symbols.percept_count());
    try {
      out.bounds.push_back(eval::check_convergence_bound(*xi, q, pi, cfg.lifetime));
      out.bounds.push_back(eval::check_loss_bound(*xi, q, loss, pi, cfg.lifetime));
    } catch (const structural_error&) {
      out.bounds.push_back({"pool-membership", 0, 0, false, "environment program is not in the pool at l_max"});
    }
  }
  return out;
}

inline std::string trace_csv(const run_artifacts& a) {
  std::ostringstream out;
  out << "cycle,action,observation,reward,planner_value,posterior_top\n";
  for (const auto& r : a.trace)
    out << r.cycle << ',' << r.action << ',' << r.observation << ',' << format_rational(r.reward) << ','
        << (r.value ? format_rational(*r.value) : std::string()) << ',' << r.posterior_top << '\n';
  return out.str();
}

inline std::string manifest_text(const run_artifacts& a) {
  std::ostringstream out;
  auto canonical = canonical_config(a.config);
  out << "version = " << version << '\n';
  out << "config_hash = " << detail::hex64(detail::fnv1a(canonical)) << '\n';
  out << "seed = " << a.config.seed << '\n';
  for (const auto& f : referenced_files(a.config))
    out << "file " << f.filename().string() << " = " << detail::hex64(detail::fnv1a(detail::read_file(f))) << '\n';
  out << "[config]\n" << canonical;
  return out.str();
}

struct report {
  std::string summary;
  std::string results;
};

/// Totals, bound verdicts and disagreement as a summary and a key = value results file.
inline report emit_report(const run_artifacts& a) {
  if (a.trace.empty()) throw structural_error("cannot report an empty trace");
  rational total = 0;
  for (const auto& r : a.trace) total += r.reward;
  rational mean = total / rational(static_cast<long>(a.trace.size()));
  std::ostringstream res;
  res << "scenario = " << a.config.name << '\n';
  res << "agent = " << a.config.agent << '\n';
  res << "environment = " << a.config.environment << '\n';
  res << "cycles = " << a.trace.size() << '\n';
  res << "total_reward = " << format_rational(total) << '\n';
  res << "mean_reward = " << format_rational(mean) << '\n';
  if (a.disagreement) {
    res << "disagreement_rate = " << format_rational(a.disagreement->rate) << '\n';
    res << "disagreement_value_gap = " << format_rational(a.disagreement->value_gap) << '\n';
  }
  for (std::size_t i = 0; i < a.bounds.size(); ++i) {
    const auto& b = a.bounds[i];
    res << "bound." << b.name << ".lhs = " << format_rational(b.lhs) << '\n';
    res << "bound." << b.name << ".rhs = " << format_rational(b.rhs) << '\n';
    res << "bound." << b.name << ".holds = " << (b.holds ? "true" : "false") << '\n';
  }
  std::ostringstream sum;
  sum << "scenario " << a.config.name << " (" << a.config.agent << " vs " << a.config.environment << ")\n";
  sum << "  cycles        " << a.trace.size() << '\n';
  sum << "  total reward  " << short_rational(total) << '\n';
  sum << "  mean reward   " << short_rational(mean) << '\n';
  if (a.disagreement) sum << "  disagreement  " << short_rational(a.disagreement->rate) << '\n';
  if (!a.bounds.empty()) sum << eval::bound_summary(a.bounds);
  return {sum.str(), res.str()};
}

[[nodiscard]] inline bool all_bounds_hold(const run_artifacts& a) {
  return std::all_of(a.bounds.begin(), a.bounds.end(), [](const auto& b) { return b.holds; });
}

/// Writes trace.csv, manifest.txt, results.txt, summary.txt (and selection.csv for aixitl).
inline void write_artifacts(const run_artifacts& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&dir](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
  };
  auto rep = emit_report(a);
  put("trace.csv", trace_csv(a));
  put("manifest.txt", manifest_text(a));
  put("results.txt", rep.results);
  put("summary.txt", rep.summary);
  if (!a.selection_log.empty()) put("selection.csv", a.selection_log);
  if (!a.bounds.empty()) put("bounds.csv", eval::bound_csv(a.bounds));
}

struct check_result {
  std::string name;
  bool passed = false;
};

/// Quick re-check of the core invariants: code-set properties, chronological models,
/// and the agreement of functional and iterative policy values.
inline std::vector<check_result> run_verification(std::size_t l_max = 10) {
  std::vector<check_result> out;
  auto pool = vm::enumerate_programs(l_max);
  rational kraft = 0;
  for (const auto& q : pool) kraft += dyadic_weight(q.length_bits());
  out.push_back({"kraft sum <= 1 at l=" + std::to_string(l_max), kraft <= 1});
  bool prefix_free = true;
  for (std::size_t i = 0; i + 1 < pool.size(); ++i)
    if (pool[i + 1].bits().compare(0, pool[i].bits().size(), pool[i].bits()) == 0) prefix_free = false;
  out.push_back({"program codes prefix-free and sorted", prefix_free && std::is_sorted(pool.begin(), pool.end())});

  alphabet binary = domains::binary_reward_alphabet(2);
  std::vector<std::pair<std::string, model_ptr>> models{
      {"heavenhell", domains::make_heavenhell(0)},
      {"onlyone", domains::make_onlyone(3, {2})},
      {"lazy", domains::make_lazy(6)},
      {"fm", domains::make_fm_env(domains::uniform_function_class(2, {1, 2, 3, 4}))},
      {"program mixture", build_mixture(vm::enumerate_programs(8), binary, vm::run_budget{16})},
  };
  for (const auto& [name, m] : models) out.push_back({"chronological: " + name, check_chronological(*m, 3)});

  auto small = vm::enumerate_programs(6);
  auto xi = build_mixture(small, binary, vm::run_budget{16});
  bool agree = true;
  for (const auto& p : small) {
    auto policy = program_policy(p, binary, vm::run_budget{16});
    for (std::size_t d = 0; d < 2 && agree; ++d)
      for (const auto& h : all_histories(binary, d)) {
        if (xi->joint(h) == 0) continue;
        auto forced = make_consistent(policy, h);
        agree = agree && policy_value_functional(policy, small, h, 3, binary, vm::run_budget{16}) ==
                             policy_value_iterative(forced, *xi, h, 3);
      }
  }
  out.push_back({"functional value = iterative value (l=6, m=3)", agree});
  return out;
}

}  // namespace aixi::cli
