#pragma once

// Measurement harness: expected losses, bound checks, Pareto and intelligence-order
// verdicts, and disagreement between the informed and the mixture agent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aixi/aixitl.hpp"
#include "aixi/core.hpp"
#include "aixi/domains.hpp"
#include "aixi/model.hpp"
#include "aixi/planner.hpp"
#include "aixi/vm.hpp"

namespace aixi::eval {

/// l(x, y) in [0, 1], indexed [percept index][action index].
class loss_matrix {
 public:
  loss_matrix(std::size_t percepts, std::size_t actions) : actions_(actions), entries_(percepts * actions, rational(0)) {}

  [[nodiscard]] const rational& at(std::size_t x, std::size_t y) const { return entries_.at(x * actions_ + y); }

  void set(std::size_t x, std::size_t y, rational v) {
    if (v < 0 || v > 1) throw structural_error("loss outside [0, 1]");
    entries_.at(x * actions_ + y) = std::move(v);
  }

  [[nodiscard]] std::size_t actions() const noexcept { return actions_; }
  [[nodiscard]] std::size_t percepts() const noexcept { return entries_.size() / actions_; }

 private:
  std::size_t actions_;
  std::vector<rational> entries_;
};

/// 1 when the prediction differs from the percept index, 0 otherwise.
inline loss_matrix error_loss(const alphabet& a, std::size_t predictions) {
  loss_matrix l(a.percept_count(), predictions);
  for (std::size_t x = 0; x < a.percept_count(); ++x)
    for (std::size_t y = 0; y < predictions; ++y) l.set(x, y, x == y ? rational(0) : rational(1));
  return l;
}

/// Binary sequence alphabet: two observations, the single reward 0, and spectator actions.
inline alphabet sequence_alphabet(std::size_t actions = 1) {
  alphabet a;
  a.actions = actions;
  a.observations = 2;
  a.rewards = {rational(0)};
  return a;
}

/// A prediction scheme maps the history so far to a prediction index.
using predictor = std::function<std::size_t(const history&)>;

/// The loss-minimizing prediction under rho's next-percept conditional; smallest on ties.
inline predictor lambda_scheme(const chronological_model& rho, const action_rule& pi, const loss_matrix& loss) {
  return [&rho, pi, &loss](const history& h) -> std::size_t {
    auto row = rho.conditional(h, pi(h));
    std::size_t best = 0;
    rational best_loss;
    for (std::size_t y = 0; y < loss.actions(); ++y) {
      rational l = 0;
      for (std::size_t x = 0; x < row.size(); ++x) l += row[x] * loss.at(x, y);
      if (y == 0 || l < best_loss) {
        best = y;
        best_loss = l;
      }
    }
    return best;
  };
}

/// sum_{t<=n} sum_{x_<t} mu(x_<t) sum_x mu(x | x_<t) l(x, scheme(x_<t)); actions from pi.
inline rational expected_loss(const predictor& scheme, const chronological_model& mu, const loss_matrix& loss,
                              const action_rule& pi, std::size_t n) {
  rational total = 0;
  std::function<void(history&, const rational&)> walk = [&](history& h, const rational& weight) {
    if (h.size() >= n) return;
    auto y = pi(h);
    auto row = mu.conditional(h, y);
    auto guess = scheme(h);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] == 0) continue;
      total += weight * row[x] * loss.at(x, guess);
      h.push(y, mu.symbols().percept_at(x));
      walk(h, weight * row[x]);
      h.pop();
    }
  };
  history h;
  walk(h, rational(1));
  return total;
}

struct bound_report {
  std::string name;
  rational lhs = 0;
  rational rhs = 0;
  bool holds = false;
  std::string context;
};

inline std::string bound_csv(const std::vector<bound_report>& reports) {
  std::ostringstream out;
  out << "name,lhs,rhs,holds,context\n";
  for (const auto& r : reports)
    out << r.name << ',' << format_rational(r.lhs) << ',' << format_rational(r.rhs) << ',' << (r.holds ? 1 : 0)
        << ",\"" << r.context << "\"\n";
  return out.str();
}

inline std::string bound_summary(const std::vector<bound_report>& reports) {
  std::ostringstream out;
  for (const auto& r : reports)
    out << (r.holds ? "holds " : "FAILS ") << r.name << ": " << to_double(r.lhs) << " <= " << to_double(r.rhs) << "  ["
        << r.context << "]\n";
  return out.str();
}

inline std::size_t component_index(const program_mixture& xi, const vm::program& mu) {
  const auto& pool = xi.pool();
  auto it = std::find(pool.begin(), pool.end(), mu);
  if (it == pool.end()) throw structural_error("environment is not a member of the pool");
  return static_cast<std::size_t>(it - pool.begin());
}

/// Cumulative squared prediction gap of xi against the pool member mu, compared with
/// (ln 2 / 2) * l(mu). The right side uses a rational lower bound for ln 2.
inline bound_report check_convergence_bound(const program_mixture& xi, const vm::program& mu, const action_rule& pi,
                                            std::size_t n) {
  component_index(xi, mu);
  program_model truth(mu, xi.symbols(), xi.budget());
  bound_report r;
  r.name = "convergence";
  r.lhs = sq_distance_sum(xi, truth, pi, n);
  r.rhs = ln2_lower() / 2 * rational(static_cast<long>(mu.length_bits()));
  r.holds = r.lhs <= r.rhs;
  r.context = "mu=" + mu.hex() + " l(mu)=" + std::to_string(mu.length_bits()) + " bits (code length for K) n=" +
              std::to_string(n);
  return r;
}

/// 0 <= L(xi) - L(mu) <= 2 ln2 l + 2 sqrt(L(mu) ln2 l), l the code length of mu. The right
/// side is assembled from rational lower bounds for ln 2 and the square root.
inline bound_report check_loss_bound(const program_mixture& xi, const vm::program& mu, const loss_matrix& loss,
                                     const action_rule& pi, std::size_t n) {
  component_index(xi, mu);
  program_model truth(mu, xi.symbols(), xi.budget());
  auto l_mu = expected_loss(lambda_scheme(truth, pi, loss), truth, loss, pi, n);
  auto l_xi = expected_loss(lambda_scheme(xi, pi, loss), truth, loss, pi, n);
  rational bits(static_cast<long>(mu.length_bits()));
  bound_report r;
  r.name = "loss";
  r.lhs = l_xi - l_mu;
  r.rhs = 2 * ln2_lower() * bits + 2 * sqrt_lower(l_mu * ln2_lower() * bits);
  r.holds = r.lhs >= 0 && r.lhs <= r.rhs;
  r.context = "mu=" + mu.hex() + " l(mu)=" + std::to_string(mu.length_bits()) + " bits (code length for K) n=" +
              std::to_string(n) + " L(mu)=" + short_rational(l_mu);
  return r;
}

/// Bit sequence produced by q under constant action input 0 (observation mod 2).
inline std::vector<int> program_bits(const vm::program& q, std::size_t n, vm::run_budget budget) {
  auto a = sequence_alphabet();
  std::vector<int> bits;
  for (const auto& x : vm::env_sequence(q, n, a, budget)) bits.push_back(static_cast<int>(x.observation % 2));
  return bits;
}

/// Mixture over sequence-prediction environments, one per pool program, weighted 2^-l.
inline std::shared_ptr<semimeasure_mixture> sp_program_class(const std::vector<vm::program>& pool, std::size_t n,
                                                             vm::run_budget budget) {
  std::vector<semimeasure_mixture::component> parts;
  for (const auto& q : pool)
    parts.push_back({q.hex(), dyadic_weight(q.length_bits()), domains::make_sp_env(domains::deterministic_sequence(program_bits(q, n, budget))),
                     q.length_bits()});
  return std::make_shared<semimeasure_mixture>(std::move(parts));
}

/// Errors of the mixture sequence predictor (one-step horizon) on the sequence of a pool
/// program, against the number of pool programs consistent with the empty history.
inline bound_report check_sp_error_bound(const vm::program& truth, const std::vector<vm::program>& pool,
                                         std::size_t n, vm::run_budget budget) {
  if (std::find(pool.begin(), pool.end(), truth) == pool.end())
    throw structural_error("sequence program is not a member of the pool");
  auto xi = sp_program_class(pool, n, budget);
  auto env = domains::make_sp_env(domains::deterministic_sequence(program_bits(truth, n, budget)));
  auto agent = std::make_shared<expectimax_agent>(*xi, moving_horizon{1}, n);
  auto h = run_interaction(as_oracle(agent), *env, n, 0);
  std::size_t errors = 0;
  for (const auto& c : h.cycles()) errors += c.perceived.reward == 0 ? 1 : 0;
  bound_report r;
  r.name = "sp-errors";
  r.lhs = static_cast<long>(errors);
  r.rhs = static_cast<long>(pool.size());
  r.holds = r.lhs <= r.rhs;
  r.context = "truth=" + truth.hex() + " n=" + std::to_string(n) + " pool=" + std::to_string(pool.size());
  return r;
}

// ---------------------------------------------------------------------------
// Pareto optimality over a finite class of environments.

struct pareto_caps {
  std::size_t max_symbols = 3;
  std::size_t max_lifetime = 3;
  std::size_t max_class = 6;
  std::size_t max_enumerated = std::size_t{1} << 16U;
};

using value_vector = std::vector<rational>;

/// v >= u everywhere and v != u.
inline bool dominates(const value_vector& v, const value_vector& u) {
  bool strict = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < u[i]) return false;
    if (v[i] > u[i]) strict = true;
  }
  return strict;
}

/// Value vector of p across the class from the empty history.
inline value_vector class_values(const policy_oracle& p, const std::vector<model_ptr>& env_class, std::size_t lifetime) {
  value_vector v;
  for (const auto& mu : env_class) v.push_back(policy_value_iterative(p, *mu, history{}, lifetime));
  return v;
}

namespace detail {

inline void keep_undominated(std::vector<value_vector>& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  std::vector<value_vector> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < set.size() && !dominated; ++j) dominated = j != i && dominates(set[j], set[i]);
    if (!dominated) out.push_back(set[i]);
  }
  set = std::move(out);
}

/// Undominated achievable vectors of mu_i(h) * E_i[future reward | h] over all continuations.
inline std::vector<value_vector> frontier(const std::vector<model_ptr>& env_class, history& h,
                                          const value_vector& reach, std::size_t lifetime) {
  const std::size_t n = env_class.size();
  if (h.size() >= lifetime) return {value_vector(n, rational(0))};
  const auto& a = env_class.front()->symbols();
  std::vector<value_vector> result;
  for (std::uint32_t y = 0; y < a.actions; ++y) {
    std::vector<distribution> rows;
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(reach[i] == 0 ? distribution(a.percept_count(), rational(0)) : env_class[i]->conditional(h, {y}));
    std::vector<value_vector> sums{value_vector(n, rational(0))};
    for (std::size_t x = 0; x < a.percept_count(); ++x) {
      value_vector child_reach(n);
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        child_reach[i] = reach[i] * rows[i][x];
        any = any || child_reach[i] != 0;
      }
      if (!any) continue;
      auto perceived = a.percept_at(x);
      h.push({y}, perceived);
      auto child = frontier(env_class, h, child_reach, lifetime);
      h.pop();
      std::vector<value_vector> next;
      for (const auto& s : sums)
        for (const auto& c : child) {
          value_vector v(n);
          for (std::size_t i = 0; i < n; ++i) v[i] = s[i] + c[i] + child_reach[i] * perceived.reward;
          next.push_back(std::move(v));
        }
      keep_undominated(next);
      sums = std::move(next);
    }
    result.insert(result.end(), sums.begin(), sums.end());
  }
  keep_undominated(result);
  return result;
}

/// Nodes of the policy tree: percept sequences of length < lifetime, in breadth-first order.
inline std::vector<std::vector<std::size_t>> policy_nodes(std::size_t percepts, std::size_t lifetime) {
  std::vector<std::vector<std::size_t>> nodes{{}};
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].size() + 1 < lifetime)
      for (std::size_t x = 0; x < percepts; ++x) {
        auto child = nodes[i];
        child.push_back(x);
        nodes.push_back(std::move(child));
      }
  return nodes;
}

}  // namespace detail

/// Number of behaviourally distinct deterministic policies over `lifetime` cycles.
inline double policy_count(std::size_t actions, std::size_t percepts, std::size_t lifetime) {
  double nodes = 0;
  double level = 1;
  for (std::size_t t = 0; t < lifetime; ++t) {
    nodes += level;
    level *= static_cast<double>(percepts);
  }
  return std::pow(static_cast<double>(actions), nodes);
}

inline void check_pareto_caps(const std::vector<model_ptr>& env_class, std::size_t lifetime, const pareto_caps& caps) {
  if (env_class.empty()) throw structural_error("empty environment class");
  const auto& a = env_class.front()->symbols();
  if (a.actions > caps.max_symbols || a.percept_count() > caps.max_symbols || lifetime > caps.max_lifetime ||
      env_class.size() > caps.max_class)
    throw capacity_error("Pareto check beyond enumeration caps (|Y|,|X| <= " + std::to_string(caps.max_symbols) +
                         ", lifetime <= " + std::to_string(caps.max_lifetime) + ", class <= " +
                         std::to_string(caps.max_class) + ")");
}

/// Every deterministic policy tree, as value vectors; only for small policy counts.
inline std::vector<value_vector> enumerate_policy_values(const std::vector<model_ptr>& env_class, std::size_t lifetime,
                                                         std::size_t limit) {
  const auto& a = env_class.front()->symbols();
  if (policy_count(a.actions, a.percept_count(), lifetime) > static_cast<double>(limit))
    throw capacity_error("too many policies to enumerate");
  auto nodes = detail::policy_nodes(a.percept_count(), lifetime);
  std::map<std::vector<std::size_t>, std::size_t> slot;
  for (std::size_t i = 0; i < nodes.size(); ++i) slot[nodes[i]] = i;
  std::vector<std::uint32_t> choice(nodes.size(), 0);
  std::vector<value_vector> out;
  while (true) {
    policy_oracle p = [&](const history& h) {
      std::vector<std::size_t> key;
      for (const auto& c : h.cycles()) key.push_back(a.index_of(c.perceived));
      return action_symbol{choice[slot.at(key)]};
    };
    out.push_back(class_values(p, env_class, lifetime));
    std::size_t i = 0;
    while (i < choice.size() && ++choice[i] == a.actions) choice[i++] = 0;
    if (i == choice.size()) break;
  }
  return out;
}

/// True iff no policy weakly dominates p across the class with a strict gain somewhere.
inline bool pareto_check(const policy_oracle& p, const std::vector<model_ptr>& env_class, std::size_t lifetime,
                         const pareto_caps& caps = {}) {
  check_pareto_caps(env_class, lifetime, caps);
  auto mine = class_values(p, env_class, lifetime);
  const auto& a = env_class.front()->symbols();
  std::vector<value_vector> candidates;
  if (policy_count(a.actions, a.percept_count(), lifetime) <= static_cast<double>(caps.max_enumerated)) {
    candidates = enumerate_policy_values(env_class, lifetime, caps.max_enumerated);
  } else {
    history h;
    candidates = detail::frontier(env_class, h, value_vector(env_class.size(), rational(1)), lifetime);
  }
  for (const auto& v : candidates)
    if (dominates(v, mine)) return false;
  return true;
}

/// Undominated value vectors of the class, by the pruned bottom-up search.
inline std::vector<value_vector> pareto_frontier(const std::vector<model_ptr>& env_class, std::size_t lifetime) {
  history h;
  return detail::frontier(env_class, h, value_vector(env_class.size(), rational(1)), lifetime);
}

/// The mixture over a class with the given positive weights.
inline std::shared_ptr<semimeasure_mixture> class_mixture(const std::vector<model_ptr>& env_class,
                                                          const std::vector<rational>& weights) {
  std::vector<semimeasure_mixture::component> parts;
  for (std::size_t i = 0; i < env_class.size(); ++i)
    parts.push_back({"env-" + std::to_string(i), weights.at(i), env_class[i], 0});
  return std::make_shared<semimeasure_mixture>(std::move(parts));
}

// ---------------------------------------------------------------------------
// Intelligence order over a program class.

/// V^{p xi} >= V^{p2 xi} on every history of fewer than `depth` cycles where both are defined.
inline bool intel_geq(const policy_oracle& p, const policy_oracle& p2, const tl::validation_context& ctx,
                      std::size_t depth) {
  for (std::size_t d = 0; d < depth; ++d)
    for (const auto& h : all_histories(ctx.symbols, d)) {
      auto v = tl::mixture_value(p, h, ctx);
      auto v2 = tl::mixture_value(p2, h, ctx);
      if (!v || !v2) continue;
      if (*v < *v2) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Disagreement between the mixture agent and the informed agent.

struct disagreement_report {
  rational rate = 0;       // expected disagreements / n
  rational value_gap = 0;  // expected sum of the informed value lost by the mixture agent's choice, / n
};

/// Along the mixture agent's own interaction with mu: the expected fraction of cycles where
/// its action differs from the informed agent's on the same history. Exact enumeration of
/// mu's outcomes, or a single sampled trajectory when a seed is given.
inline disagreement_report disagreement_rate(const chronological_model& mu, const chronological_model& xi,
                                             const horizon_policy& horizon, std::size_t n,
                                             std::optional<std::uint64_t> seed = std::nullopt) {
  expectimax_agent informed(mu, horizon, n);
  expectimax_agent mixture(xi, horizon, n);
  rational disagreements = 0;
  rational gap = 0;
  auto visit = [&](const history& h, const rational& weight) -> action_symbol {
    auto y_xi = mixture(h);
    auto y_mu = informed(h);
    if (y_xi != y_mu) {
      disagreements += weight;
      auto m = informed.horizon_for(h.size() + 1);
      gap += weight * (informed.engine().value_given_action(h, m, y_mu) - informed.engine().value_given_action(h, m, y_xi));
    }
    return y_xi;
  };
  if (seed) {
    std::mt19937_64 rng(*seed);
    history h;
    for (std::size_t k = 1; k <= n; ++k) {
      auto y = visit(h, rational(1));
      h.push(y, mu.symbols().percept_at(sample_percept(mu.conditional(h, y), rng)));
    }
  } else {
    std::function<void(history&, const rational&)> walk = [&](history& h, const rational& weight) {
      if (h.size() >= n) return;
      auto y = visit(h, weight);
      auto row = mu.conditional(h, y);
      for (std::size_t x = 0; x < row.size(); ++x) {
        if (row[x] == 0) continue;
        h.push(y, mu.symbols().percept_at(x));
        walk(h, weight * row[x]);
        h.pop();
      }
    };
    history h;
    walk(h, rational(1));
  }
  rational count(static_cast<long>(n));
  return {disagreements / count, gap / count};
}

}  // namespace aixi::eval
