#pragma once

// Exact expectimax over interaction histories.
//
//   V(h, m) = max_y sum_x rho(x | h, y) [ r(x) + V(h y x, m) ],   V = 0 once |h| = m.
//
// Ties between actions go to the smallest action index. Zero-probability percepts
// are skipped before recursing.

#include <functional>
#include <random>
#include <unordered_map>

#include "aixi/core.hpp"
#include "aixi/model.hpp"
#include "aixi/vm.hpp"

namespace aixi {

using policy_oracle = std::function<action_symbol(const history&)>;

/// One planning call's memo table lives here; reuse a planner across calls on the same model.
class planner {
 public:
  explicit planner(const chronological_model& model, horizon_policy horizon = fixed_horizon{1})
      : model_(model), horizon_(std::move(horizon)) {}

  [[nodiscard]] const chronological_model& model() const noexcept { return model_; }
  [[nodiscard]] const horizon_policy& horizon() const noexcept { return horizon_; }

  /// Expected (discounted) reward sum over cycles |h|+1 .. m after taking y.
  rational value_given_action(const history& h, std::size_t m, action_symbol y) {
    check(h, m);
    return q_value(h, m, y);
  }

  /// Optimal value V_{k m} with k = |h| + 1; 0 when k > m.
  rational value_opt(const history& h, std::size_t m) {
    check(h, m);
    return v_value(h, m);
  }

  /// Smallest action index attaining value_opt.
  action_symbol best_action(const history& h, std::size_t m) {
    check(h, m);
    if (h.size() + 1 > m) throw std::out_of_range("best_action needs k <= m");
    action_symbol best{0};
    rational best_value;
    for (std::uint32_t y = 0; y < model_.symbols().actions; ++y) {
      auto v = q_value(h, m, {y});
      if (y == 0 || v > best_value) {
        best = {y};
        best_value = v;
      }
    }
    return best;
  }

  /// value_given_action for every action, in action order.
  std::vector<rational> action_values(const history& h, std::size_t m) {
    check(h, m);
    std::vector<rational> out;
    for (std::uint32_t y = 0; y < model_.symbols().actions; ++y) out.push_back(q_value(h, m, {y}));
    return out;
  }

  void clear() { memo_.clear(); }

 private:
  void check(const history& h, std::size_t) const {
    if (h.pending_action()) throw structural_error("planning needs a complete history");
  }

  rational q_value(const history& h, std::size_t m, action_symbol y) {
    const std::size_t k = h.size() + 1;
    if (k > m) return 0;
    const auto& a = model_.symbols();
    auto row = model_.conditional(h, y);
    rational total = 0;
    history next = h;
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] == 0) continue;
      auto perceived = a.percept_at(x);
      next.push(y, perceived);
      total += row[x] * (discounted_reward(horizon_, k, perceived.reward) + v_value(next, m));
      next.pop();
    }
    return total;
  }

  rational v_value(const history& h, std::size_t m) {
    if (h.size() + 1 > m) return 0;
    auto key = history_key(model_.symbols(), h);
    key.append(reinterpret_cast<const char*>(&m), sizeof m);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    rational best;
    for (std::uint32_t y = 0; y < model_.symbols().actions; ++y) {
      auto v = q_value(h, m, {y});
      if (y == 0 || v > best) best = v;
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

  const chronological_model& model_;
  horizon_policy horizon_;
  std::unordered_map<std::string, rational> memo_;
};

inline rational value_opt(const chronological_model& rho, const history& h, std::size_t m,
                          const horizon_policy& horizon = fixed_horizon{1}) {
  return planner(rho, horizon).value_opt(h, m);
}

inline rational value_given_action(const chronological_model& rho, const history& h, std::size_t m, action_symbol y,
                                   const horizon_policy& horizon = fixed_horizon{1}) {
  return planner(rho, horizon).value_given_action(h, m, y);
}

inline action_symbol best_action(const chronological_model& rho, const history& h, std::size_t m,
                                 const horizon_policy& horizon = fixed_horizon{1}) {
  return planner(rho, horizon).best_action(h, m);
}

/// min(m_k, n_{r+1}) for the episode r with n_r < k <= n_{r+1}.
inline std::size_t episode_cutoff(const std::vector<std::size_t>& boundaries, std::size_t k, std::size_t m) {
  if (boundaries.empty() || boundaries.front() != 0) throw structural_error("episode boundaries must start at 0");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) throw structural_error("episode boundaries must increase");
    if (k <= boundaries[i]) return std::min(m, boundaries[i]);
  }
  throw std::out_of_range("cycle beyond the last episode boundary");
}

/// Evenly spaced boundaries 0, n, 2n, ..., up to lifetime.
inline std::vector<std::size_t> episode_boundaries(std::size_t episode_length, std::size_t lifetime) {
  std::vector<std::size_t> out{0};
  for (std::size_t b = episode_length; b < lifetime + episode_length; b += episode_length) out.push_back(b);
  return out;
}

/// The AI-rho agent: at cycle k it maximizes up to horizon_end(horizon, k, lifetime),
/// optionally cut at the end of the current episode.
class expectimax_agent {
 public:
  expectimax_agent(const chronological_model& rho, horizon_policy horizon, std::size_t lifetime,
                   std::vector<std::size_t> episodes = {})
      : planner_(rho, horizon), horizon_(std::move(horizon)), lifetime_(lifetime), episodes_(std::move(episodes)) {}

  [[nodiscard]] std::size_t horizon_for(std::size_t k) const {
    auto m = horizon_end(horizon_, k, lifetime_);
    return episodes_.empty() ? m : episode_cutoff(episodes_, k, m);
  }

  action_symbol operator()(const history& h) { return planner_.best_action(h, horizon_for(h.size() + 1)); }

  rational value(const history& h) { return planner_.value_opt(h, horizon_for(h.size() + 1)); }

  planner& engine() noexcept { return planner_; }

 private:
  planner planner_;
  horizon_policy horizon_;
  std::size_t lifetime_;
  std::vector<std::size_t> episodes_;
};

inline policy_oracle as_oracle(const std::shared_ptr<expectimax_agent>& agent) {
  return [agent](const history& h) { return (*agent)(h); };
}

/// Draws a percept index from a (sub)distribution, normalized by its total mass.
/// The uniform draw is the exact rational u = b / 2^64 for one 64-bit word b.
inline std::size_t sample_percept(const distribution& d, std::mt19937_64& rng) {
  rational total = row_sum(d);
  if (total == 0) throw undefined_conditional("sampling from a zero-mass distribution");
  mpz_class word(std::to_string(rng()));
  mpz_class scale = 1;
  scale <<= 64;
  rational threshold = ratio(word, scale) * total;
  rational cumulative = 0;
  std::size_t last_positive = 0;
  for (std::size_t x = 0; x < d.size(); ++x) {
    if (d[x] == 0) continue;
    last_positive = x;
    cumulative += d[x];
    if (threshold < cumulative) return x;
  }
  return last_positive;
}

/// Observer invoked after each completed cycle.
using cycle_observer = std::function<void(const history&)>;

/// Agent-environment loop for `lifetime` cycles; stochastic percepts come from a seeded generator.
inline history run_interaction(const policy_oracle& agent, const chronological_model& env, std::size_t lifetime,
                               std::uint64_t seed, const cycle_observer& observe = {}) {
  std::mt19937_64 rng(seed);
  history h;
  for (std::size_t k = 1; k <= lifetime; ++k) {
    auto y = agent(h);
    if (!env.symbols().contains(y)) throw structural_error("agent emitted an action outside the alphabet");
    auto row = env.conditional(h, y);
    auto x = sample_percept(row, rng);
    h.push(y, env.symbols().percept_at(x));
    if (observe) observe(h);
  }
  return h;
}

/// Same loop against an environment program, run incrementally.
inline history run_interaction(const policy_oracle& agent, const vm::program& env, const alphabet& a,
                               vm::run_budget budget, std::size_t lifetime, const cycle_observer& observe = {}) {
  vm::machine_state state;
  history h;
  for (std::size_t k = 1; k <= lifetime; ++k) {
    auto y = agent(h);
    h.push(y, vm::env_cycle(env, state, y, a, budget).perceived);
    if (observe) observe(h);
  }
  return h;
}

inline rational total_reward(const history& h) {
  rational s = 0;
  for (const auto& c : h.cycles()) s += c.perceived.reward;
  return s;
}

/// True iff p produced every action recorded in h.
inline bool policy_consistent(const policy_oracle& p, const history& h) {
  for (std::size_t i = 0; i < h.size(); ++i)
    if (p(h.prefix(i)) != h[i].action) return false;
  return true;
}

/// p with its past actions forced to those recorded in h; unchanged on extensions of h.
inline policy_oracle make_consistent(policy_oracle p, history h) {
  return [p = std::move(p), h = std::move(h)](const history& now) {
    if (now.size() < h.size()) return h[now.size()].action;
    return p(now);
  };
}

/// Expected reward sum over cycles |h|+1..m when p acts in rho; p must be consistent with h.
inline rational policy_value_iterative(const policy_oracle& p, const chronological_model& rho, const history& h,
                                       std::size_t m, const horizon_policy& horizon = fixed_horizon{1}) {
  if (h.pending_action()) throw structural_error("policy value needs a complete history");
  if (!policy_consistent(p, h)) throw structural_error("policy is inconsistent with the history");
  const auto& a = rho.symbols();
  std::function<rational(history&)> value = [&](history& now) -> rational {
    const std::size_t k = now.size() + 1;
    if (k > m) return 0;
    auto y = p(now);
    auto row = rho.conditional(now, y);
    rational total = 0;
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] == 0) continue;
      auto perceived = a.percept_at(x);
      now.push(y, perceived);
      total += row[x] * (discounted_reward(horizon, k, perceived.reward) + value(now));
      now.pop();
    }
    return total;
  };
  history now = h;
  return value(now);
}

/// Reward sum of the deterministic rollout of p against q from q's state after h.
inline rational rollout_value(const policy_oracle& p, const vm::program& q, vm::machine_state state, history h,
                              std::size_t m, const alphabet& a, vm::run_budget budget,
                              const horizon_policy& horizon = fixed_horizon{1}) {
  rational total = 0;
  for (std::size_t k = h.size() + 1; k <= m; ++k) {
    auto y = p(h);
    auto x = vm::env_cycle(q, state, y, a, budget).perceived;
    total += discounted_reward(horizon, k, x.reward);
    h.push(y, x);
  }
  return total;
}

/// Functional value: weighted average of V^{p~q} over the environments consistent
/// with h, each weighted 2^-l(q), where p~ is p with its past forced to h.
inline rational policy_value_functional(const policy_oracle& p, const std::vector<vm::program>& pool,
                                        const history& h, std::size_t m, const alphabet& a, vm::run_budget budget,
                                        const horizon_policy& horizon = fixed_horizon{1}) {
  if (h.pending_action()) throw structural_error("policy value needs a complete history");
  auto forced = make_consistent(p, h);
  rational weighted = 0;
  rational mass = 0;
  for (const auto& q : pool) {
    auto state = vm::replay_env(q, h, a, budget);
    if (!state) continue;
    auto w = dyadic_weight(q.length_bits());
    mass += w;
    weighted += w * rollout_value(forced, q, std::move(*state), h, m, a, budget, horizon);
  }
  if (mass == 0) throw undefined_conditional("no environment in the pool is consistent with the history");
  return weighted / mass;
}

/// A policy program as an oracle: replays it over the history's percepts.
inline policy_oracle program_policy(vm::program p, alphabet a, vm::run_budget budget) {
  return [p = std::move(p), a = std::move(a), budget](const history& h) {
    return vm::policy_action_after(p, h, a, budget).action;
  };
}

}  // namespace aixi
