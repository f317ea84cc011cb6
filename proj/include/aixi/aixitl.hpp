#pragma once

// Time- and length-bounded best-vote agent.
//
// Each candidate emits a claim (w_k, y_k) per cycle: a self-rating w_k of its own
// mixture value and an action. A claim counts only if w_k <= V^{p xi}, checked exactly
// every cycle; invalid claims count as 0. The cycle's action comes from the candidate
// with the highest counted claim, ties going to the smallest order key.

#include <memory>
#include <random>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aixi/core.hpp"
#include "aixi/model.hpp"
#include "aixi/planner.hpp"
#include "aixi/vm.hpp"

namespace aixi::tl {

struct claim {
  rational w = 0;
  action_symbol y{0};
  std::size_t steps_used = 0;
  bool timed_out = false;
};

/// A policy that also rates itself. Runs incrementally: step() is called once per
/// cycle with the history so far.
class extended_candidate {
 public:
  virtual ~extended_candidate() = default;

  /// Human-readable identifier for logs.
  [[nodiscard]] virtual std::string id() const = 0;
  /// Tie-break key; smaller wins.
  [[nodiscard]] virtual std::string order_key() const = 0;
  virtual void reset() = 0;
  virtual claim step(const history& h) = 0;
  /// The action part as a policy over histories.
  [[nodiscard]] virtual policy_oracle policy() const = 0;

  /// From-scratch claim for cycle |h| + 1.
  claim claim_at(const history& h) {
    reset();
    claim c;
    for (std::size_t i = 0; i <= h.size(); ++i) c = step(h.prefix(i));
    return c;
  }
};

using candidate_ptr = std::shared_ptr<extended_candidate>;

/// A machine program read as an extended policy: y = r0 mod |Y|, w = r1 * claim_unit.
/// Inputs are those of a policy program (previous observation, previous reward sign).
class program_candidate final : public extended_candidate {
 public:
  program_candidate(vm::program p, alphabet a, vm::run_budget budget, rational claim_unit)
      : program_(std::move(p)), symbols_(std::move(a)), budget_(budget), unit_(std::move(claim_unit)) {}

  [[nodiscard]] std::string id() const override { return program_.hex() + "/" + std::to_string(program_.length_bits()); }
  [[nodiscard]] std::string order_key() const override { return "p" + program_.bits(); }
  [[nodiscard]] const vm::program& code() const noexcept { return program_; }

  void reset() override {
    state_ = vm::machine_state{};
    cycles_ = 0;
  }

  claim step(const history& h) override {
    if (h.size() != cycles_) throw structural_error("candidate stepped out of order");
    std::int64_t obs = 0;
    std::int64_t reward_sign = 0;
    if (h.size() > 0) {
      obs = h.back().perceived.observation;
      reward_sign = h.back().perceived.reward > 0 ? 1 : 0;
    }
    ++cycles_;
    auto out = vm::run_cycle(program_, state_, obs, reward_sign, budget_);
    claim c;
    c.steps_used = out.steps_used;
    if (out.timed_out) {
      c.timed_out = true;
      return c;
    }
    c.y = action_symbol{static_cast<std::uint32_t>(vm::symbol_mod(out.r0, symbols_.actions))};
    c.w = rational(out.r1 < 0 ? 0 : out.r1) * unit_;
    return c;
  }

  [[nodiscard]] policy_oracle policy() const override { return program_policy(program_, symbols_, budget_); }

 private:
  vm::program program_;
  alphabet symbols_;
  vm::run_budget budget_;
  rational unit_;
  vm::machine_state state_;
  std::size_t cycles_ = 0;
};

/// A candidate given by a policy and a claim rule over histories.
class scripted_candidate final : public extended_candidate {
 public:
  using claim_rule = std::function<rational(const history&)>;

  scripted_candidate(std::string name, policy_oracle p, claim_rule w, std::string order_key = "")
      : name_(std::move(name)), policy_(std::move(p)), rule_(std::move(w)), key_(std::move(order_key)) {}

  [[nodiscard]] std::string id() const override { return name_; }
  [[nodiscard]] std::string order_key() const override { return key_; }
  void reset() override {}
  claim step(const history& h) override { return claim{rule_(h), policy_(h), 0, false}; }
  [[nodiscard]] policy_oracle policy() const override { return policy_; }

 private:
  std::string name_;
  policy_oracle policy_;
  claim_rule rule_;
  std::string key_;
};

/// Environment class and horizon against which claims are validated.
struct validation_context {
  std::vector<vm::program> env_pool;
  alphabet symbols;
  vm::run_budget budget;
  horizon_policy horizon = fixed_horizon{1};
  std::size_t lifetime = 1;

  [[nodiscard]] std::size_t horizon_for(const history& h) const {
    return horizon_end(horizon, h.size() + 1, lifetime);
  }
};

/// V^{p xi} of the candidate's policy at h, or nullopt when no pool environment explains h.
inline std::optional<rational> mixture_value(const policy_oracle& p, const history& h, const validation_context& ctx) {
  try {
    return policy_value_functional(p, ctx.env_pool, h, ctx.horizon_for(h), ctx.symbols, ctx.budget, ctx.horizon);
  } catch (const undefined_conditional&) {
    return std::nullopt;
  }
}

/// True iff claim.w <= V^{p xi}(h); false when that value is undefined.
inline bool validate_claim(const extended_candidate& c, const claim& cl, const history& h,
                           const validation_context& ctx) {
  auto v = mixture_value(c.policy(), h, ctx);
  return v && cl.w <= *v;
}

/// One incremental cycle of a candidate.
inline claim run_candidate_cycle(extended_candidate& c, const history& h) { return c.step(h); }

struct log_entry {
  std::size_t cycle = 0;
  std::string candidate;
  rational claimed = 0;
  bool valid = false;
  bool selected = false;
  action_symbol action{0};
  std::size_t steps_used = 0;
};

struct vote_result {
  action_symbol action{0};
  std::size_t winner = 0;
  rational counted_claim = 0;
  std::vector<log_entry> log;
};

/// Steps every candidate once on h, validates, and picks the highest counted claim.
inline vote_result best_vote_cycle(const std::vector<candidate_ptr>& pool, const history& h,
                                   const validation_context& ctx) {
  if (pool.empty()) throw structural_error("best vote over an empty candidate pool");
  vote_result out;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto cl = run_candidate_cycle(*pool[i], h);
    bool valid = validate_claim(*pool[i], cl, h, ctx);
    rational counted = valid ? cl.w : rational(0);
    out.log.push_back({h.size() + 1, pool[i]->id(), cl.w, valid, false, cl.y, cl.steps_used});
    bool better = !best || counted > out.counted_claim ||
                  (counted == out.counted_claim && pool[i]->order_key() < pool[*best]->order_key());
    if (better) {
      best = i;
      out.counted_claim = counted;
      out.action = cl.y;
    }
  }
  out.winner = *best;
  out.log[*best].selected = true;
  return out;
}

/// Candidates built from every program of at most l_max bits.
inline std::vector<candidate_ptr> program_candidates(std::size_t l_max, const alphabet& a, vm::run_budget budget,
                                                     const rational& claim_unit) {
  std::vector<candidate_ptr> out;
  for (auto& p : vm::enumerate_programs(l_max))
    out.push_back(std::make_shared<program_candidate>(std::move(p), a, budget, claim_unit));
  return out;
}

struct aixitl_run {
  history trace;
  std::vector<log_entry> log;
  std::vector<std::size_t> winners;
};

/// Full best-vote loop against a model environment.
inline aixitl_run run_aixitl(std::vector<candidate_ptr> pool, const chronological_model& env,
                             const validation_context& ctx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  aixitl_run out;
  for (auto& c : pool) c->reset();
  for (std::size_t k = 1; k <= ctx.lifetime; ++k) {
    auto vote = best_vote_cycle(pool, out.trace, ctx);
    out.log.insert(out.log.end(), vote.log.begin(), vote.log.end());
    out.winners.push_back(vote.winner);
    auto x = sample_percept(env.conditional(out.trace, vote.action), rng);
    out.trace.push(vote.action, env.symbols().percept_at(x));
  }
  return out;
}

inline std::string log_csv(const std::vector<log_entry>& log) {
  std::ostringstream out;
  out << "cycle,candidate,claimed_w,valid,selected,action,steps_used\n";
  for (const auto& e : log)
    out << e.cycle << ',' << e.candidate << ',' << format_rational(e.claimed) << ',' << (e.valid ? 1 : 0) << ','
        << (e.selected ? 1 : 0) << ',' << e.action.index << ',' << e.steps_used << '\n';
  return out.str();
}

/// The best-vote agent viewed as one extended candidate: at h it claims the highest
/// counted member claim and acts like that member.
class best_vote_composite final : public extended_candidate {
 public:
  best_vote_composite(std::vector<candidate_ptr> members, validation_context ctx)
      : members_(std::move(members)), ctx_(std::move(ctx)) {}

  [[nodiscard]] std::string id() const override { return "best-vote"; }
  [[nodiscard]] std::string order_key() const override { return ""; }
  void reset() override {}

  claim step(const history& h) override {
    vote_result best;
    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      auto cl = members_[i]->claim_at(h);
      rational counted = validate_claim(*members_[i], cl, h, ctx_) ? cl.w : rational(0);
      if (!winner || counted > best.counted_claim ||
          (counted == best.counted_claim && members_[i]->order_key() < members_[*winner]->order_key())) {
        winner = i;
        best.counted_claim = counted;
        best.action = cl.y;
      }
    }
    return claim{best.counted_claim, best.action, 0, false};
  }

  [[nodiscard]] policy_oracle policy() const override {
    auto self = std::make_shared<best_vote_composite>(members_, ctx_);
    return [self](const history& h) { return self->step(h).y; };
  }

 private:
  std::vector<candidate_ptr> members_;
  validation_context ctx_;
};

/// Claim that counts for selection: the claim if valid, else 0.
inline rational counted_claim(extended_candidate& c, const history& h, const validation_context& ctx) {
  auto cl = c.claim_at(h);
  return validate_claim(c, cl, h, ctx) ? cl.w : rational(0);
}

/// p's counted claim is at least p2's on every history of fewer than `depth` cycles.
inline bool eff_intel_geq(extended_candidate& p, extended_candidate& p2, std::size_t depth,
                          const validation_context& ctx) {
  for (std::size_t d = 0; d < depth; ++d)
    for (const auto& h : all_histories(ctx.symbols, d))
      if (counted_claim(p, h, ctx) < counted_claim(p2, h, ctx)) return false;
  return true;
}

}  // namespace aixi::tl
