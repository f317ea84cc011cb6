#pragma once

// Shared vocabulary: alphabets, percepts, interaction histories and horizon policies.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aixi/errors.hpp"
#include "aixi/rational.hpp"

namespace aixi {

struct action_symbol {
  std::uint32_t index = 0;

  friend auto operator<=>(const action_symbol&, const action_symbol&) = default;
};

/// x_k = r_k o_k. Rewards are exact and lie in [0, r_max].
struct percept {
  rational reward = 0;
  std::uint32_t observation = 0;

  friend bool operator==(const percept& a, const percept& b) {
    return a.observation == b.observation && a.reward == b.reward;
  }
};

/// Finite action and percept spaces of one scenario.
///
/// Percepts are indexed reward-major: index = reward_index * observations + observation.
/// The reward list is strictly increasing and starts at 0, so the lowest percept
/// (index 0) is always (r=0, o=0).
struct alphabet {
  std::size_t actions = 2;
  std::size_t observations = 1;
  std::vector<rational> rewards{rational(0), rational(1)};
  rational r_max = 1;

  [[nodiscard]] std::size_t percept_count() const noexcept { return rewards.size() * observations; }

  [[nodiscard]] percept percept_at(std::size_t index) const {
    if (index >= percept_count()) throw structural_error("percept index out of range");
    return percept{rewards[index / observations], static_cast<std::uint32_t>(index % observations)};
  }

  [[nodiscard]] std::optional<std::size_t> find(const percept& x) const {
    if (x.observation >= observations) return std::nullopt;
    auto it = std::lower_bound(rewards.begin(), rewards.end(), x.reward);
    if (it == rewards.end() || *it != x.reward) return std::nullopt;
    return static_cast<std::size_t>(it - rewards.begin()) * observations + x.observation;
  }

  [[nodiscard]] std::size_t index_of(const percept& x) const {
    auto i = find(x);
    if (!i) throw structural_error("percept not in alphabet: r=" + format_rational(x.reward) +
                                   " o=" + std::to_string(x.observation));
    return *i;
  }

  [[nodiscard]] bool contains(action_symbol y) const noexcept { return y.index < actions; }

  /// Returns every violated invariant; empty when the alphabet is usable.
  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (actions < 1) out.emplace_back("action alphabet must be nonempty");
    if (observations < 1) out.emplace_back("observation alphabet must be nonempty");
    if (rewards.empty()) out.emplace_back("reward alphabet must be nonempty");
    if (!rewards.empty() && rewards.front() != 0) out.emplace_back("reward alphabet must start at 0");
    for (std::size_t i = 1; i < rewards.size(); ++i)
      if (!(rewards[i - 1] < rewards[i])) out.emplace_back("rewards must be strictly increasing");
    if (!rewards.empty() && rewards.back() > r_max) out.emplace_back("reward exceeds r_max");
    return out;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) throw validation_error(std::move(v));
  }

  friend bool operator==(const alphabet&, const alphabet&) = default;
};

struct cycle_record {
  action_symbol action;
  percept perceived;

  friend bool operator==(const cycle_record&, const cycle_record&) = default;
};

/// y1 x1 y2 x2 ... with an optional trailing action awaiting the environment's reply.
class history {
 public:
  history() = default;

  [[nodiscard]] const std::vector<cycle_record>& cycles() const noexcept { return cycles_; }
  [[nodiscard]] std::size_t size() const noexcept { return cycles_.size(); }
  [[nodiscard]] bool empty() const noexcept { return cycles_.empty() && !pending_; }
  [[nodiscard]] const std::optional<action_symbol>& pending_action() const noexcept { return pending_; }
  [[nodiscard]] const cycle_record& operator[](std::size_t i) const { return cycles_.at(i); }
  [[nodiscard]] const cycle_record& back() const { return cycles_.back(); }

  /// Agent's move: starts a cycle.
  void submit_action(action_symbol y) {
    if (pending_) throw structural_error("history already has a pending action");
    pending_ = y;
  }

  /// Environment's reply: completes the pending cycle.
  void receive_percept(const percept& x) {
    if (!pending_) throw structural_error("percept received without a pending action");
    cycles_.push_back({*pending_, x});
    pending_.reset();
  }

  void push(action_symbol y, const percept& x) {
    if (pending_) throw structural_error("alternation violation: pending action before append");
    cycles_.push_back({y, x});
  }

  void pop() {
    if (pending_) throw structural_error("cannot pop with a pending action");
    if (cycles_.empty()) throw structural_error("pop on empty history");
    cycles_.pop_back();
  }

  /// First n completed cycles.
  [[nodiscard]] history prefix(std::size_t n) const {
    history h;
    h.cycles_.assign(cycles_.begin(), cycles_.begin() + static_cast<std::ptrdiff_t>(std::min(n, cycles_.size())));
    return h;
  }

  friend bool operator==(const history&, const history&) = default;

 private:
  std::vector<cycle_record> cycles_;
  std::optional<action_symbol> pending_;
};

/// Returns h extended by one complete cycle y x.
inline history append_cycle(const history& h, action_symbol y, const percept& x) {
  history out = h;
  out.push(y, x);
  return out;
}

// Canonical text encoding: whitespace-separated `y:<int> r:<p>/<q> o:<int>` tokens.

inline std::string encode_history(const history& h) {
  std::string out;
  auto add = [&out](const std::string& token) {
    if (!out.empty()) out += ' ';
    out += token;
  };
  for (const auto& c : h.cycles()) {
    add("y:" + std::to_string(c.action.index));
    add("r:" + format_rational(c.perceived.reward));
    add("o:" + std::to_string(c.perceived.observation));
  }
  if (h.pending_action()) add("y:" + std::to_string(h.pending_action()->index));
  return out;
}

inline history decode_history(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  auto field = [](const std::string& token, char tag) -> std::string {
    if (token.size() < 3 || token[0] != tag || token[1] != ':')
      throw structural_error("expected '" + std::string(1, tag) + ":' token, got '" + token + "'");
    return token.substr(2);
  };
  auto to_index = [](const std::string& digits) -> std::uint32_t {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw structural_error("bad symbol index '" + digits + "'");
    return static_cast<std::uint32_t>(std::stoul(digits));
  };
  history h;
  std::size_t i = 0;
  while (i < tokens.size()) {
    action_symbol y{to_index(field(tokens[i], 'y'))};
    if (i + 1 == tokens.size()) {
      h.submit_action(y);
      break;
    }
    if (i + 2 >= tokens.size()) throw structural_error("truncated cycle in history encoding");
    rational r;
    try {
      r = parse_rational(field(tokens[i + 1], 'r'));
    } catch (const std::invalid_argument& e) {
      throw structural_error(e.what());
    }
    percept x{r, to_index(field(tokens[i + 2], 'o'))};
    h.push(y, x);
    i += 3;
  }
  return h;
}

/// Compact hashable key over symbol indices of a complete history.
inline std::string history_key(const alphabet& a, const history& h) {
  std::string key;
  key.reserve(h.size() * 4);
  for (const auto& c : h.cycles()) {
    auto x = a.index_of(c.perceived);
    key.push_back(static_cast<char>(c.action.index & 0xFFU));
    key.push_back(static_cast<char>((c.action.index >> 8U) & 0xFFU));
    key.push_back(static_cast<char>(x & 0xFFU));
    key.push_back(static_cast<char>((x >> 8U) & 0xFFU));
  }
  return key;
}

// Horizon policies.

struct fixed_horizon {
  std::size_t m = 1;
  friend bool operator==(const fixed_horizon&, const fixed_horizon&) = default;
};
struct moving_horizon {
  std::size_t h = 1;
  friend bool operator==(const moving_horizon&, const moving_horizon&) = default;
};
struct proportional_horizon {
  rational beta = 1;
  friend bool operator==(const proportional_horizon&, const proportional_horizon&) = default;
};
/// Rewards damped by gamma^k; planning truncated to a window of m_cap cycles.
struct geometric_discount {
  rational gamma = rational(1, 2);
  std::size_t m_cap = 1;
  friend bool operator==(const geometric_discount&, const geometric_discount&) = default;
};

using horizon_policy = std::variant<fixed_horizon, moving_horizon, proportional_horizon, geometric_discount>;

inline std::vector<std::string> horizon_violations(const horizon_policy& p) {
  std::vector<std::string> out;
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, fixed_horizon>) {
          if (v.m < 1) out.emplace_back("fixed horizon needs m >= 1");
        } else if constexpr (std::is_same_v<T, moving_horizon>) {
          if (v.h < 1) out.emplace_back("moving horizon needs h >= 1");
        } else if constexpr (std::is_same_v<T, proportional_horizon>) {
          if (v.beta <= 0) out.emplace_back("proportional horizon needs beta > 0");
        } else {
          if (v.gamma <= 0 || v.gamma >= 1) out.emplace_back("geometric discount needs 0 < gamma < 1");
          if (v.m_cap < 1) out.emplace_back("geometric discount needs m_cap >= 1");
        }
      },
      p);
  return out;
}

/// m_k: last cycle counted when planning in cycle k. Never smaller than k.
inline std::size_t horizon_end(const horizon_policy& p, std::size_t k, std::size_t lifetime) {
  if (k < 1 || k > lifetime) throw std::out_of_range("cycle index outside [1, lifetime]");
  std::size_t m = std::visit(
      [k](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, fixed_horizon>) {
          return v.m;
        } else if constexpr (std::is_same_v<T, moving_horizon>) {
          return k + v.h - 1;
        } else if constexpr (std::is_same_v<T, proportional_horizon>) {
          rational scaled = v.beta * static_cast<unsigned long>(k);
          mpz_class ceil_scaled;
          mpz_cdiv_q(ceil_scaled.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
          return k + static_cast<std::size_t>(ceil_scaled.get_ui()) - 1;
        } else {
          return k + v.m_cap - 1;
        }
      },
      p);
  return std::max(k, std::min(m, lifetime));
}

/// r * gamma^k under geometric discounting, r otherwise.
inline rational discounted_reward(const horizon_policy& p, std::size_t k, const rational& r) {
  if (const auto* g = std::get_if<geometric_discount>(&p)) return r * pow(g->gamma, k);
  return r;
}

/// "fixed:10", "moving:2", "proportional:1/2", "geometric:1/2:10".
inline horizon_policy parse_horizon(std::string_view text) {
  std::string s(text);
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("horizon needs kind:parameter");
  std::string kind = s.substr(0, colon);
  std::string rest = s.substr(colon + 1);
  auto to_size = [](const std::string& v) -> std::size_t {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad horizon integer '" + v + "'");
    return std::stoul(v);
  };
  horizon_policy p;
  if (kind == "fixed") {
    p = fixed_horizon{to_size(rest)};
  } else if (kind == "moving") {
    p = moving_horizon{to_size(rest)};
  } else if (kind == "proportional") {
    p = proportional_horizon{parse_rational(rest)};
  } else if (kind == "geometric") {
    auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw std::invalid_argument("geometric horizon needs gamma:m_cap");
    p = geometric_discount{parse_rational(rest.substr(0, c2)), to_size(rest.substr(c2 + 1))};
  } else {
    throw std::invalid_argument("unknown horizon kind '" + kind + "'");
  }
  auto v = horizon_violations(p);
  if (!v.empty()) throw std::invalid_argument(v.front());
  return p;
}

inline std::string format_horizon(const horizon_policy& p) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, fixed_horizon>) {
          return "fixed:" + std::to_string(v.m);
        } else if constexpr (std::is_same_v<T, moving_horizon>) {
          return "moving:" + std::to_string(v.h);
        } else if constexpr (std::is_same_v<T, proportional_horizon>) {
          return "proportional:" + short_rational(v.beta);
        } else {
          return "geometric:" + short_rational(v.gamma) + ":" + std::to_string(v.m_cap);
        }
      },
      p);
}

}  // namespace aixi
