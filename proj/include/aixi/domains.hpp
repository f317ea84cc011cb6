#pragma once

// Problem classes as chronological models: sequence prediction, strategic games,
// function minimization, supervised learning from examples, and three small
// demonstration environments (heaven/hell, only-one, lazy).

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aixi/core.hpp"
#include "aixi/model.hpp"

namespace aixi::domains {

inline alphabet binary_reward_alphabet(std::size_t actions, std::size_t observations = 1, rational r_max = 1) {
  alphabet a;
  a.actions = actions;
  a.observations = observations;
  a.rewards = {rational(0), r_max};
  a.r_max = r_max;
  return a;
}

// ---------------------------------------------------------------------------
// Sequence prediction. The agent's action is its guess for the next bit z_k and
// the reward says whether it was right; no observation is needed because z_k can
// be recovered from (y_k, r_k).

/// P(z_k = 1 | z_<k).
using bit_prior = std::function<rational(const std::vector<int>&)>;

inline bit_prior deterministic_sequence(std::vector<int> bits) {
  return [bits = std::move(bits)](const std::vector<int>& prefix) -> rational {
    if (prefix.size() >= bits.size()) return rational(1, 2);
    return bits[prefix.size()] ? 1 : 0;
  };
}

/// A random prior with its own conditional for every context shorter than depth;
/// deeper contexts predict 1/2.
inline bit_prior random_sequence_prior(std::size_t depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto table = std::make_shared<std::map<std::vector<int>, rational>>();
  std::vector<std::vector<int>> level{{}};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::vector<int>> next;
    for (const auto& ctx : level) {
      auto num = static_cast<long>(rng() % 9);
      (*table)[ctx] = rational(num, 8L);
      for (int b : {0, 1}) {
        auto child = ctx;
        child.push_back(b);
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }
  for (auto& [ctx, v] : *table) v.canonicalize();
  return [table](const std::vector<int>& prefix) -> rational {
    auto it = table->find(prefix);
    return it == table->end() ? rational(1, 2) : it->second;
  };
}

/// z_i = y_i when the guess was rewarded, 1 - y_i otherwise.
inline std::vector<int> sp_sequence(const history& h) {
  std::vector<int> z;
  for (const auto& c : h.cycles()) {
    int y = static_cast<int>(c.action.index);
    z.push_back(c.perceived.reward > 0 ? y : 1 - y);
  }
  return z;
}

inline model_ptr make_sp_env(bit_prior prior) {
  auto a = binary_reward_alphabet(2);
  return std::make_shared<function_model>(a, [prior = std::move(prior)](const history& h, action_symbol y) {
    rational p1 = prior(sp_sequence(h));
    rational hit = y.index == 1 ? p1 : rational(1) - p1;
    return distribution{rational(1) - hit, hit};
  });
}

/// The informed predictor: the more probable next bit, 0 on ties.
inline action_symbol sp_predict(const bit_prior& prior, const std::vector<int>& context) {
  return action_symbol{prior(context) > rational(1, 2) ? 1U : 0U};
}

// ---------------------------------------------------------------------------
// Strategic games. The agent moves first in each round, the environment answers
// with the minimax reply, and the (shifted) leaf value arrives as the reward of the
// last round. Episodes repeat every n cycles.

struct game_spec {
  std::size_t rounds = 1;
  std::size_t agent_moves = 2;
  std::size_t opponent_moves = 2;
  /// Leaf values in [-1, 1], indexed by the move sequence y1 o1 ... yn on in mixed radix.
  std::vector<rational> leaves;

  [[nodiscard]] std::size_t leaf_count() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rounds; ++i) n *= agent_moves * opponent_moves;
    return n;
  }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (rounds < 1) out.emplace_back("game needs at least one round");
    if (agent_moves < 1 || opponent_moves < 1) out.emplace_back("move alphabets must be nonempty");
    if (leaves.size() != leaf_count()) out.emplace_back("game needs exactly one value per leaf");
    for (const auto& v : leaves)
      if (v < -1 || v > 1) {
        out.emplace_back("leaf value outside [-1, 1]");
        break;
      }
    return out;
  }

  /// Leaf index of a complete move sequence (agent, opponent, agent, ...).
  [[nodiscard]] std::size_t leaf_index(const std::vector<std::size_t>& moves) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < moves.size(); ++i) idx = idx * (i % 2 == 0 ? agent_moves : opponent_moves) + moves[i];
    return idx;
  }
};

/// (v + 1) / 2 * r_max
inline rational shift_leaf(const rational& v, const rational& r_max) { return (v + 1) / 2 * r_max; }

namespace detail {

/// Value of a partial move sequence with the agent maximizing and the opponent minimizing.
inline rational game_value(const game_spec& g, std::vector<std::size_t>& moves) {
  if (moves.size() == 2 * g.rounds) return g.leaves[g.leaf_index(moves)];
  bool agent_turn = moves.size() % 2 == 0;
  std::size_t n = agent_turn ? g.agent_moves : g.opponent_moves;
  rational best;
  for (std::size_t i = 0; i < n; ++i) {
    moves.push_back(i);
    auto v = game_value(g, moves);
    moves.pop_back();
    if (i == 0 || (agent_turn ? v > best : v < best)) best = v;
  }
  return best;
}

}  // namespace detail

/// The opponent's minimax reply after the episode's moves (ending with the agent's move); smallest on ties.
inline std::size_t minimax_reply(const game_spec& g, std::vector<std::size_t> moves) {
  std::size_t best = 0;
  rational best_value;
  for (std::size_t o = 0; o < g.opponent_moves; ++o) {
    moves.push_back(o);
    auto v = detail::game_value(g, moves);
    moves.pop_back();
    if (o == 0 || v < best_value) {
      best = o;
      best_value = v;
    }
  }
  return best;
}

inline alphabet game_alphabet(const game_spec& g, const rational& r_max = 1) {
  alphabet a;
  a.actions = g.agent_moves;
  a.observations = g.opponent_moves;
  a.rewards = {rational(0)};
  for (const auto& v : g.leaves) a.rewards.push_back(shift_leaf(v, r_max));
  std::sort(a.rewards.begin(), a.rewards.end());
  a.rewards.erase(std::unique(a.rewards.begin(), a.rewards.end()), a.rewards.end());
  a.r_max = r_max;
  return a;
}

inline model_ptr make_sg_env(game_spec g, rational r_max = 1) {
  auto problems = g.violations();
  if (!problems.empty()) throw validation_error(std::move(problems));
  auto a = game_alphabet(g, r_max);
  return make_deterministic_model(a, [g = std::move(g), r_max](const history& h, action_symbol y) {
    std::size_t start = h.size() - h.size() % g.rounds;
    std::vector<std::size_t> moves;
    for (std::size_t i = start; i < h.size(); ++i) {
      moves.push_back(h[i].action.index);
      moves.push_back(h[i].perceived.observation);
    }
    moves.push_back(y.index);
    auto o = minimax_reply(g, moves);
    rational reward = 0;
    if (moves.size() + 1 == 2 * g.rounds) {
      moves.push_back(o);
      reward = shift_leaf(g.leaves[g.leaf_index(moves)], r_max);
    }
    return percept{reward, static_cast<std::uint32_t>(o)};
  });
}

// Text format: "rounds 2", "agent_moves 2", "opponent_moves 3", then "leaves v v v ..."
// with values in [-1, 1] in leaf-index order.
inline game_spec parse_game_spec(std::istream& in) {
  game_spec g;
  std::vector<std::string> problems;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string key;
    if (!(words >> key)) continue;
    if (key == "rounds") words >> g.rounds;
    else if (key == "agent_moves") words >> g.agent_moves;
    else if (key == "opponent_moves") words >> g.opponent_moves;
    else if (key == "leaves")
      for (std::string v; words >> v;) g.leaves.push_back(parse_rational(v));
    else problems.push_back("unknown game directive '" + key + "'");
  }
  for (auto& v : g.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw validation_error(std::move(problems));
  return g;
}

// ---------------------------------------------------------------------------
// Function minimization. A latent f : Y -> Z is drawn once from a prior; each cycle
// the agent queries y_k, observes the index of z_k = f(y_k) and is paid
// (z_max - z_k) / (z_max - z_min) * r_max, so maximizing reward minimizes sum z.

struct function_class_spec {
  std::size_t domain = 2;
  std::vector<rational> codomain;                   // strictly increasing
  std::vector<std::vector<std::size_t>> functions;  // codomain indices, one row per function
  std::vector<rational> prior;

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (domain < 1) out.emplace_back("function domain must be nonempty");
    if (codomain.size() < 2) out.emplace_back("codomain needs at least two values");
    for (std::size_t i = 1; i < codomain.size(); ++i)
      if (!(codomain[i - 1] < codomain[i])) out.emplace_back("codomain must be strictly increasing");
    if (functions.size() != prior.size()) out.emplace_back("one prior weight per function required");
    for (const auto& f : functions) {
      if (f.size() != domain) out.emplace_back("function row has wrong length");
      for (auto z : f)
        if (z >= codomain.size()) out.emplace_back("function value outside the codomain");
    }
    rational total = 0;
    for (const auto& p : prior) {
      if (p < 0) out.emplace_back("negative prior weight");
      total += p;
    }
    if (total != 1) out.emplace_back("function prior must sum to 1");
    return out;
  }
};

/// Every function domain -> codomain with the uniform prior.
inline function_class_spec uniform_function_class(std::size_t domain, std::vector<rational> codomain) {
  function_class_spec c;
  c.domain = domain;
  c.codomain = std::move(codomain);
  std::size_t count = 1;
  for (std::size_t i = 0; i < domain; ++i) count *= c.codomain.size();
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<std::size_t> f(domain);
    std::size_t rest = n;
    for (std::size_t i = domain; i-- > 0;) {
      f[i] = rest % c.codomain.size();
      rest /= c.codomain.size();
    }
    c.functions.push_back(std::move(f));
    c.prior.emplace_back(1L, static_cast<long>(count));
  }
  return c;
}

inline rational fm_reward(const function_class_spec& c, std::size_t z, const rational& r_max) {
  return (c.codomain.back() - c.codomain[z]) / (c.codomain.back() - c.codomain.front()) * r_max;
}

inline alphabet fm_alphabet(const function_class_spec& c, const rational& r_max = 1) {
  alphabet a;
  a.actions = c.domain;
  a.observations = c.codomain.size();
  a.rewards.clear();
  for (std::size_t z = c.codomain.size(); z-- > 0;) a.rewards.push_back(fm_reward(c, z, r_max));
  a.r_max = r_max;
  return a;
}

/// Posterior-predictive probability of each codomain index for query y after h.
inline std::vector<rational> fm_predictive(const function_class_spec& c, const history& h, action_symbol y) {
  std::vector<rational> out(c.codomain.size(), rational(0));
  rational mass = 0;
  for (std::size_t i = 0; i < c.functions.size(); ++i) {
    const auto& f = c.functions[i];
    bool consistent = true;
    for (const auto& cyc : h.cycles())
      if (f[cyc.action.index] != cyc.perceived.observation) {
        consistent = false;
        break;
      }
    if (!consistent) continue;
    mass += c.prior[i];
    out[f[y.index]] += c.prior[i];
  }
  if (mass == 0) throw undefined_conditional("no function in the class explains the history");
  for (auto& v : out) v /= mass;
  return out;
}

/// Expected function value <z> for query y after h.
inline rational fm_expected_value(const function_class_spec& c, const history& h, action_symbol y) {
  auto p = fm_predictive(c, h, y);
  rational e = 0;
  for (std::size_t z = 0; z < p.size(); ++z) e += p[z] * c.codomain[z];
  return e;
}

inline model_ptr make_fm_env(function_class_spec c, rational r_max = 1) {
  auto problems = c.violations();
  if (!problems.empty()) throw validation_error(std::move(problems));
  auto a = fm_alphabet(c, r_max);
  return std::make_shared<function_model>(a, [c = std::move(c), a, r_max](const history& h, action_symbol y) {
    distribution d(a.percept_count(), rational(0));
    std::vector<rational> p;
    try {
      p = fm_predictive(c, h, y);
    } catch (const undefined_conditional&) {
      return d;
    }
    for (std::size_t z = 0; z < p.size(); ++z)
      if (p[z] != 0) d[a.index_of(percept{fm_reward(c, z, r_max), static_cast<std::uint32_t>(z)})] = p[z];
    return d;
  });
}

/// One fixed function from the class as a deterministic environment.
inline model_ptr make_fm_truth(const function_class_spec& c, std::size_t function_index, rational r_max = 1) {
  auto one = c;
  one.functions = {c.functions.at(function_index)};
  one.prior = {rational(1)};
  return make_fm_env(std::move(one), r_max);
}

// Text format: "domain 2", "codomain 1 2 3 4", then "function <prior> <z-index>..." lines;
// "uniform" instead of function lines means every function with equal prior.
inline function_class_spec parse_function_class(std::istream& in) {
  function_class_spec c;
  bool uniform = false;
  std::vector<std::string> problems;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string key;
    if (!(words >> key)) continue;
    try {
      if (key == "domain") {
        words >> c.domain;
      } else if (key == "codomain") {
        for (std::string v; words >> v;) c.codomain.push_back(parse_rational(v));
      } else if (key == "uniform") {
        uniform = true;
      } else if (key == "function") {
        std::string p;
        words >> p;
        c.prior.push_back(parse_rational(p));
        std::vector<std::size_t> f;
        for (std::size_t z; words >> z;) f.push_back(z);
        c.functions.push_back(std::move(f));
      } else {
        problems.push_back("unknown function-class directive '" + key + "'");
      }
    } catch (const std::exception& e) {
      problems.emplace_back(e.what());
    }
  }
  if (uniform) c = uniform_function_class(c.domain, c.codomain);
  for (auto& v : c.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw validation_error(std::move(problems));
  return c;
}

// ---------------------------------------------------------------------------
// Learning from examples. Each cycle presents o_k = (z, v): a labelled example
// (v in Y) or a question (v = ?). The action y_k answers the previous presentation
// and is paid 1 iff (z_{k-1}, y_k) is in R; the first reward is a dummy 0.

struct relation_spec {
  std::size_t inputs = 2;   // |Z|
  std::size_t answers = 2;  // |Y|
  /// member[z][y]
  std::vector<std::vector<bool>> member;
  /// Presentation probabilities indexed by observation z * (answers + 1) + v, v = answers meaning "?".
  std::vector<rational> presentation;

  [[nodiscard]] std::size_t observation_count() const { return inputs * (answers + 1); }
  [[nodiscard]] std::size_t question(std::size_t z) const { return z * (answers + 1) + answers; }
  [[nodiscard]] std::size_t example(std::size_t z, std::size_t v) const { return z * (answers + 1) + v; }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (member.size() != inputs) out.emplace_back("relation needs one row per input");
    for (const auto& row : member)
      if (row.size() != answers) out.emplace_back("relation row has wrong length");
    if (presentation.size() != observation_count()) out.emplace_back("presentation needs one weight per observation");
    if (!out.empty()) return out;
    rational total = 0;
    for (std::size_t z = 0; z < inputs; ++z)
      for (std::size_t v = 0; v <= answers; ++v) {
        const auto& p = presentation[z * (answers + 1) + v];
        if (p < 0) out.emplace_back("negative presentation probability");
        if (v < answers && p > 0 && !member[z][v]) out.emplace_back("wrong example has positive probability");
        total += p;
      }
    if (total != 1) out.emplace_back("presentation probabilities must sum to 1");
    return out;
  }
};

/// Uniform presentation over all correct examples and all questions.
inline relation_spec uniform_presentation(std::vector<std::vector<bool>> member) {
  relation_spec r;
  r.inputs = member.size();
  r.answers = member.empty() ? 0 : member.front().size();
  r.member = std::move(member);
  r.presentation.assign(r.observation_count(), rational(0));
  long count = 0;
  for (std::size_t z = 0; z < r.inputs; ++z) {
    ++count;
    for (std::size_t v = 0; v < r.answers; ++v) count += r.member[z][v] ? 1 : 0;
  }
  for (std::size_t z = 0; z < r.inputs; ++z) {
    r.presentation[r.question(z)] = ratio(1, count);
    for (std::size_t v = 0; v < r.answers; ++v)
      if (r.member[z][v]) r.presentation[r.example(z, v)] = ratio(1, count);
  }
  return r;
}

inline model_ptr make_ex_env(relation_spec r) {
  auto problems = r.violations();
  if (problems.size()) throw validation_error(std::move(problems));
  auto a = binary_reward_alphabet(r.answers, r.observation_count());
  return std::make_shared<function_model>(a, [r = std::move(r), a](const history& h, action_symbol y) {
    distribution d(a.percept_count(), rational(0));
    bool paid = false;
    if (!h.cycles().empty()) {
      std::size_t z = h.back().perceived.observation / (r.answers + 1);
      paid = r.member[z][y.index];
    }
    for (std::size_t o = 0; o < r.observation_count(); ++o)
      d[a.index_of(percept{paid ? rational(1) : rational(0), static_cast<std::uint32_t>(o)})] = r.presentation[o];
    return d;
  });
}

/// sigma-weighted mixture over candidate relations.
inline std::shared_ptr<semimeasure_mixture> make_ex_class(const std::vector<relation_spec>& relations,
                                                          const std::vector<rational>& sigma) {
  if (relations.size() != sigma.size()) throw structural_error("one weight per relation required");
  std::vector<semimeasure_mixture::component> parts;
  for (std::size_t i = 0; i < relations.size(); ++i)
    parts.push_back({"relation-" + std::to_string(i), sigma[i], make_ex_env(relations[i]), 0});
  return std::make_shared<semimeasure_mixture>(std::move(parts));
}

// ---------------------------------------------------------------------------
// Demonstration environments.

/// r_k = 1 for all k iff y_1 = i.
inline model_ptr make_heavenhell(std::uint32_t i) {
  if (i > 1) throw structural_error("heaven/hell index must be 0 or 1");
  return make_deterministic_model(binary_reward_alphabet(2), [i](const history& h, action_symbol y) {
    auto first = h.cycles().empty() ? y : h[0].action;
    return percept{first.index == i ? rational(1) : rational(0), 0};
  });
}

/// r_k = 1 iff y_k = y_star, with N actions.
inline model_ptr make_onlyone(std::size_t n, action_symbol y_star) {
  if (y_star.index >= n) throw structural_error("y_star must be below N");
  return make_deterministic_model(binary_reward_alphabet(n), [y_star](const history&, action_symbol y) {
    return percept{y == y_star ? rational(1) : rational(0), 0};
  });
}

/// Smallest integer s with s * s >= l.
inline std::size_t ceil_sqrt(std::size_t l) {
  std::size_t s = 0;
  while (s * s < l) ++s;
  return s;
}

/// Reward of y_k = 1 after the actions y_1..y_{k-1}: 1 iff for some l >= 1 the
/// ceil(sqrt(l)) actions ending at cycle k - l were all 0.
inline bool lazy_rewarded(const std::vector<std::uint32_t>& past) {
  const std::size_t k = past.size() + 1;
  for (std::size_t l = 1; l < k; ++l) {
    std::size_t run = ceil_sqrt(l);
    std::size_t end = k - l;  // 1-based cycle index
    if (end < run) continue;
    bool zeros = true;
    for (std::size_t j = end + 1 - run; j <= end && zeros; ++j) zeros = past[j - 1] == 0;
    if (zeros) return true;
  }
  return false;
}

inline model_ptr make_lazy(std::size_t lifetime) {
  if (lifetime < 2) throw structural_error("lazy environment needs a lifetime of at least 2");
  return make_deterministic_model(binary_reward_alphabet(2), [](const history& h, action_symbol y) {
    if (y.index != 1) return percept{rational(0), 0};
    std::vector<std::uint32_t> past;
    for (const auto& c : h.cycles()) past.push_back(c.action.index);
    return percept{lazy_rewarded(past) ? rational(1) : rational(0), 0};
  });
}

}  // namespace aixi::domains
