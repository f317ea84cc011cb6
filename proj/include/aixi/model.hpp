#pragma once

// Chronological (semi)measures over percept sequences given actions.
//
// Every model answers one question: given a complete history h and the next action y,
// what is rho(h y x) / rho(h) for each percept x? Joints are chain products of these
// conditionals. Mixtures keep per-component masses so that conditionals are ratios of
// sums of dyadic weights and stay exact.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aixi/core.hpp"
#include "aixi/vm.hpp"

namespace aixi {

/// Indexed by percept index (see alphabet).
using distribution = std::vector<rational>;

class chronological_model {
 public:
  virtual ~chronological_model() = default;

  [[nodiscard]] virtual const alphabet& symbols() const = 0;

  /// rho(h y x) / rho(h) for every percept x. Only meaningful when rho(h) > 0.
  [[nodiscard]] virtual distribution conditional(const history& h, action_symbol y) const = 0;

  /// rho(y x_{1:n}); 1 on the empty history.
  [[nodiscard]] virtual rational joint(const history& h) const {
    if (h.pending_action()) throw structural_error("joint needs a complete history");
    rational p = 1;
    history prefix;
    for (const auto& c : h.cycles()) {
      auto row = conditional(prefix, c.action);
      p *= row.at(symbols().index_of(c.perceived));
      if (p == 0) return 0;
      prefix.push(c.action, c.perceived);
    }
    return p;
  }
};

using model_ptr = std::shared_ptr<const chronological_model>;

inline rational joint_prob(const chronological_model& rho, const history& h) { return rho.joint(h); }

/// rho(h y x) / rho(h); throws undefined_conditional when rho(h) = 0.
inline rational cond_prob(const chronological_model& rho, const history& h, action_symbol y, const percept& x) {
  if (h.pending_action()) throw structural_error("cond_prob needs a complete history");
  if (rho.joint(h) == 0) throw undefined_conditional("conditioning on a zero-probability history");
  return rho.conditional(h, y).at(rho.symbols().index_of(x));
}

inline rational row_sum(const distribution& d) {
  rational s = 0;
  for (const auto& v : d) s += v;
  return s;
}

/// Model given directly by its conditional; used by most problem-class constructors.
class function_model final : public chronological_model {
 public:
  using rule = std::function<distribution(const history&, action_symbol)>;

  function_model(alphabet a, rule f) : symbols_(std::move(a)), rule_(std::move(f)) {}

  [[nodiscard]] const alphabet& symbols() const override { return symbols_; }
  [[nodiscard]] distribution conditional(const history& h, action_symbol y) const override {
    auto d = rule_(h, y);
    if (d.size() != symbols_.percept_count()) throw structural_error("conditional row has wrong width");
    return d;
  }

 private:
  alphabet symbols_;
  rule rule_;
};

/// Point mass on one percept.
inline distribution point_mass(const alphabet& a, const percept& x) {
  distribution d(a.percept_count(), rational(0));
  d[a.index_of(x)] = 1;
  return d;
}

/// Deterministic model: percept is a function of the history and the current action.
inline model_ptr make_deterministic_model(alphabet a, std::function<percept(const history&, action_symbol)> f) {
  auto symbols = a;
  return std::make_shared<function_model>(
      std::move(a), [symbols, f = std::move(f)](const history& h, action_symbol y) { return point_mass(symbols, f(h, y)); });
}

/// Explicit conditional rows per context (history + action) up to a depth;
/// contexts without a row are uniform.
class tabular_model final : public chronological_model {
 public:
  explicit tabular_model(alphabet a) : symbols_(std::move(a)) { symbols_.validate(); }

  /// Adds the row for context (h, y). Rows must be nonnegative and sum to exactly 1.
  void set_row(const history& h, action_symbol y, distribution row) {
    if (h.pending_action()) throw structural_error("row context must be a complete history");
    if (!symbols_.contains(y)) throw structural_error("row action out of range");
    if (row.size() != symbols_.percept_count()) throw structural_error("row has wrong width");
    for (const auto& v : row)
      if (v < 0) throw structural_error("negative probability in row");
    if (row_sum(row) != 1) throw structural_error("row does not sum to 1");
    rows_[key(h, y)] = std::move(row);
  }

  [[nodiscard]] const alphabet& symbols() const override { return symbols_; }

  [[nodiscard]] distribution conditional(const history& h, action_symbol y) const override {
    auto it = rows_.find(key(h, y));
    if (it != rows_.end()) return it->second;
    auto n = symbols_.percept_count();
    return distribution(n, rational(1, static_cast<unsigned long>(n)));
  }

  [[nodiscard]] std::size_t row_count() const noexcept { return rows_.size(); }

 private:
  [[nodiscard]] std::string key(const history& h, action_symbol y) const {
    auto k = history_key(symbols_, h);
    k.append(reinterpret_cast<const char*>(&y.index), sizeof y.index);
    return k;
  }

  alphabet symbols_;
  std::unordered_map<std::string, distribution> rows_;
};

/// Every complete history of exactly n cycles over the alphabet, in lexicographic
/// (action, percept-index) order.
inline std::vector<history> all_histories(const alphabet& a, std::size_t n) {
  std::vector<history> level{history{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<history> next;
    next.reserve(level.size() * a.actions * a.percept_count());
    for (const auto& h : level)
      for (std::uint32_t y = 0; y < a.actions; ++y)
        for (std::size_t x = 0; x < a.percept_count(); ++x) next.push_back(append_cycle(h, {y}, a.percept_at(x)));
    level = std::move(next);
  }
  return level;
}

/// A tabular model with a random row for every context of fewer than `depth` cycles.
/// Rows come from small integer weights, so some entries are zero and pruning is exercised.
inline std::shared_ptr<tabular_model> random_tabular_model(const alphabet& a, std::size_t depth, std::uint64_t seed) {
  auto m = std::make_shared<tabular_model>(a);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> weight(0, 4);
  for (std::size_t d = 0; d < depth; ++d) {
    for (const auto& h : all_histories(a, d)) {
      for (std::uint32_t y = 0; y < a.actions; ++y) {
        std::vector<int> w(a.percept_count());
        int total = 0;
        for (auto& v : w) total += (v = weight(rng));
        if (total == 0) {
          w[static_cast<std::size_t>(rng() % w.size())] = 1;
          total = 1;
        }
        distribution row;
        for (int v : w) row.emplace_back(v, total);
        for (auto& v : row) v.canonicalize();
        m->set_row(h, {y}, std::move(row));
      }
    }
  }
  return m;
}

// Plain-text tabular format:
//
//   # comment
//   actions 2
//   observations 1
//   rewards 0 1
//   r_max 1
//   row y:0 r:1/1 o:0 y:1 => 1/4 3/4
//
// A row's context is an encoded history ending in the pending action; the values
// after "=>" are the conditional probabilities in percept-index order.

inline std::shared_ptr<tabular_model> parse_tabular_model(std::istream& in) {
  alphabet a;
  std::vector<std::pair<history, distribution>> rows;
  std::vector<std::string> problems;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string head;
    if (!(words >> head)) continue;
    auto where = "line " + std::to_string(line_no) + ": ";
    try {
      if (head == "actions") {
        words >> a.actions;
      } else if (head == "observations") {
        words >> a.observations;
      } else if (head == "rewards") {
        a.rewards.clear();
        for (std::string r; words >> r;) a.rewards.push_back(parse_rational(r));
      } else if (head == "r_max") {
        std::string r;
        words >> r;
        a.r_max = parse_rational(r);
      } else if (head == "row") {
        auto arrow = line.find("=>");
        if (arrow == std::string::npos) throw structural_error("row without '=>'");
        auto ctx_start = line.find("row") + 3;
        history ctx = decode_history(line.substr(ctx_start, arrow - ctx_start));
        if (!ctx.pending_action()) throw structural_error("row context must end with an action");
        distribution d;
        std::istringstream values(line.substr(arrow + 2));
        for (std::string v; values >> v;) d.push_back(parse_rational(v));
        rows.emplace_back(std::move(ctx), std::move(d));
      } else {
        problems.push_back(where + "unknown directive '" + head + "'");
      }
    } catch (const std::exception& e) {
      problems.push_back(where + e.what());
    }
  }
  for (auto& v : a.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw validation_error(std::move(problems));
  auto m = std::make_shared<tabular_model>(a);
  for (auto& [ctx, d] : rows) {
    history complete = ctx;
    action_symbol y = *complete.pending_action();
    history base;
    for (const auto& c : ctx.cycles()) base.push(c.action, c.perceived);
    try {
      m->set_row(base, y, std::move(d));
    } catch (const std::exception& e) {
      problems.push_back("row '" + encode_history(ctx) + "': " + e.what());
    }
  }
  if (!problems.empty()) throw validation_error(std::move(problems));
  return m;
}

/// Writes every context of fewer than `depth` cycles as a row.
inline void write_tabular_model(std::ostream& out, const chronological_model& m, std::size_t depth) {
  const auto& a = m.symbols();
  out << "actions " << a.actions << "\nobservations " << a.observations << "\nrewards";
  for (const auto& r : a.rewards) out << ' ' << short_rational(r);
  out << "\nr_max " << short_rational(a.r_max) << '\n';
  for (std::size_t d = 0; d < depth; ++d) {
    for (const auto& h : all_histories(a, d)) {
      for (std::uint32_t y = 0; y < a.actions; ++y) {
        history ctx = h;
        ctx.submit_action({y});
        out << "row " << encode_history(ctx) << " =>";
        for (const auto& v : m.conditional(h, {y})) out << ' ' << short_rational(v);
        out << '\n';
      }
    }
  }
}

/// True iff sum_x rho(h y x) does not depend on y, for every context of fewer than `depth` cycles.
inline bool check_chronological(const chronological_model& rho, std::size_t depth) {
  const auto& a = rho.symbols();
  for (std::size_t d = 0; d < depth; ++d) {
    for (const auto& h : all_histories(a, d)) {
      rational base = rho.joint(h);
      if (base == 0) continue;
      rational first;
      for (std::uint32_t y = 0; y < a.actions; ++y) {
        rational marginal = base * row_sum(rho.conditional(h, {y}));
        if (y == 0) first = marginal;
        else if (marginal != first) return false;
      }
    }
  }
  return true;
}

/// The deterministic measure of a single environment program.
class program_model final : public chronological_model {
 public:
  program_model(vm::program q, alphabet a, vm::run_budget budget)
      : program_(std::move(q)), symbols_(std::move(a)), budget_(budget) {}

  [[nodiscard]] const alphabet& symbols() const override { return symbols_; }
  [[nodiscard]] const vm::program& code() const noexcept { return program_; }

  [[nodiscard]] distribution conditional(const history& h, action_symbol y) const override {
    auto state = vm::replay_env(program_, h, symbols_, budget_);
    distribution d(symbols_.percept_count(), rational(0));
    if (!state) return d;
    d[symbols_.index_of(vm::env_cycle(program_, *state, y, symbols_, budget_).perceived)] = 1;
    return d;
  }

  [[nodiscard]] rational joint(const history& h) const override {
    return vm::replay_env(program_, h, symbols_, budget_) ? rational(1) : rational(0);
  }

 private:
  vm::program program_;
  alphabet symbols_;
  vm::run_budget budget_;
};

/// Unnormalized per-component posterior masses w_i * rho_i(h).
struct posterior_state {
  std::vector<rational> masses;
  rational total = 0;

  /// Index of the largest mass (smallest index on ties).
  [[nodiscard]] std::size_t top() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < masses.size(); ++i)
      if (masses[i] > masses[best]) best = i;
    return best;
  }
};

/// Common surface of the two mixture kinds.
class mixture_model : public chronological_model {
 public:
  [[nodiscard]] virtual std::size_t component_count() const = 0;
  [[nodiscard]] virtual const rational& weight(std::size_t i) const = 0;
  [[nodiscard]] virtual std::string component_name(std::size_t i) const = 0;
  /// Code length in bits that stands in for the component's complexity.
  [[nodiscard]] virtual std::size_t code_length(std::size_t i) const = 0;
  [[nodiscard]] virtual posterior_state masses(const history& h) const = 0;

  [[nodiscard]] rational joint(const history& h) const override { return masses(h).total; }

  [[nodiscard]] rational total_weight() const {
    rational s = 0;
    for (std::size_t i = 0; i < component_count(); ++i) s += weight(i);
    return s;
  }
};

/// xi(h) = sum of 2^-l(q) over pool programs q that reproduce h.
class program_mixture final : public mixture_model {
 public:
  program_mixture(std::vector<vm::program> pool, alphabet a, vm::run_budget budget)
      : pool_(std::move(pool)), symbols_(std::move(a)), budget_(budget) {
    if (pool_.empty()) throw structural_error("mixture over an empty program pool");
    for (const auto& q : pool_) weights_.push_back(dyadic_weight(q.length_bits()));
  }

  [[nodiscard]] const alphabet& symbols() const override { return symbols_; }
  [[nodiscard]] const std::vector<vm::program>& pool() const noexcept { return pool_; }
  [[nodiscard]] vm::run_budget budget() const noexcept { return budget_; }
  [[nodiscard]] std::size_t component_count() const override { return pool_.size(); }
  [[nodiscard]] const rational& weight(std::size_t i) const override { return weights_.at(i); }
  [[nodiscard]] std::string component_name(std::size_t i) const override { return pool_.at(i).hex(); }
  [[nodiscard]] std::size_t code_length(std::size_t i) const override { return pool_.at(i).length_bits(); }

  [[nodiscard]] posterior_state masses(const history& h) const override {
    auto n = node_for(h);
    posterior_state out;
    out.masses.assign(pool_.size(), rational(0));
    for (const auto& [i, state] : n->alive) out.masses[i] = weights_[i];
    out.total = n->total;
    return out;
  }

  [[nodiscard]] distribution conditional(const history& h, action_symbol y) const override {
    auto n = node_for(h);
    if (n->total == 0) throw undefined_conditional("mixture conditional on a zero-probability history");
    distribution d(symbols_.percept_count(), rational(0));
    for (const auto& [i, state] : n->alive) {
      auto s = state;
      d[symbols_.index_of(vm::env_cycle(pool_[i], s, y, symbols_, budget_).perceived)] += weights_[i];
    }
    for (auto& v : d) v /= n->total;
    return d;
  }

 private:
  struct node {
    std::vector<std::pair<std::size_t, vm::machine_state>> alive;
    rational total = 0;
  };

  std::shared_ptr<const node> node_for(const history& h) const {
    if (h.pending_action()) throw structural_error("mixture query needs a complete history");
    auto key = history_key(symbols_, h);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto n = std::make_shared<node>();
    if (h.size() == 0) {
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        n->alive.emplace_back(i, vm::machine_state{});
        n->total += weights_[i];
      }
    } else {
      auto parent = node_for(h.prefix(h.size() - 1));
      const auto& last = h.back();
      for (const auto& [i, state] : parent->alive) {
        auto s = state;
        if (vm::env_cycle(pool_[i], s, last.action, symbols_, budget_).perceived == last.perceived) {
          n->alive.emplace_back(i, std::move(s));
          n->total += weights_[i];
        }
      }
    }
    std::lock_guard lock(mutex_);
    return cache_.emplace(std::move(key), std::move(n)).first->second;
  }

  std::vector<vm::program> pool_;
  std::vector<rational> weights_;
  alphabet symbols_;
  vm::run_budget budget_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const node>> cache_;
};

inline std::shared_ptr<program_mixture> build_mixture(std::vector<vm::program> pool, alphabet a,
                                                      vm::run_budget budget) {
  return std::make_shared<program_mixture>(std::move(pool), std::move(a), budget);
}

/// sum_i w_i rho_i over an explicit class of models sharing one alphabet.
class semimeasure_mixture final : public mixture_model {
 public:
  struct component {
    std::string name;
    rational weight;
    model_ptr model;
    std::size_t code_bits = 0;
  };

  explicit semimeasure_mixture(std::vector<component> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw structural_error("mixture over an empty model class");
    rational total = 0;
    for (const auto& p : parts_) {
      if (p.weight < 0) throw structural_error("negative mixture weight");
      if (!(p.model->symbols() == parts_.front().model->symbols()))
        throw structural_error("mixture components disagree on the alphabet");
      total += p.weight;
    }
    if (total > 1) throw structural_error("mixture weights sum above 1");
  }

  [[nodiscard]] const alphabet& symbols() const override { return parts_.front().model->symbols(); }
  [[nodiscard]] std::size_t component_count() const override { return parts_.size(); }
  [[nodiscard]] const rational& weight(std::size_t i) const override { return parts_.at(i).weight; }
  [[nodiscard]] std::string component_name(std::size_t i) const override { return parts_.at(i).name; }
  [[nodiscard]] std::size_t code_length(std::size_t i) const override { return parts_.at(i).code_bits; }
  [[nodiscard]] const component& part(std::size_t i) const { return parts_.at(i); }

  [[nodiscard]] posterior_state masses(const history& h) const override {
    auto m = masses_for(h);
    posterior_state out;
    out.masses = *m;
    for (const auto& v : out.masses) out.total += v;
    return out;
  }

  [[nodiscard]] distribution conditional(const history& h, action_symbol y) const override {
    auto m = masses_for(h);
    rational total = 0;
    for (const auto& v : *m) total += v;
    if (total == 0) throw undefined_conditional("mixture conditional on a zero-probability history");
    distribution d(symbols().percept_count(), rational(0));
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if ((*m)[i] == 0) continue;
      auto row = parts_[i].model->conditional(h, y);
      for (std::size_t x = 0; x < d.size(); ++x) d[x] += (*m)[i] * row[x];
    }
    for (auto& v : d) v /= total;
    return d;
  }

 private:
  std::shared_ptr<const std::vector<rational>> masses_for(const history& h) const {
    if (h.pending_action()) throw structural_error("mixture query needs a complete history");
    auto key = history_key(symbols(), h);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto out = std::make_shared<std::vector<rational>>();
    if (h.size() == 0) {
      for (const auto& p : parts_) out->push_back(p.weight);
    } else {
      history parent_h = h.prefix(h.size() - 1);
      auto parent = masses_for(parent_h);
      const auto& last = h.back();
      auto x = symbols().index_of(last.perceived);
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if ((*parent)[i] == 0) {
          out->emplace_back(0);
          continue;
        }
        out->push_back((*parent)[i] * parts_[i].model->conditional(parent_h, last.action)[x]);
      }
    }
    std::lock_guard lock(mutex_);
    return cache_.emplace(std::move(key), std::move(out)).first->second;
  }

  std::vector<component> parts_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const std::vector<rational>>> cache_;
};

inline posterior_state posterior(const mixture_model& m, const history& h) {
  auto p = m.masses(h);
  if (p.total == 0) throw undefined_conditional("posterior of a zero-probability history");
  return p;
}

/// Missing mass 1 - sum_x rho(x | h, y); zero for proper measures.
inline rational evidence_gap(const chronological_model& m, const history& h, action_symbol y) {
  return rational(1) - row_sum(m.conditional(h, y));
}

/// Conditional rescaled to sum to 1; for display only.
inline distribution normalized_conditional(const chronological_model& m, const history& h, action_symbol y) {
  auto d = m.conditional(h, y);
  auto s = row_sum(d);
  if (s == 0) return d;
  for (auto& v : d) v /= s;
  return d;
}

/// CSV of component weights and posterior masses after h.
inline std::string mixture_csv(const mixture_model& m, const history& h) {
  auto p = m.masses(h);
  std::ostringstream out;
  out << "component,code_bits,weight,mass\n";
  for (std::size_t i = 0; i < m.component_count(); ++i)
    out << m.component_name(i) << ',' << m.code_length(i) << ',' << format_rational(m.weight(i)) << ','
        << format_rational(p.masses[i]) << '\n';
  return out.str();
}

using action_rule = std::function<action_symbol(const history&)>;

/// sum_{t<=n} sum_{x_<t} mu(x_<t) sum_x' (xi(x'|h) - mu(x'|h))^2 with actions from pi.
inline rational sq_distance_sum(const chronological_model& xi, const chronological_model& mu, const action_rule& pi,
                                std::size_t n) {
  rational total = 0;
  std::function<void(history&, const rational&, std::size_t)> walk = [&](history& h, const rational& weight,
                                                                         std::size_t t) {
    if (t > n) return;
    auto y = pi(h);
    auto pm = mu.conditional(h, y);
    auto px = xi.conditional(h, y);
    rational step = 0;
    for (std::size_t x = 0; x < pm.size(); ++x) {
      rational gap = px[x] - pm[x];
      step += gap * gap;
    }
    total += weight * step;
    for (std::size_t x = 0; x < pm.size(); ++x) {
      if (pm[x] == 0) continue;
      h.push(y, mu.symbols().percept_at(x));
      walk(h, weight * pm[x], t + 1);
      h.pop();
    }
  };
  history h;
  walk(h, rational(1), 1);
  return total;
}

}  // namespace aixi
