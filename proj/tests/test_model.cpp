#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "aixi/model.hpp"
#include "oracles.hpp"

using namespace aixi;

namespace {

alphabet binary_obs() {
  alphabet a;
  a.observations = 2;
  return a;
}

model_ptr constant_percept(const alphabet& a, percept x) {
  return make_deterministic_model(a, [x](const history&, action_symbol) { return x; });
}

history random_history(const alphabet& a, std::size_t n, std::mt19937_64& rng) {
  history h;
  for (std::size_t i = 0; i < n; ++i)
    h.push({static_cast<std::uint32_t>(rng() % a.actions)}, a.percept_at(rng() % a.percept_count()));
  return h;
}

}  // namespace

TEST(JointProb, EmptyHistoryIsOne) {
  auto m = random_tabular_model(binary_obs(), 2, 3);
  EXPECT_EQ(joint_prob(*m, history{}), 1);
  auto mix = build_mixture(vm::enumerate_programs(8), binary_obs(), {8});
  EXPECT_EQ(joint_prob(*mix, history{}), mix->total_weight());
}

TEST(JointProb, DeterministicModelIsZeroOrOne) {
  alphabet a;
  auto m = constant_percept(a, percept{1, 0});
  history good;
  good.push({0}, percept{1, 0});
  good.push({1}, percept{1, 0});
  EXPECT_EQ(joint_prob(*m, good), 1);
  history bad = good;
  bad.push({0}, percept{0, 0});
  EXPECT_EQ(joint_prob(*m, bad), 0);
}

TEST(JointProb, TwoCycleTableIsProductOfEntries) {
  alphabet a;
  tabular_model m(a);
  m.set_row(history{}, {0}, {rational(3, 10), rational(7, 10)});
  history h1;
  h1.push({0}, percept{1, 0});
  m.set_row(h1, {1}, {rational(1, 4), rational(3, 4)});
  history h2 = h1;
  h2.push({1}, percept{0, 0});
  EXPECT_EQ(joint_prob(m, h2), rational(7, 40));
  EXPECT_EQ(cond_prob(m, history{}, {0}, percept{1, 0}), rational(7, 10));
}

TEST(CondProb, ZeroProbabilityContextThrows) {
  alphabet a;
  auto m = constant_percept(a, percept{1, 0});
  history bad;
  bad.push({0}, percept{0, 0});
  EXPECT_THROW(static_cast<void>(cond_prob(*m, bad, {0}, percept{0, 0})), undefined_conditional);
}

TEST(CondProb, ChainRuleOnRandomContexts) {
  auto a = binary_obs();
  a.actions = 3;
  auto m = random_tabular_model(a, 4, 11);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto h = random_history(a, rng() % 4, rng);
    if (joint_prob(*m, h) == 0) continue;
    action_symbol y{static_cast<std::uint32_t>(rng() % a.actions)};
    auto x = a.percept_at(rng() % a.percept_count());
    EXPECT_EQ(cond_prob(*m, h, y, x) * joint_prob(*m, h), joint_prob(*m, append_cycle(h, y, x)));
  }
}

TEST(Mixture, TwoDeterministicComponentsSplitTwoToOne) {
  alphabet a;
  semimeasure_mixture mix({{"one", rational(1, 2), constant_percept(a, percept{1, 0}), 1},
                           {"zero", rational(1, 4), constant_percept(a, percept{0, 0}), 2}});
  EXPECT_EQ(cond_prob(mix, history{}, {0}, percept{1, 0}), rational(2, 3));
  EXPECT_EQ(cond_prob(mix, history{}, {0}, percept{0, 0}), rational(1, 3));
  EXPECT_EQ(normalized_conditional(mix, history{}, {0}), (distribution{rational(1, 3), rational(2, 3)}));
  EXPECT_EQ(evidence_gap(mix, history{}, {0}), 0);
}

TEST(Mixture, RejectsBadWeights) {
  alphabet a;
  auto m = constant_percept(a, percept{0, 0});
  EXPECT_THROW(semimeasure_mixture({{"a", rational(3, 4), m, 0}, {"b", rational(1, 2), m, 0}}), structural_error);
  EXPECT_THROW(semimeasure_mixture({}), structural_error);
  EXPECT_THROW(build_mixture({}, a, {8}), structural_error);
}

TEST(CheckChronological, TabularModelsPass) {
  auto a = binary_obs();
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_TRUE(check_chronological(*random_tabular_model(a, 3, seed), 3));
}

TEST(CheckChronological, ActionDependentMarginalFails) {
  alphabet a;
  function_model leaky(a, [](const history&, action_symbol y) {
    return y.index == 0 ? distribution{rational(1, 2), rational(1, 2)} : distribution{rational(1, 4), rational(1, 4)};
  });
  EXPECT_FALSE(check_chronological(leaky, 1));
}

TEST(CheckChronological, ProgramMixturePasses) {
  auto mix = build_mixture(vm::enumerate_programs(8), binary_obs(), {8});
  EXPECT_TRUE(check_chronological(*mix, 3));
}

TEST(BuildMixture, SingletonPoolIsScaledProgramMeasure) {
  auto a = binary_obs();
  auto q = vm::assemble("RDO; END");
  auto mix = build_mixture({q}, a, {8});
  program_model pm(q, a, {8});
  for (std::size_t d = 0; d <= 3; ++d)
    for (const auto& h : all_histories(a, d)) EXPECT_EQ(mix->joint(h), dyadic_weight(q.length_bits()) * pm.joint(h));
}

TEST(BuildMixture, JointMatchesBruteForceReplay) {
  auto a = binary_obs();
  auto pool = vm::enumerate_programs(8);
  auto mix = build_mixture(pool, a, {8});
  for (std::size_t d = 0; d <= 3; ++d)
    for (const auto& h : all_histories(a, d)) EXPECT_EQ(mix->joint(h), oracle::mixture_joint(pool, h, a, {8}));
}

TEST(BuildMixture, SemimeasureAtEveryContext) {
  auto a = binary_obs();
  auto mix = build_mixture(vm::enumerate_programs(10), a, {12});
  for (std::size_t d = 0; d <= 4; ++d)
    for (const auto& h : all_histories(a, d)) {
      auto base = mix->joint(h);
      for (std::uint32_t y = 0; y < a.actions; ++y) {
        rational next = 0;
        for (std::size_t x = 0; x < a.percept_count(); ++x) next += mix->joint(append_cycle(h, {y}, a.percept_at(x)));
        EXPECT_LE(next, base);
      }
    }
}

TEST(Posterior, TruthKeepsItsPriorWeight) {
  auto a = binary_obs();
  auto pool = vm::enumerate_programs(10);
  auto mix = build_mixture(pool, a, {12});
  for (std::size_t t = 0; t < pool.size(); t += 3) {
    program_model truth(pool[t], a, {12});
    history h;
    for (std::uint32_t y : {1U, 0U, 1U, 1U}) {
      auto row = truth.conditional(h, {y});
      auto x = static_cast<std::size_t>(std::find(row.begin(), row.end(), rational(1)) - row.begin());
      h.push({y}, a.percept_at(x));
    }
    auto post = posterior(*mix, h);
    EXPECT_EQ(post.masses[t], mix->weight(t));
    rational sum = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      EXPECT_LE(post.masses[i], mix->weight(i));
      program_model comp(pool[i], a, {12});
      EXPECT_EQ(post.masses[i], mix->weight(i) * comp.joint(h));
      sum += post.masses[i];
    }
    EXPECT_EQ(sum, post.total);
  }
}

TEST(Posterior, PredictiveEqualsCondProbAndDominates) {
  auto a = binary_obs();
  auto pool = vm::enumerate_programs(9);
  auto mix = build_mixture(pool, a, {10});
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    auto h = random_history(a, rng() % 3, rng);
    if (mix->joint(h) == 0) {
      EXPECT_THROW(static_cast<void>(posterior(*mix, h)), undefined_conditional);
      continue;
    }
    auto post = posterior(*mix, h);
    action_symbol y{static_cast<std::uint32_t>(rng() % 2)};
    for (std::size_t x = 0; x < a.percept_count(); ++x) {
      rational predicting = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        program_model comp(pool[i], a, {10});
        if (post.masses[i] == 0) continue;
        auto c = comp.conditional(h, y)[x];
        predicting += post.masses[i] * c;
        EXPECT_GE(mix->conditional(h, y)[x], post.masses[i] * c / post.total);
      }
      EXPECT_EQ(predicting / post.total, cond_prob(*mix, h, y, a.percept_at(x)));
    }
  }
}

TEST(SqDistance, ZeroForSingletonMixtureOfTruth) {
  auto a = binary_obs();
  auto q = vm::assemble("RDO; WRS; END");
  auto mu = std::make_shared<program_model>(q, a, vm::run_budget{8});
  semimeasure_mixture own({{"self", rational(1), mu, q.length_bits()}});
  EXPECT_EQ(sq_distance_sum(own, *mu, [](const history&) { return action_symbol{1}; }, 5), 0);
}

TEST(SqDistance, NonDecreasingInN) {
  auto a = binary_obs();
  auto pool = vm::enumerate_programs(8);
  auto mix = build_mixture(pool, a, {8});
  program_model mu(pool[2], a, {8});
  action_rule pi = [](const history& h) { return action_symbol{static_cast<std::uint32_t>(h.size() % 2)}; };
  rational prev = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    auto s = sq_distance_sum(*mix, mu, pi, n);
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(TabularFormat, RoundTripsThroughText) {
  auto a = binary_obs();
  auto m = random_tabular_model(a, 2, 9);
  std::stringstream text;
  write_tabular_model(text, *m, 2);
  auto back = parse_tabular_model(text);
  for (std::size_t d = 0; d < 2; ++d)
    for (const auto& h : all_histories(a, d))
      for (std::uint32_t y = 0; y < 2; ++y) EXPECT_EQ(back->conditional(h, {y}), m->conditional(h, {y}));
}

TEST(TabularFormat, CollectsAllProblems) {
  std::istringstream text("actions 2\nrewards 1 0\nbogus 3\nrow y:0 => 1/2 1/4\n");
  try {
    static_cast<void>(parse_tabular_model(text));
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    EXPECT_GE(e.violations().size(), 2U);
  }
}

TEST(TabularModel, RejectsRowsNotSummingToOne) {
  tabular_model m(alphabet{});
  EXPECT_THROW(m.set_row(history{}, {0}, {rational(1, 2), rational(1, 4)}), structural_error);
  EXPECT_THROW(m.set_row(history{}, {5}, {rational(1, 2), rational(1, 2)}), structural_error);
}

TEST(MixtureCsv, ListsEveryComponent) {
  auto mix = build_mixture(vm::enumerate_programs(6), binary_obs(), {8});
  auto csv = mixture_csv(*mix, history{});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.rfind("component,code_bits,weight,mass\n", 0), 0U);
}
