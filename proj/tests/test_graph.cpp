#include <gtest/gtest.h>

#include "bsp/graph.hpp"
#include "oracles.hpp"

using namespace bsp;

namespace {

std::uint32_t code(const Problem& p, const std::string& name, bool positive = true) {
  for (std::size_t i = 0; i < p.fluents.size(); ++i)
    if (p.fluents[i] == name) return Literal{static_cast<FluentId>(i), positive}.code();
  throw std::logic_error("no fluent " + name);
}

std::vector<std::uint32_t> state_codes(const State& s) {
  auto lits = s.literals();
  return literal_codes(lits);
}

const char* kDomains[] = {"bt:3", "btc:3", "cbtc", "ring:2", "btcs:2", "cube:3"};

}  // namespace

TEST(Graph, SingleGraphLayersMatchRelaxedReachability) {
  std::mt19937 rng(3);
  for (const char* spec : kDomains) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    GraphDomain d(p);
    auto univ = oracle::reachable_states(ctx);
    for (int iter = 0; iter < 10; ++iter) {
      const State& s = univ[rng() % univ.size()];
      auto init = state_codes(s);
      SingleGraph g(d, init);
      auto ref = oracle::relaxed_layers(p, {init.begin(), init.end()}, g.last_level() + 2);
      for (int k = 0; k <= g.last_level() + 2; ++k)
        for (std::uint32_t l = 0; l < d.num_literals(); ++l)
          ASSERT_EQ(g.has_literal(k, l), ref[static_cast<std::size_t>(k)].count(l) > 0)
              << spec << " level " << k;
      EXPECT_FALSE(g.truncated());
    }
  }
}

TEST(Graph, CbtcLabels) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  FormulaStore& st = ctx.store();
  GraphDomain d(p);
  Lug lug(d, st, ctx.init());
  const std::uint32_t nclog = code(p, "clog", false), narm = code(p, "arm", false);
  EXPECT_TRUE(lug.literal_label(0, nclog).is_false());
  EXPECT_EQ(lug.literal_label(1, nclog), ctx.init());
  EXPECT_TRUE(lug.literal_label(1, narm).is_false());
  EXPECT_EQ(lug.literal_label(2, narm), ctx.init());
  EXPECT_EQ(lug.literal_label(2, code(p, "inP1")), ctx.init() & st.parse("inP1"));

  // Extended labels.
  EXPECT_EQ(lug.extended_label(0, Expr::top()), ctx.init());
  EXPECT_TRUE(lug.extended_label(0, Expr::bottom()).is_false());
  EXPECT_EQ(lug.extended_label(2, parse_expr("(and (not arm) (not clog))")), ctx.init());
  EXPECT_TRUE(lug.extended_label(1, parse_expr("(and (not arm) (not clog))")).is_false());
  Expr taut = parse_expr("(or inP1 (not inP1))");
  EXPECT_EQ(lug.extended_label(0, taut),
            lug.literal_label(0, code(p, "inP1")) | lug.literal_label(0, code(p, "inP1", false)));
  EXPECT_NE(lug.dump().find("level 2"), std::string::npos);
}

TEST(Graph, AggregateState) {
  FormulaStore st({"p", "q"});
  auto agg = aggregate_state(st, st.parse("(and p (or q (not q)))"));
  EXPECT_EQ(agg, (std::vector<Literal>{{0, true}}));
  Problem c = gen_cbtc();
  ProblemContext ctx(c);
  EXPECT_EQ(aggregate_state(ctx.store(), ctx.init()).size(), 6u);
}

TEST(Graph, Sampling) {
  FormulaStore st({"a", "b", "c", "d"});
  Formula all = st.top();
  auto s1 = sample_states(st, all, 0.3, 42);
  auto s2 = sample_states(st, all, 0.3, 42);
  EXPECT_EQ(s1.size(), 5u);
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(std::set<State>(s1.begin(), s1.end()).size(), 5u);
  for (const State& s : s1) EXPECT_TRUE(st.eval(all, s));
  EXPECT_EQ(sample_states(st, all, 1.0, 1), st.models(all));
  EXPECT_EQ(sample_states(st, st.parse("(and a b c d)"), 0.01, 9).size(), 1u);
  EXPECT_THROW(sample_states(st, all, 0.0, 1), std::invalid_argument);
  bool differs = false;
  for (std::uint64_t seed = 1; seed < 20 && !differs; ++seed)
    differs = sample_states(st, all, 0.3, seed) != s1;
  EXPECT_TRUE(differs);
}

// Every element label, read in one world, equals membership in that world's graph.
TEST(Graph, LugAgreesWithPerWorldGraphs) {
  std::mt19937 rng(17);
  for (const char* spec : kDomains) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    FormulaStore& st = ctx.store();
    GraphDomain d(p);
    auto univ = oracle::reachable_states(ctx);
    std::vector<Formula> beliefs{ctx.init()};
    for (int i = 0; i < 3; ++i) beliefs.push_back(oracle::random_belief(st, rng, univ, 0.2));
    for (Formula bs : beliefs) {
      Lug lug(d, st, bs);
      GraphSet mg(d, st.models(bs));
      for (std::size_t w = 0; w < mg.size(); ++w) {
        const SingleGraph& g = mg.graph(w);
        const State& s = mg.world(w);
        const int top = std::max(lug.last_level(), g.last_level()) + 1;
        for (int k = 0; k <= top; ++k) {
          for (std::uint32_t l = 0; l < d.num_literals(); ++l)
            ASSERT_EQ(st.eval(lug.literal_label(k, l), s), g.has_literal(k, l)) << spec;
          for (std::uint32_t a = 0; a < d.num_actions(); ++a)
            ASSERT_EQ(st.eval(lug.action_label(k, a), s), g.has_action(k, a)) << spec;
          for (std::uint32_t e = 0; e < d.num_effects(); ++e)
            ASSERT_EQ(st.eval(lug.effect_label(k, e), s), g.has_effect(k, e)) << spec;
        }
      }
    }
  }
}

TEST(Graph, LevelCapTruncates) {
  Problem p = gen_ring(3);
  ProblemContext ctx(p);
  GraphDomain d(p);
  Lug lug(d, ctx.store(), ctx.init(), {}, 1);
  EXPECT_TRUE(lug.truncated());
  EXPECT_EQ(lug.last_level(), 1);
  Lug full(d, ctx.store(), ctx.init());
  EXPECT_FALSE(full.truncated());
}

// ---------------------------------------------------------------- mutexes

class MutexAgreement : public ::testing::TestWithParam<MutexDepth> {};

TEST_P(MutexAgreement, SameWorldLabelsMatchPerWorldGraphs) {
  const MutexDepth depth = GetParam();
  std::mt19937 rng(23);
  for (const char* spec : {"bt:3", "btc:3", "cbtc", "ring:2"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    FormulaStore& st = ctx.store();
    GraphDomain d(p);
    auto univ = oracle::reachable_states(ctx);
    std::vector<Formula> beliefs{ctx.init(), oracle::random_belief(st, rng, univ, 0.15)};
    for (Formula bs : beliefs) {
      Lug lug(d, st, bs, MutexScheme{depth, MutexWorlds::kSame});
      GraphSet mg(d, st.models(bs), depth);
      for (std::size_t w = 0; w < mg.size(); ++w) {
        const SingleGraph& g = mg.graph(w);
        const State& s = mg.world(w);
        const int top = std::max(lug.last_level(), g.last_level()) + 1;
        for (int k = 0; k <= top; ++k) {
          for (std::uint32_t a = 0; a < d.num_literals(); ++a)
            for (std::uint32_t b = a + 1; b < d.num_literals(); ++b) {
              if (!g.has_literal(k, a) || !g.has_literal(k, b)) continue;
              ASSERT_EQ(st.eval(lug.literal_mutex(k, a, b), s), g.literals_mutex(k, a, b))
                  << spec << " k=" << k << " " << d.literal_name(a) << "/" << d.literal_name(b);
            }
          for (std::uint32_t a = 0; a < d.num_actions(); ++a)
            for (std::uint32_t b = a + 1; b < d.num_actions(); ++b) {
              if (!g.has_action(k, a) || !g.has_action(k, b)) continue;
              ASSERT_EQ(st.eval(lug.action_mutex(k, a, b), s), g.actions_mutex(k, a, b)) << spec;
            }
          for (std::uint32_t a = 0; a < d.num_effects(); ++a)
            for (std::uint32_t b = a + 1; b < d.num_effects(); ++b) {
              if (!g.has_effect(k, a) || !g.has_effect(k, b)) continue;
              ASSERT_EQ(st.eval(lug.effect_mutex(k, a, b), s), g.effects_mutex(k, a, b)) << spec;
            }
        }
      }
    }
  }
}

// A literal pair mutex at level k never co-occurs in a state reachable in k steps.
TEST_P(MutexAgreement, SingleGraphMutexesAreSound) {
  const MutexDepth depth = GetParam();
  for (const char* spec : {"bt:3", "btc:3", "cbtc", "ring:2", "cube:3"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    GraphDomain d(p);
    for (const State& s : oracle::reachable_states(ctx)) {
      SingleGraph g(d, state_codes(s), depth);
      auto dist = oracle::state_distances(p, s);
      for (const auto& [t, k] : dist) {
        auto lits = state_codes(t);
        for (std::size_t i = 0; i < lits.size(); ++i)
          for (std::size_t j = i + 1; j < lits.size(); ++j)
            ASSERT_FALSE(g.literals_mutex(k, lits[i], lits[j]))
                << spec << " " << d.literal_name(lits[i]) << "/" << d.literal_name(lits[j]);
      }
    }
  }
}

std::string depth_name(const ::testing::TestParamInfo<MutexDepth>& info) {
  return MutexScheme{info.param, MutexWorlds::kSame}.to_string();
}

INSTANTIATE_TEST_SUITE_P(Depths, MutexAgreement,
                         ::testing::Values(MutexDepth::kStatic, MutexDepth::kDynamic,
                                           MutexDepth::kFull),
                         depth_name);

TEST(Mutex, SchemesAreMonotone) {
  Problem p = gen_btc(3);
  ProblemContext ctx(p);
  GraphDomain d(p);
  for (const State& s : ctx.store().models(ctx.init())) {
    auto init = state_codes(s);
    std::vector<SingleGraph> gs;
    for (MutexDepth m : {MutexDepth::kNone, MutexDepth::kStatic, MutexDepth::kDynamic,
                         MutexDepth::kFull})
      gs.emplace_back(d, init, m);
    for (std::size_t i = 0; i + 1 < gs.size(); ++i)
      for (int k = 0; k <= 8; ++k) {
        for (auto key : gs[i].layer(k).lit_mutex.raw())
          EXPECT_TRUE(gs[i + 1].layer(k).lit_mutex.raw().count(key));
        for (auto key : gs[i].layer(k).eff_mutex.raw())
          EXPECT_TRUE(gs[i + 1].layer(k).eff_mutex.raw().count(key));
      }
  }
}

TEST(Mutex, SchemeParsing) {
  EXPECT_EQ(MutexScheme::parse("fx-sx"), (MutexScheme{MutexDepth::kFull, MutexWorlds::kSame}));
  EXPECT_EQ(MutexScheme::parse("dyx"), (MutexScheme{MutexDepth::kDynamic, MutexWorlds::kSame}));
  EXPECT_EQ(MutexScheme::parse("dyx-cx"), (MutexScheme{MutexDepth::kDynamic, MutexWorlds::kCross}));
  EXPECT_EQ(MutexScheme::parse("fx-sx").to_string(), "fx");
  EXPECT_EQ(MutexScheme::parse("stx-ix").to_string(), "stx-ix");
  EXPECT_EQ(MutexScheme::parse("nx").to_string(), "nx");
  EXPECT_THROW(MutexScheme::parse("zx"), std::invalid_argument);
  EXPECT_THROW(MutexScheme::parse("fx-qq"), std::invalid_argument);
}

TEST(Mutex, CbtcGoalLiteralsMutexAtLevelTwo) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  GraphDomain d(p);
  const std::uint32_t nclog = code(p, "clog", false), narm = code(p, "arm", false);
  for (MutexDepth depth : {MutexDepth::kDynamic, MutexDepth::kFull}) {
    Lug lug(d, ctx.store(), ctx.init(), {depth, MutexWorlds::kSame});
    EXPECT_EQ(lug.literal_mutex(2, narm, nclog), ctx.init());
    EXPECT_TRUE(lug.literal_mutex(3, narm, nclog).is_false());
  }
  Lug stat(d, ctx.store(), ctx.init(), {MutexDepth::kStatic, MutexWorlds::kSame});
  EXPECT_TRUE(stat.literal_mutex(2, narm, nclog).is_false());
}

TEST(Mutex, CrossWorldDiagonalMatchesSameWorld) {
  Problem p = gen_btc(2);
  ProblemContext ctx(p);
  GraphDomain d(p);
  for (MutexWorlds w : {MutexWorlds::kIntersect, MutexWorlds::kCross}) {
    Lug cross(d, ctx.store(), ctx.init(), {MutexDepth::kFull, w});
    Lug same(d, ctx.store(), ctx.init(), {MutexDepth::kFull, MutexWorlds::kSame});
    ASSERT_EQ(cross.worlds().size(), 2u);
    for (int k = 0; k <= 4; ++k) {
      EXPECT_TRUE(cross.layer(k).lit_mutex == same.layer(k).lit_mutex);
      for (std::uint32_t l = 0; l < d.num_literals(); ++l)
        EXPECT_EQ(cross.literal_label(k, l), same.literal_label(k, l));
    }
  }
}

TEST(Mutex, CrossWorldPairsOnCbtc) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  GraphDomain d(p);
  Lug lug(d, ctx.store(), ctx.init(), {MutexDepth::kFull, MutexWorlds::kCross});
  const std::uint32_t narm = code(p, "arm", false), nclog = code(p, "clog", false);
  // Disarming in one world while leaving the toilet unclogged in the other is not
  // possible after two steps.
  EXPECT_TRUE(lug.literal_cross(2, narm, 0, nclog, 1));
  EXPECT_FALSE(lug.literal_cross(4, narm, 0, nclog, 1));
}
