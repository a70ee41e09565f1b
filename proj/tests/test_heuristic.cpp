#include <gtest/gtest.h>

#include "bsp/heuristic.hpp"
#include "oracles.hpp"

using namespace bsp;

namespace {

Cost regress_value(const ProblemContext& ctx, const std::string& spec, Formula node) {
  HeuristicEvaluator h(ctx, HeuristicSpec::parse(spec), Direction::kRegression);
  return h(node);
}

Cost progress_value(const ProblemContext& ctx, const std::string& spec, Formula node) {
  HeuristicEvaluator h(ctx, HeuristicSpec::parse(spec), Direction::kProgression);
  return h(node);
}

std::vector<std::string> action_names(const GraphDomain& d, const std::vector<std::uint32_t>& as) {
  std::vector<std::string> out;
  for (auto a : as) out.push_back(d.action(a).name);
  return out;
}

using Names = std::vector<std::string>;

}  // namespace

TEST(Spec, ParsesTaxonomy) {
  for (const char* s : {"zero", "card", "sg:rp", "sg:max", "sg1:level", "mg:rp:sum", "mg:rpu",
                        "mg:level", "lug:rp", "lug:level:fx-sx", "lug:sum:sum", "sg:level:dyx",
                        "mg:max:max:stx"}) {
    HeuristicSpec h = HeuristicSpec::parse(s);
    EXPECT_EQ(HeuristicSpec::parse(h.to_string()).to_string(), h.to_string()) << s;
  }
  EXPECT_EQ(HeuristicSpec::parse("mg:level").to_string(), "mg:level:max");
  EXPECT_EQ(HeuristicSpec::parse("lug:rp:fx").to_string(), "lug:rp:fx");
  EXPECT_EQ(HeuristicSpec::parse("lug:rp:fx-cx").to_string(), "lug:rp:fx-cx");
  EXPECT_EQ(HeuristicSpec::parse("lug:level:fx-sx").mutex,
            (MutexScheme{MutexDepth::kFull, MutexWorlds::kSame}));
  EXPECT_EQ(HeuristicSpec::parse("mg:rpu").agg, Aggregation::kUnion);
  EXPECT_FALSE(HeuristicSpec::parse("lug:rp").mutex.enabled());
  for (const char* s : {"sg:rp:sum", "lug:rp:sum", "mg:rpu:max", "card:fx", "zero:1", "foo",
                        "mg", "mg:avg", "lug:level:min", "lug:level:fx-zz", "sg1:rpu",
                        "mg:rp:sum:fx:max", "lug:rpu"})
    EXPECT_THROW(HeuristicSpec::parse(s), SpecError) << s;
}

TEST(Merge, UnionOfAlignedPlans) {
  std::vector<std::vector<std::vector<std::uint32_t>>> plans{{{1, 2}, {5}, {6, 7}},
                                                             {{1, 7}, {3}}};
  auto start = merge_plans(plans, Direction::kProgression);
  EXPECT_EQ(count_actions(start), 7u);
  EXPECT_EQ(start[0], (std::vector<std::uint32_t>{1, 2, 7}));
  auto end = merge_plans(plans, Direction::kRegression);
  EXPECT_EQ(end[0], (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(end[1], (std::vector<std::uint32_t>{1, 5, 7}));
  EXPECT_EQ(count_actions(end), 8u);
  EXPECT_EQ(count_actions(merge_plans({plans[0], plans[0]}, Direction::kRegression)), 5u);
  EXPECT_TRUE(merge_plans({}, Direction::kRegression).empty());
}

TEST(Snapshot, CbtcGoalValues) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  Formula g = ctx.goal();
  EXPECT_EQ(regress_value(ctx, "zero", g), 0);
  EXPECT_EQ(regress_value(ctx, "card", g), 4);
  EXPECT_EQ(regress_value(ctx, "sg:rp", g), 2);
  EXPECT_EQ(regress_value(ctx, "sg:max", g), 2);
  EXPECT_EQ(regress_value(ctx, "sg:sum", g), 3);
  EXPECT_EQ(regress_value(ctx, "mg:rp:max", g), 2);
  EXPECT_EQ(regress_value(ctx, "mg:rp:sum", g), 4);
  EXPECT_EQ(regress_value(ctx, "mg:rpu", g), 3);
  EXPECT_EQ(regress_value(ctx, "lug:rp", g), 3);
  EXPECT_EQ(regress_value(ctx, "lug:level", g), 2);
  EXPECT_EQ(regress_value(ctx, "lug:level:fx-sx", g), 3);
  EXPECT_EQ(regress_value(ctx, "lug:level:fx", g), 3);
  // Pairing worlds finds that one plan cannot disarm in both worlds that early.
  EXPECT_EQ(regress_value(ctx, "lug:level:fx-cx", g), 4);
  EXPECT_EQ(regress_value(ctx, "lug:level:dyx-sx", g), 3);
  EXPECT_EQ(regress_value(ctx, "lug:level:stx-sx", g), 2);
  EXPECT_EQ(regress_value(ctx, "mg:level:max:fx", g), 3);
  // Solved beliefs cost nothing.
  for (const char* s : {"card", "sg:rp", "mg:rpu", "lug:rp", "lug:level:fx"})
    EXPECT_EQ(regress_value(ctx, s, ctx.init()), 0) << s;
}

TEST(Snapshot, CbtcRelaxedPlans) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  FormulaStore& st = ctx.store();
  GraphDomain d(p);

  SingleGraph sg(d, literal_codes(aggregate_state(st, ctx.init())));
  RelaxedPlan a = sg_relaxed_plan(sg, st, ctx.goal());
  ASSERT_EQ(a.level, 2);
  EXPECT_EQ(action_names(d, a.actions[0]), (Names{"Flush"}));
  EXPECT_EQ(action_names(d, a.actions[1]), (Names{"DunkP1"}));

  Lug lug(d, st, ctx.init());
  RelaxedPlan b = lug_relaxed_plan(lug, ctx.goal());
  ASSERT_EQ(b.level, 2);
  EXPECT_EQ(action_names(d, b.actions[0]), (Names{"Flush"}));
  EXPECT_EQ(action_names(d, b.actions[1]), (Names{"DunkP1", "DunkP2"}));
  EXPECT_EQ(b.value(), 3);
  EXPECT_EQ(b.action_need[0].begin()->second, ctx.init());
  EXPECT_EQ(b.effect_need[1].size(), 3u);  // two dunks and the persisting not-clog
}

// Properties of uncertainty-graph relaxed plans.
TEST(LugPlan, NeedLabelsAreSoundAndCover) {
  std::mt19937 rng(5);
  for (const char* spec : {"bt:3", "btc:3", "cbtc", "ring:2", "cube:3"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    FormulaStore& st = ctx.store();
    GraphDomain d(p);
    auto univ = oracle::reachable_states(ctx);
    for (int it = 0; it < 6; ++it) {
      Formula bs = oracle::random_belief(st, rng, univ, 0.2);
      Lug lug(d, st, bs);
      RelaxedPlan rp = lug_relaxed_plan(lug, ctx.goal());
      if (!rp.reachable) continue;
      std::size_t counted = 0;
      for (int k = 0; k < rp.level; ++k) {
        const auto K = static_cast<std::size_t>(k);
        for (const auto& [e, n] : rp.effect_need[K]) ASSERT_TRUE(st.entails(n, lug.effect_label(k, e)));
        for (const auto& [a, n] : rp.action_need[K]) {
          ASSERT_TRUE(st.entails(n, lug.action_label(k, a)));
          if (!d.is_persistence(a)) ++counted;
        }
        for (const auto& [l, n] : rp.literal_need[K + 1]) {
          ASSERT_TRUE(st.entails(n, lug.literal_label(k + 1, l)));
          if (k + 1 == rp.level) continue;
          Formula support = st.bottom();
          for (const auto& [e, m] : rp.effect_need[K]) {
            const auto& cons = d.effect(e).consequent;
            if (std::find(cons.begin(), cons.end(), l) != cons.end()) support = support | m;
          }
          ASSERT_TRUE(st.entails(n, support)) << spec << " " << d.literal_name(l);
        }
      }
      for (const Clause& c : st.to_clauses(ctx.goal())) {
        Formula support = st.bottom();
        const auto top = static_cast<std::size_t>(rp.level - 1);
        if (rp.level == 0) continue;
        for (const auto& [e, m] : rp.effect_need[top])
          for (Literal l : c) {
            const auto& cons = d.effect(e).consequent;
            if (std::find(cons.begin(), cons.end(), l.code()) != cons.end()) support = support | m;
          }
        ASSERT_TRUE(st.entails(lug.projected(), support)) << spec;
      }
      EXPECT_EQ(static_cast<Cost>(counted), rp.value());
    }
  }
}

// The uncertainty graph read per world is the set of single graphs, so its
// positive-interaction and independence measures coincide with those of the
// multiple graphs when both see the same mutexes. The one exception is the sum
// of clause costs, which the uncertainty graph maximises per clause.
TEST(Equivalence, LugMatchesMultipleGraphs) {
  std::mt19937 rng(11);
  for (const char* spec : {"bt:3", "btc:3", "cbtc", "ring:2", "btcs:2"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    FormulaStore& st = ctx.store();
    auto univ = oracle::reachable_states(ctx);
    for (int it = 0; it < 6; ++it) {
      Formula bs = oracle::random_belief(st, rng, univ, 0.2);
      for (const char* m : {"", ":dyx-sx", ":fx-sx"})
        for (const char* kind : {"level:max", "max:max", "sum:max", "level:sum", "max:sum",
                                 "sum:sum"}) {
          // Summing worst clause costs bounds the worst per-world sum from above.
          const bool upper = std::string(kind) == "sum:max";
          if (*m && std::string(kind).rfind("level", 0) != 0) continue;
          std::string lug = std::string("lug:") + kind + m;
          std::string mg = std::string("mg:") + kind + m;
          if (upper)
            EXPECT_GE(progress_value(ctx, lug, bs), progress_value(ctx, mg, bs)) << spec;
          else
            EXPECT_EQ(progress_value(ctx, lug, bs), progress_value(ctx, mg, bs)) << spec << " " << lug;
        }
    }
  }
}

TEST(Equivalence, SingleGraphCostsMatchRelaxedLayers) {
  std::mt19937 rng(13);
  for (const char* spec : {"btc:3", "ring:2", "cube:3"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    FormulaStore& st = ctx.store();
    GraphDomain d(p);
    auto univ = oracle::reachable_states(ctx);
    for (int it = 0; it < 5; ++it) {
      Formula bs = oracle::random_belief(st, rng, univ, 0.2);
      auto init = literal_codes(aggregate_state(st, bs));
      SingleGraph g(d, init);
      auto layers = oracle::relaxed_layers(p, {init.begin(), init.end()}, 40);
      auto first = [&](std::uint32_t l) -> Cost {
        for (std::size_t k = 0; k < layers.size(); ++k)
          if (layers[k].count(l)) return static_cast<Cost>(k);
        return kInfinity;
      };
      for (const Clause& c : st.to_clauses(ctx.goal())) {
        Cost ref = kInfinity;
        for (Literal l : c) ref = std::min(ref, first(l.code()));
        EXPECT_EQ(clause_cost(g, c), ref);
      }
      for (const Cube& c : st.to_constituents(ctx.goal())) {
        Cost ref = 0;
        for (Literal l : c) ref = std::max(ref, first(l.code()));
        EXPECT_EQ(constituent_level(g, c), ref);
      }
    }
  }
}

TEST(Equivalence, LugPlanMatchesUnionOnBt) {
  for (int n = 2; n <= 6; ++n) {
    Problem p = gen_bt(n);
    ProblemContext ctx(p);
    EXPECT_EQ(progress_value(ctx, "lug:rp", ctx.init()), n);
    EXPECT_EQ(progress_value(ctx, "mg:rpu", ctx.init()), n);
    EXPECT_EQ(regress_value(ctx, "lug:rp", ctx.goal()), regress_value(ctx, "mg:rpu", ctx.goal()));
  }
}

TEST(Heuristic, SchemeDepthNeverLowersLevel) {
  std::mt19937 rng(19);
  for (const char* spec : {"btc:3", "cbtc", "ring:2"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    auto univ = oracle::reachable_states(ctx);
    for (int it = 0; it < 5; ++it) {
      Formula bs = oracle::random_belief(ctx.store(), rng, univ, 0.2);
      for (const char* sub : {"sg:level", "mg:level:max", "lug:level"}) {
        Cost prev = 0;
        for (const char* m : {"nx", "stx", "dyx", "fx"}) {
          std::string s = std::string(sub) + ":" + m + (std::string(sub) == "lug:level" ? "-sx" : "");
          Cost v = progress_value(ctx, s, bs);
          EXPECT_GE(v, prev) << spec << " " << s;
          prev = v;
        }
      }
    }
  }
}

TEST(Heuristic, RelaxedPlanAggregationsAreOrdered) {
  std::mt19937 rng(29);
  for (const char* spec : {"bt:4", "btc:3", "cbtc"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    auto univ = oracle::reachable_states(ctx);
    for (int it = 0; it < 8; ++it) {
      Formula bs = oracle::random_belief(ctx.store(), rng, univ, 0.3);
      Cost mx = progress_value(ctx, "mg:rp:max", bs);
      Cost un = progress_value(ctx, "mg:rpu", bs);
      Cost sm = progress_value(ctx, "mg:rp:sum", bs);
      EXPECT_LE(mx, un);
      EXPECT_LE(un, sm);
    }
  }
}

TEST(Heuristic, SamplingIsDeterministic) {
  Problem p = gen_bt(8);
  ProblemContext ctx(p);
  for (const char* s : {"sg1:rp", "mg:rp:sum", "lug:rp"}) {
    HeuristicSpec spec = HeuristicSpec::parse(s);
    spec.fraction = std::string(s) == "sg1:rp" ? 1.0 : 0.4;
    spec.seed = 7;
    HeuristicEvaluator a(ctx, spec, Direction::kProgression);
    HeuristicEvaluator b(ctx, spec, Direction::kProgression);
    EXPECT_EQ(a(ctx.init()), b(ctx.init())) << s;
  }
  HeuristicSpec part = HeuristicSpec::parse("mg:rp:sum");
  part.fraction = 0.4;
  EXPECT_EQ(HeuristicEvaluator(ctx, part, Direction::kProgression)(ctx.init()), 4);
  HeuristicSpec full = HeuristicSpec::parse("lug:rp");
  full.fraction = 1.0;
  EXPECT_EQ(HeuristicEvaluator(ctx, full, Direction::kProgression)(ctx.init()), 8);
  part.fraction = 0;
  EXPECT_THROW(HeuristicEvaluator(ctx, part, Direction::kProgression), SpecError);
}

TEST(Heuristic, UnreachableGoalIsInfinite) {
  Problem p = parse_problem(R"((define (problem stuck)
    (:fluents a b)
    (:action set-a :effect a)
    (:init (and (not a) (not b)))
    (:goal b)))");
  ProblemContext ctx(p);
  for (const char* s : {"sg:rp", "sg:level", "mg:rpu", "mg:max:sum", "lug:rp", "lug:level:fx",
                        "lug:sum:sum"})
    EXPECT_EQ(progress_value(ctx, s, ctx.init()), kInfinity) << s;
  EXPECT_EQ(progress_value(ctx, "card", ctx.init()), 1);
}
