#include <gtest/gtest.h>

#include "bsp/search.hpp"
#include "oracles.hpp"

using namespace bsp;

namespace {

std::string source(const std::string& rel) { return std::string(BSP_SOURCE_DIR) + "/" + rel; }

std::vector<std::string> names(const Problem& p, const std::vector<std::size_t>& acts) {
  std::vector<std::string> out;
  for (auto a : acts) out.push_back(p.actions[a].name);
  return out;
}

using Names = std::vector<std::string>;
using Trace = std::vector<std::pair<std::string, Cost>>;

SearchResult run(const ProblemContext& ctx, const std::string& spec, Direction dir,
                 double weight, Trace* trace = nullptr) {
  HeuristicEvaluator h(ctx, HeuristicSpec::parse(spec), dir);
  SearchOptions opt;
  opt.weight = weight;
  if (trace) opt.trace = [trace](const std::string& a, Cost c) { trace->emplace_back(a, c); };
  return dir == Direction::kRegression ? astar_regress(ctx, h, opt) : aostar_progress(ctx, h, opt);
}

}  // namespace

TEST(AStar, BtcRegressionPlan) {
  Problem p = load_problem(source("problems/btc.bsp"));
  ProblemContext ctx(p);
  SearchResult r = run(ctx, "zero", Direction::kRegression, 5);
  ASSERT_EQ(r.status, Status::kSolved);
  EXPECT_EQ(names(p, r.plan.actions()), (Names{"DunkP2", "Flush", "DunkP1"}));
  Validation v = validate(ctx, r.plan);
  EXPECT_TRUE(v.valid) << v.message;
  EXPECT_EQ(v.max_length, 3);
  EXPECT_EQ(r.plan.to_string(p), "DunkP2\nFlush\nDunkP1\n");
}

TEST(AStar, SolvedInitialBeliefGivesEmptyPlan) {
  Problem p = parse_problem(R"((define (problem done)
    (:fluents a) (:action flip :effect (not a)) (:init a) (:goal a)))");
  ProblemContext ctx(p);
  for (Direction d : {Direction::kRegression, Direction::kProgression}) {
    SearchResult r = run(ctx, "lug:rp", d, 5);
    ASSERT_EQ(r.status, Status::kSolved);
    EXPECT_TRUE(r.plan.empty());
    EXPECT_EQ(r.plan.depth(), 0);
    EXPECT_TRUE(validate(ctx, r.plan).valid);
  }
}

TEST(AStar, RejectsSensingActions) {
  Problem p = load_problem(source("problems/btcs.bsp"));
  ProblemContext ctx(p);
  EXPECT_THROW(run(ctx, "zero", Direction::kRegression, 1), std::invalid_argument);
}

TEST(AStar, CbtcWithRelaxedPlanHeuristic) {
  Problem p = gen_cbtc();
  ProblemContext ctx(p);
  SearchResult r = run(ctx, "lug:rp", Direction::kRegression, 5);
  ASSERT_EQ(r.status, Status::kSolved);
  Validation v = validate(ctx, r.plan);
  EXPECT_TRUE(v.valid) << v.message;
  EXPECT_EQ(v.max_length, 5);
}

TEST(AoStar, ConformantTraceAndPlan) {
  Problem p = load_problem(source("problems/btc.bsp"));
  ProblemContext ctx(p);
  Trace t;
  SearchResult r = run(ctx, "zero", Direction::kProgression, 5, &t);
  ASSERT_EQ(r.status, Status::kSolved);
  EXPECT_EQ(names(p, r.plan.actions()), (Names{"DunkP2", "Flush", "DunkP1"}));
  EXPECT_EQ(t, (Trace{{"DunkP1", 1}, {"DunkP2", 1}, {"DunkP1", 2}, {"DunkP2", 2}, {"DunkP2", 3}}));
  EXPECT_EQ(r.root_cost, 3);
  EXPECT_TRUE(r.revision_stable);
}

TEST(AoStar, ConditionalTraceAndPlan) {
  Problem p = load_problem(source("problems/btcs.bsp"));
  ProblemContext ctx(p);
  Trace t;
  SearchResult r = run(ctx, "zero", Direction::kProgression, 5, &t);
  ASSERT_EQ(r.status, Status::kSolved);
  EXPECT_EQ(t, (Trace{{"DunkP1", 1}, {"DunkP2", 1}, {"DetectMetal", 1}, {"DetectMetal", 1.5},
                      {"DetectMetal", 2}}));
  EXPECT_EQ(r.root_cost, 2);
  EXPECT_TRUE(r.plan.conditional());
  const PlanNode& root = r.plan.nodes[0];
  EXPECT_EQ(p.actions[root.action].name, "DetectMetal");
  ASSERT_EQ(root.branches.size(), 2u);
  Validation v = validate(ctx, r.plan);
  EXPECT_TRUE(v.valid) << v.message;
  EXPECT_EQ(v.max_length, 2);
  EXPECT_EQ(r.plan.depth(), 2);
  for (const auto& [reading, child] : root.branches) {
    const PlanNode& n = r.plan.nodes[child];
    std::string want = to_string(p.actions[root.action].observations[reading]) == "inP1" ? "DunkP1"
                                                                                         : "DunkP2";
    EXPECT_EQ(p.actions[n.action].name, want);
  }
  EXPECT_EQ(r.plan.to_string(p), "DetectMetal\nobs inP1:\n  DunkP1\nobs (not inP1):\n  DunkP2\n");
}

TEST(Validate, ReportsFailures) {
  Problem p = gen_btc(2);
  ProblemContext ctx(p);
  Validation empty = validate(ctx, Plan::sequence({}));
  EXPECT_FALSE(empty.valid);
  ASSERT_TRUE(empty.witness.has_value());
  EXPECT_TRUE(ctx.store().eval(ctx.init(), *empty.witness));
  const auto d1 = static_cast<std::size_t>(p.find_action("DunkP1"));
  const auto d2 = static_cast<std::size_t>(p.find_action("DunkP2"));
  const auto fl = static_cast<std::size_t>(p.find_action("Flush"));
  EXPECT_FALSE(validate(ctx, Plan::sequence({d1, d2})).valid);  // second dunk into a clog
  EXPECT_TRUE(validate(ctx, Plan::sequence({d1, fl, d2})).valid);
  EXPECT_FALSE(validate(ctx, Plan::sequence({d1, fl})).valid);
}

TEST(Oracle, KnownOptima) {
  {
    Problem p = gen_cbtc();
    EXPECT_EQ(bfs_oracle(ProblemContext(p)), 5);
  }
  for (int n = 2; n <= 4; ++n) {
    Problem bt = gen_bt(n), btc = gen_btc(n);
    EXPECT_EQ(bfs_oracle(ProblemContext(bt)), n);
    EXPECT_EQ(bfs_oracle(ProblemContext(btc)), 2 * n - 1);
  }
  for (int n = 2; n <= 3; ++n) {
    Problem r = gen_ring(n);
    EXPECT_EQ(bfs_oracle(ProblemContext(r)), 3 * n - 1);
  }
  Problem s = load_problem(source("problems/btcs.bsp"));
  EXPECT_EQ(bfs_oracle(ProblemContext(s)), 2);
  Problem bts = gen_bts(3);
  EXPECT_EQ(bfs_oracle(ProblemContext(bts)), 3);  // sense one package, then two dunks
  Problem stuck = parse_problem(R"((define (problem stuck)
    (:fluents a b) (:action set-a :effect a) (:init (not a)) (:goal b)))");
  EXPECT_EQ(bfs_oracle(ProblemContext(stuck)), std::nullopt);
  Problem big = gen_btc(6);
  EXPECT_THROW(bfs_oracle(ProblemContext(big), 10), CapExceeded);
}

TEST(Search, UnsolvableAndTimeout) {
  Problem stuck = parse_problem(R"((define (problem stuck)
    (:fluents a b) (:action set-a :effect a) (:init (not a)) (:goal b)))");
  ProblemContext ctx(stuck);
  for (Direction d : {Direction::kRegression, Direction::kProgression})
    for (const char* s : {"zero", "lug:rp"}) EXPECT_EQ(run(ctx, s, d, 5).status, Status::kUnsolvable);

  Problem big = gen_btc(12);
  ProblemContext bctx(big);
  HeuristicEvaluator h(bctx, HeuristicSpec::parse("zero"), Direction::kProgression);
  SearchOptions opt;
  opt.deadline = Deadline(0.0);
  EXPECT_EQ(aostar_progress(bctx, h, opt).status, Status::kTimeout);
  HeuristicEvaluator h2(bctx, HeuristicSpec::parse("zero"), Direction::kRegression);
  EXPECT_EQ(astar_regress(bctx, h2, opt).status, Status::kTimeout);
}

// With an admissible heuristic and weight one both searches are optimal.
TEST(Search, OptimalWithAdmissibleHeuristic) {
  for (const char* spec : {"bt:2", "bt:4", "btc:2", "btc:3", "ring:2", "cbtc"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    auto best = bfs_oracle(ctx);
    ASSERT_TRUE(best.has_value());
    for (Direction d : {Direction::kRegression, Direction::kProgression}) {
      SearchResult r = run(ctx, "mg:level:max", d, 1);
      ASSERT_EQ(r.status, Status::kSolved) << spec;
      Validation v = validate(ctx, r.plan);
      EXPECT_TRUE(v.valid) << spec << ": " << v.message;
      EXPECT_EQ(v.max_length, *best) << spec;
    }
  }
}

TEST(Search, Deterministic) {
  Problem p = gen_btc(4);
  ProblemContext ctx(p);
  for (Direction d : {Direction::kRegression, Direction::kProgression}) {
    SearchResult a = run(ctx, "lug:rp", d, 5), b = run(ctx, "lug:rp", d, 5);
    EXPECT_EQ(a.plan.actions(), b.plan.actions());
    EXPECT_EQ(a.stats.expanded, b.stats.expanded);
    EXPECT_EQ(a.stats.generated, b.stats.generated);
  }
}

TEST(Search, AdmissibleOnRandomBeliefs) {
  std::mt19937 rng(31);
  for (const char* spec : {"bt:3", "btc:3", "ring:2"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    auto univ = oracle::reachable_states(ctx);
    HeuristicEvaluator h(ctx, HeuristicSpec::parse("mg:level:max"), Direction::kProgression);
    for (int it = 0; it < 15; ++it) {
      Formula bs = oracle::random_belief(ctx.store(), rng, univ, 0.15);
      auto star = bfs_oracle(ctx, bs);
      Cost v = h(bs);
      if (!star) continue;
      EXPECT_LE(v, *star) << spec;
    }
  }
}

// Every plan found on the generated domains holds up under simulation.
TEST(Search, PlansValidateAcrossDomains) {
  for (const char* spec : {"bt:3", "bts:3", "btc:3", "btcs:2", "cbtc", "ring:2", "cube:3"}) {
    Problem p = generate(spec);
    ProblemContext ctx(p);
    for (const char* h : {"zero", "card", "sg:rp", "sg1:rp", "mg:rp:sum", "mg:rpu", "lug:rp",
                          "lug:level:fx-sx"})
      for (Direction d : {Direction::kRegression, Direction::kProgression}) {
        if (d == Direction::kRegression && p.has_observations()) continue;
        SearchResult r = run(ctx, h, d, 5);
        ASSERT_EQ(r.status, Status::kSolved) << spec << " " << h;
        Validation v = validate(ctx, r.plan);
        EXPECT_TRUE(v.valid) << spec << " " << h << ": " << v.message;
      }
  }
}
