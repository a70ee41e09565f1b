#include <gtest/gtest.h>

#include "bsp/harness.hpp"

using namespace bsp;

TEST(Harness, StatsLineRoundTrip) {
  Problem p = gen_btc(3);
  ProblemContext ctx(p);
  RunConfig cfg;
  cfg.heuristic = "lug:rp";
  RunOutcome r = run_search(ctx, cfg);
  ASSERT_EQ(r.status, Status::kSolved);
  EXPECT_TRUE(r.valid);
  auto s = parse_stats(format_stats(r));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->expanded, r.stats.expanded);
  EXPECT_EQ(s->generated, r.stats.generated);
  EXPECT_EQ(s->plan_len, 5);
  EXPECT_EQ(s->status, "solved");
  EXPECT_NEAR(s->total_ms, r.stats.total_ms, 1e-3);

  RunOutcome none;
  none.status = Status::kTimeout;
  auto t = parse_stats(format_stats(none));
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->plan_len, -1);
  EXPECT_EQ(t->status, "TO");
  EXPECT_FALSE(parse_stats("stats expanded=1"));
  EXPECT_FALSE(parse_stats("plan DunkP1"));
}

TEST(Harness, SuiteExpansion) {
  RunConfig d;
  auto rows = parse_suite("# header\nbt:2..10 card,lug:rp\n\ncbtc sg:rp 1 30 regress  # tail\n", d);
  ASSERT_EQ(rows.size(), 19u);
  EXPECT_EQ(rows[0].problem, "bt:2");
  EXPECT_EQ(rows[0].cfg.heuristic, "card");
  EXPECT_EQ(rows[1].cfg.heuristic, "lug:rp");
  EXPECT_EQ(rows[17].problem, "bt:10");
  EXPECT_EQ(rows[18].cfg.weight, 1);
  EXPECT_EQ(rows[18].cfg.timeout_s, 30);
  EXPECT_EQ(rows[18].cfg.dir, Direction::kRegression);
  EXPECT_THROW(parse_suite("bt:2 sg:rp:sum\n", d), SpecError);
  EXPECT_THROW(parse_suite("bt:2\n", d), std::invalid_argument);
  EXPECT_THROW(parse_suite("bt:2 card x\n", d), std::invalid_argument);
}

TEST(Harness, BenchRowsAndCsv) {
  RunConfig d;
  d.timeout_s = 30;
  auto rows = parse_suite("cbtc card,sg:rp,mg:rp:sum,mg:rpu,lug:rp\ncbtc lug:rp 5 30 regress\n"
                          "nosuch:3 card\n", d);
  auto seq = run_bench(rows, 1);
  auto par = run_bench(rows, 3);
  ASSERT_EQ(seq.size(), 7u);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    EXPECT_EQ(seq[i].outcome.status, Status::kSolved);
    EXPECT_EQ(seq[i].outcome.plan_len, 5);
    EXPECT_EQ(par[i].outcome.stats.expanded, seq[i].outcome.stats.expanded);
  }
  EXPECT_EQ(csv_header(), "problem,spec,total_ms,heuristic_ms,expanded,plan_len,status");
  std::string last = csv_row(seq.back());
  EXPECT_EQ(last.substr(0, 13), "nosuch:3,card");
  EXPECT_TRUE(last.ends_with(",,error"));
  std::string first = csv_row(seq.front());
  EXPECT_TRUE(first.ends_with(",5,solved"));
  EXPECT_EQ(std::count(first.begin(), first.end(), ','), 6);
}

TEST(Harness, TimeoutRow) {
  RunConfig d;
  d.timeout_s = 0.0;
  auto out = run_bench(parse_suite("btc:12 zero\n", d));
  EXPECT_EQ(out[0].outcome.status, Status::kTimeout);
  EXPECT_TRUE(csv_row(out[0]).ends_with(",,TO"));
}

TEST(Harness, SnapshotAtSolvedBelief) {
  Problem p = parse_problem(R"((define (problem done)
    (:fluents a b) (:action flip :effect (not a)) (:init (and a (or b (not b)))) (:goal a)))");
  ProblemContext ctx(p);
  for (const auto& e : snapshot(ctx, Direction::kProgression, default_snapshot_specs())) {
    EXPECT_TRUE(e.error.empty()) << e.spec;
    EXPECT_EQ(e.value, 0) << e.spec;
  }
}

TEST(Harness, SnapshotOnBt) {
  Problem p = gen_bt(3);
  ProblemContext ctx(p);
  auto rows = snapshot(ctx, Direction::kProgression, {"lug:rp", "mg:rpu"});
  EXPECT_EQ(rows[0].value, 3);
  EXPECT_EQ(rows[1].value, 3);
  EXPECT_EQ(rows[2].spec, "h*");
  EXPECT_EQ(rows[2].value, 3);
}

TEST(Harness, MutexOverride) {
  RunConfig c;
  c.heuristic = "lug:level";
  c.mutex = "fx-ix";
  EXPECT_EQ(make_spec(c).mutex, (MutexScheme{MutexDepth::kFull, MutexWorlds::kIntersect}));
  c.heuristic = "card";
  EXPECT_THROW(make_spec(c), SpecError);
  c.heuristic = "lug:rp";
  c.mutex.reset();
  c.fraction = 1.5;
  EXPECT_THROW(make_spec(c), SpecError);
}
