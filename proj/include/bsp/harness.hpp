#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsp/search.hpp"

namespace bsp {

// Generator spec ("btc:3") or path to a .bsp file.
Problem load_any(const std::string& name);

struct RunConfig {
  std::string heuristic = "lug:rp";
  Direction dir = Direction::kProgression;
  double weight = 5.0;
  double fraction = 1.0;
  std::uint64_t seed = 1;
  std::optional<std::string> mutex;  // overrides the scheme in the heuristic string
  double timeout_s = 1200;
};

HeuristicSpec make_spec(const RunConfig& cfg);

struct RunOutcome {
  Status status = Status::kUnsolvable;
  Plan plan;
  SearchStats stats;
  int plan_len = -1;  // -1 when no plan
  bool valid = false;
  std::string error;  // set when the run failed for a reason other than search
};

RunOutcome run_search(const ProblemContext& ctx, const RunConfig& cfg,
                      std::function<void(const std::string&, Cost)> trace = {});

struct StatsLine {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  double heuristic_ms = 0;
  double search_ms = 0;
  double total_ms = 0;
  int plan_len = -1;
  std::string status;
};
std::string format_stats(const RunOutcome& r);
std::optional<StatsLine> parse_stats(const std::string& line);

// Suite rows: "problem spec [weight] [timeout] [dir]". Problems may be ranges
// (bt:2..10) and specs comma lists; '#' starts a comment.
struct BenchRow {
  std::string problem;
  RunConfig cfg;
};
std::vector<BenchRow> parse_suite(const std::string& text, const RunConfig& defaults);

struct BenchResult {
  BenchRow row;
  RunOutcome outcome;
};
std::vector<BenchResult> run_bench(const std::vector<BenchRow>& rows, unsigned jobs = 1);
std::string csv_header();
std::string csv_row(const BenchResult& r);

struct SnapshotEntry {
  std::string spec;
  Cost value = 0;
  std::string error;
};
std::vector<std::string> default_snapshot_specs();
// Values at the goal (regression from the initial belief) or at the initial
// belief (progression towards the goal), followed by h* when computable.
std::vector<SnapshotEntry> snapshot(const ProblemContext& ctx, Direction at,
                                    const std::vector<std::string>& specs, double fraction = 1.0,
                                    std::uint64_t seed = 1);
std::string format_cost(Cost c);

}  // namespace bsp
