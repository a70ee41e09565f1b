#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsp/heuristic.hpp"
#include "bsp/transition.hpp"

namespace bsp {

enum class Status { kSolved, kUnsolvable, kTimeout };
const char* status_name(Status s);

// Rooted DAG. A node without an action is a goal leaf; otherwise it has one child
// per branch, each tagged with the reading index (Branch::kNoReading when the
// action senses nothing).
struct PlanNode {
  static constexpr std::size_t kGoal = static_cast<std::size_t>(-1);
  std::size_t action = kGoal;
  std::vector<std::pair<std::size_t, std::size_t>> branches;  // (reading, node)
};

struct Plan {
  std::vector<PlanNode> nodes;  // nodes[0] is the root

  static Plan sequence(const std::vector<std::size_t>& actions);
  bool empty() const { return nodes.empty() || nodes[0].action == PlanNode::kGoal; }
  bool conditional() const;
  // Actions along the single path; throws on branching plans.
  std::vector<std::size_t> actions() const;
  // Longest root-to-leaf path, counted in actions.
  int depth() const;
  std::string to_string(const Problem& p) const;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  double heuristic_ms = 0;
  double search_ms = 0;
  double total_ms = 0;
};

struct SearchOptions {
  double weight = 5.0;
  Deadline deadline;
  // Called after each expansion and revision with the root's best action and cost.
  std::function<void(const std::string&, Cost)> trace;
};

struct SearchResult {
  Status status = Status::kUnsolvable;
  Plan plan;
  Cost root_cost = kInfinity;
  SearchStats stats;
  bool revision_stable = true;  // AO* only: revising every node again changes nothing
};

SearchResult astar_regress(const ProblemContext& ctx, HeuristicEvaluator& h,
                           const SearchOptions& opt = {});
SearchResult aostar_progress(const ProblemContext& ctx, HeuristicEvaluator& h,
                             const SearchOptions& opt = {});

struct Validation {
  bool valid = false;
  int max_length = 0;
  std::optional<State> witness;  // initial state on which the plan fails
  std::string message;
};
Validation validate(const ProblemContext& ctx, const Plan& plan);

// Optimal worst-case plan length from a belief by uninformed search; nullopt when
// no plan exists. Throws CapExceeded after visiting more than cap beliefs.
std::optional<int> bfs_oracle(const ProblemContext& ctx, Formula start, std::size_t cap = 200000);
inline std::optional<int> bfs_oracle(const ProblemContext& ctx, std::size_t cap = 200000) {
  return bfs_oracle(ctx, ctx.init(), cap);
}

}  // namespace bsp
