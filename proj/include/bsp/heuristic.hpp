#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bsp/common.hpp"
#include "bsp/graph.hpp"

namespace bsp {

enum class Substrate { kNone, kSgUnion, kSgSample, kMg, kLug };
enum class HKind { kZero, kCard, kMax, kSum, kLevel, kRp, kRpUnion };
enum class Aggregation { kNone, kMax, kSum, kUnion };
enum class Direction { kRegression, kProgression };

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text form: zero | card | sg:K | sg1:K | mg:K[:max|:sum] | mg:rpu | lug:K[:max|:sum] | lug:rp,
// K in max|sum|level|rp, optionally followed by a mutex scheme (lug:level:fx-sx).
struct HeuristicSpec {
  Substrate substrate = Substrate::kNone;
  HKind kind = HKind::kZero;
  Aggregation agg = Aggregation::kNone;
  MutexScheme mutex{};
  bool mutex_given = false;
  double fraction = 1.0;
  std::uint64_t seed = 1;

  static HeuristicSpec parse(std::string_view text);
  std::string to_string() const;
};

struct RelaxedPlan {
  bool reachable = false;
  int level = 0;
  // Per layer 0..level-1. Actions exclude persistence; effects include it.
  std::vector<std::vector<std::uint32_t>> actions;
  std::vector<std::vector<std::uint32_t>> effects;
  // Subgoal literals per layer 0..level (the last holds the goal literals or,
  // for the uncertainty graph, those of the goal clauses).
  std::vector<std::vector<std::uint32_t>> literals;
  // Uncertainty graph only: worlds each chosen element is needed for.
  std::vector<std::map<std::uint32_t, Formula>> effect_need;
  std::vector<std::map<std::uint32_t, Formula>> action_need;
  std::vector<std::map<std::uint32_t, Formula>> literal_need;

  Cost value() const;
};

// Layer-wise union of plans, each a list of action layers. Regression plans are
// aligned at their ends, progression plans at their starts.
std::vector<std::vector<std::uint32_t>> merge_plans(
    const std::vector<std::vector<std::vector<std::uint32_t>>>& plans, Direction dir);
std::size_t count_actions(const std::vector<std::vector<std::uint32_t>>& layers);

// Single graph measures.
Cost clause_cost(const SingleGraph& g, std::span<const Literal> clause);
Cost constituent_level(const SingleGraph& g, std::span<const Literal> cube);
Cost sg_value(const SingleGraph& g, FormulaStore& st, Formula bs_i, HKind kind);
RelaxedPlan sg_relaxed_plan(const SingleGraph& g, FormulaStore& st, Formula bs_i);
Cost mg_value(const GraphSet& gs, FormulaStore& st, Formula bs_i, HKind kind, Aggregation agg,
              Direction dir);

// Uncertainty graph measures. Costs are the first level at which the projected
// belief entails the relevant label.
Cost lug_clause_cost(const Lug& lug, std::span<const Literal> clause);
Formula lug_reach_label(const Lug& lug, int k, const ConstituentSet& cons);
Cost lug_level(const Lug& lug, Formula bs_i);
Cost lug_value(const Lug& lug, Formula bs_i, HKind kind, Aggregation agg);
RelaxedPlan lug_relaxed_plan(const Lug& lug, Formula bs_i);

struct GraphBundle {
  Formula projected;
  std::optional<SingleGraph> sg;
  std::optional<GraphSet> mg;
  std::optional<Lug> lug;
};

// Estimates the distance between a belief seeding the graphs (BS_P) and a target
// belief (BS_i). In regression BS_P is the initial belief and the search node is
// BS_i; in progression the node is BS_P and the goal is BS_i.
class HeuristicEvaluator {
 public:
  HeuristicEvaluator(const ProblemContext& ctx, HeuristicSpec spec, Direction dir,
                     Deadline deadline = {});
  HeuristicEvaluator(const HeuristicEvaluator&) = delete;
  HeuristicEvaluator& operator=(const HeuristicEvaluator&) = delete;

  Cost operator()(Formula node);
  Cost estimate(Formula bs_p, Formula bs_i);

  const HeuristicSpec& spec() const { return spec_; }
  Direction direction() const { return dir_; }
  const GraphDomain& domain() const { return domain_; }
  double elapsed_ms() const { return elapsed_ms_; }
  std::size_t evaluations() const { return evaluations_; }
  std::unique_ptr<GraphBundle> build(Formula bs_p);

 private:
  Cost evaluate(const GraphBundle& b, Formula bs_p, Formula bs_i);

  const ProblemContext* ctx_;
  HeuristicSpec spec_;
  Direction dir_;
  Deadline deadline_;
  GraphDomain domain_;
  std::mt19937_64 rng_;
  std::unique_ptr<GraphBundle> fixed_;
  std::unordered_map<Formula, Cost, FormulaHash> memo_;
  double elapsed_ms_ = 0;
  std::size_t evaluations_ = 0;
};

}  // namespace bsp
