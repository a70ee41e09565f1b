#pragma once

#include <vector>

#include "bsp/model.hpp"

namespace bsp {

class IllFormedAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// l or the antecedents of every effect giving l.
Formula causes(const ProblemContext& ctx, std::size_t action, Literal l);
// Conjunction of the negated antecedents of every effect giving the complement of l.
Formula preserves(const ProblemContext& ctx, std::size_t action, Literal l);

// Weakest belief from which the action leads into bs. The action must be causative.
Formula regress(const ProblemContext& ctx, Formula bs, std::size_t action);
bool is_relevant(const ProblemContext& ctx, std::size_t action, Formula bs);

// Successor of a single state; the state must satisfy the precondition.
State progress_state(const Problem& p, const State& s, std::size_t action);

// Causative image of a belief, computed symbolically. Bottom when bs does not
// entail the precondition.
Formula progress_causative(const ProblemContext& ctx, Formula bs, std::size_t action);
// Successor beliefs, one per consistent reading (or a single one when the action
// senses nothing). Empty when bs does not entail the precondition.
std::vector<Formula> progress(const ProblemContext& ctx, Formula bs, std::size_t action);
struct Branch {
  static constexpr std::size_t kNoReading = static_cast<std::size_t>(-1);
  std::size_t reading = kNoReading;
  Formula belief;
};
std::vector<Branch> progress_branches(const ProblemContext& ctx, Formula bs, std::size_t action);

}  // namespace bsp
