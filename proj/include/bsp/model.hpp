#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bsp/formula.hpp"

namespace bsp {

// rho => eps. Both sides are conjunctions of literals.
struct Effect {
  Cube antecedent;
  Cube consequent;
};

// Deterministic conditional effects plus optional sensor readings. effects[0] is the
// unconditional effect (empty antecedent).
struct Action {
  std::string name;
  Cube precondition;
  std::vector<Effect> effects;
  std::vector<Expr> observations;

  bool observational() const { return !observations.empty(); }
  const Effect& unconditional() const { return effects.front(); }
};

struct Problem {
  std::string name;
  std::vector<std::string> fluents;
  std::vector<Action> actions;
  Expr init;
  Expr goal;
  std::vector<std::string> warnings;

  bool has_observations() const;
  int find_action(std::string_view name) const;  // -1 if absent
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Problem parse_problem(std::string_view text);
Problem load_problem(const std::string& path);
std::string print_problem(const Problem& p);

// Checks structural invariants, throwing ModelError. Adds warnings for overlapping
// or non-exhaustive observation readings.
void validate_problem(Problem& p);

Problem gen_bt(int n);
Problem gen_bts(int n);
Problem gen_btc(int n);
Problem gen_btcs(int n);
Problem gen_cbtc();
Problem gen_cube(int n);
Problem gen_ring(int n);
// "bt:4", "btc:3", "cbtc", "btcs:2", "bts:2", "cube:3", "ring:2"
Problem generate(std::string_view spec);

// A problem bound to its own formula store.
class ProblemContext {
 public:
  explicit ProblemContext(const Problem& p, StoreLimits limits = {});

  const Problem& problem() const { return *problem_; }
  FormulaStore& store() const { return *store_; }
  Formula init() const { return init_; }
  Formula goal() const { return goal_; }
  Formula precondition(std::size_t a) const { return pre_[a]; }
  const std::vector<Formula>& readings(std::size_t a) const { return readings_[a]; }

 private:
  const Problem* problem_;
  std::unique_ptr<FormulaStore> store_;
  Formula init_;
  Formula goal_;
  std::vector<Formula> pre_;
  std::vector<std::vector<Formula>> readings_;
};

}  // namespace bsp
