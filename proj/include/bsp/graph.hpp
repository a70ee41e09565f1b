#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "bsp/common.hpp"
#include "bsp/model.hpp"
#include "bsp/mutex.hpp"

namespace bsp {

inline constexpr int kDefaultLevelCap = 128;
inline constexpr int kNotReached = -1;

// Literals are dense codes (Literal::code). Real actions come first in problem
// order, followed by one persistence action per literal.
struct GraphAction {
  std::string name;
  std::vector<std::uint32_t> pre;
  std::vector<std::uint32_t> effects;
  int source = -1;     // index into Problem::actions, -1 for persistence
  int persisted = -1;  // literal code for persistence actions
};

struct GraphEffect {
  std::uint32_t action = 0;
  std::uint32_t index = 0;  // position within the action; 0 is unconditional
  std::vector<std::uint32_t> antecedent;
  std::vector<std::uint32_t> consequent;
};

class GraphDomain {
 public:
  explicit GraphDomain(const Problem& p);

  const Problem& problem() const { return *problem_; }
  std::size_t num_literals() const { return 2 * problem_->fluents.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_effects() const { return effects_.size(); }
  const GraphAction& action(std::size_t a) const { return actions_[a]; }
  const GraphEffect& effect(std::size_t e) const { return effects_[e]; }
  bool is_persistence(std::size_t a) const { return actions_[a].persisted >= 0; }
  bool is_persistence_effect(std::size_t e) const { return is_persistence(effects_[e].action); }
  std::uint32_t persistence_of(std::uint32_t lit) const {
    return static_cast<std::uint32_t>(problem_->actions.size() + lit);
  }
  const std::vector<std::uint32_t>& supporters(std::uint32_t lit) const { return support_[lit]; }
  // Effects of the same action that fire whenever e fires.
  const std::vector<std::uint32_t>& induced(std::uint32_t e) const { return induced_[e]; }
  bool actions_interfere(std::uint32_t a, std::uint32_t b) const {
    return act_interfere_[a * actions_.size() + b] != 0;
  }
  bool effects_interfere(std::uint32_t e, std::uint32_t f) const {
    return eff_interfere_[e * effects_.size() + f] != 0;
  }
  std::string literal_name(std::uint32_t lit) const;
  std::string effect_name(std::uint32_t e) const;

 private:
  const Problem* problem_;
  std::vector<GraphAction> actions_;
  std::vector<GraphEffect> effects_;
  std::vector<std::vector<std::uint32_t>> support_;
  std::vector<std::vector<std::uint32_t>> induced_;
  std::vector<char> act_interfere_;
  std::vector<char> eff_interfere_;
};

struct SgLayer {
  std::vector<char> lits;
  std::vector<char> acts;
  std::vector<char> effs;
  PairSet lit_mutex;
  PairSet act_mutex;
  PairSet eff_mutex;
};

// Planning graph over a set of literals (one state, or the union of a belief's
// constituent literals). Levels past the level-off point repeat the last layer.
class SingleGraph {
 public:
  SingleGraph(const GraphDomain& d, std::span<const std::uint32_t> initial,
              MutexDepth depth = MutexDepth::kNone, int level_cap = kDefaultLevelCap,
              const Deadline& deadline = {});

  const GraphDomain& domain() const { return *domain_; }
  int last_level() const { return static_cast<int>(layers_.size()) - 1; }
  bool truncated() const { return truncated_; }
  MutexDepth depth() const { return depth_; }
  const SgLayer& layer(int k) const;

  bool has_literal(int k, std::uint32_t l) const { return layer(k).lits[l] != 0; }
  bool has_action(int k, std::uint32_t a) const { return layer(k).acts[a] != 0; }
  bool has_effect(int k, std::uint32_t e) const { return layer(k).effs[e] != 0; }
  bool literals_mutex(int k, std::uint32_t a, std::uint32_t b) const {
    return layer(k).lit_mutex.contains(a, b);
  }
  bool actions_mutex(int k, std::uint32_t a, std::uint32_t b) const {
    return layer(k).act_mutex.contains(a, b);
  }
  bool effects_mutex(int k, std::uint32_t a, std::uint32_t b) const {
    return layer(k).eff_mutex.contains(a, b);
  }
  int literal_level(std::uint32_t l) const { return lit_level_[l]; }
  int action_level(std::uint32_t a) const { return act_level_[a]; }
  int effect_level(std::uint32_t e) const { return eff_level_[e]; }

 private:
  const GraphDomain* domain_;
  MutexDepth depth_;
  std::vector<SgLayer> layers_;
  std::vector<int> lit_level_, act_level_, eff_level_;
  bool truncated_ = false;
};

std::vector<std::uint32_t> literal_codes(std::span<const Literal> lits);

// Literals appearing in some constituent of bs.
std::vector<Literal> aggregate_state(FormulaStore& st, Formula bs);

// ceil(fraction * |models|) distinct models drawn uniformly without replacement,
// returned in enumeration order.
std::vector<State> sample_states(FormulaStore& st, Formula bs, double fraction,
                                 std::mt19937_64& rng);
std::vector<State> sample_states(FormulaStore& st, Formula bs, double fraction,
                                 std::uint64_t seed);

// One single graph per world.
class GraphSet {
 public:
  GraphSet(const GraphDomain& d, std::vector<State> worlds, MutexDepth depth = MutexDepth::kNone,
           int level_cap = kDefaultLevelCap, const Deadline& deadline = {});

  std::size_t size() const { return graphs_.size(); }
  const SingleGraph& graph(std::size_t i) const { return graphs_[i]; }
  const State& world(std::size_t i) const { return worlds_[i]; }
  const std::vector<State>& worlds() const { return worlds_; }

 private:
  std::vector<State> worlds_;
  std::vector<SingleGraph> graphs_;
};

struct LugLayer {
  std::vector<Formula> lits;
  std::vector<Formula> acts;
  std::vector<Formula> effs;
  LabelMap lit_mutex;
  LabelMap act_mutex;
  LabelMap eff_mutex;
  CrossMap lit_cross;
  CrossMap act_cross;
  CrossMap eff_cross;
};

inline constexpr std::size_t kCrossWorldCap = 64;

// Labelled uncertainty graph. Labels are formulas over the fluents describing the
// worlds of the projected belief in which an element is reachable.
class Lug {
 public:
  Lug(const GraphDomain& d, FormulaStore& st, Formula projected, MutexScheme scheme = {},
      int level_cap = kDefaultLevelCap, const Deadline& deadline = {});

  const GraphDomain& domain() const { return *domain_; }
  FormulaStore& store() const { return *store_; }
  Formula projected() const { return projected_; }
  MutexScheme scheme() const { return scheme_; }
  int last_level() const { return static_cast<int>(layers_.size()) - 1; }
  bool truncated() const { return truncated_; }
  const LugLayer& layer(int k) const;
  // Worlds of the projected belief; only enumerated for cross-world mutexes.
  const std::vector<State>& worlds() const { return worlds_; }

  Formula literal_label(int k, std::uint32_t l) const { return layer(k).lits[l]; }
  Formula action_label(int k, std::uint32_t a) const { return layer(k).acts[a]; }
  Formula effect_label(int k, std::uint32_t e) const { return layer(k).effs[e]; }
  Formula literal_mutex(int k, std::uint32_t a, std::uint32_t b) const;
  Formula action_mutex(int k, std::uint32_t a, std::uint32_t b) const;
  Formula effect_mutex(int k, std::uint32_t a, std::uint32_t b) const;
  bool literal_cross(int k, std::uint32_t a, std::size_t i, std::uint32_t b, std::size_t j) const {
    return layer(k).lit_cross.get(a, i, b, j);
  }

  // Extended label of a negation normal form formula: literals map to their labels,
  // true to the projected belief and false to bottom, through and/or.
  Formula extended_label(int k, const Expr& nnf) const;
  Formula cube_label(int k, std::span<const Literal> cube) const;
  Formula clause_label(int k, std::span<const Literal> clause) const;

  std::string dump() const;

 private:
  const GraphDomain* domain_;
  FormulaStore* store_;
  Formula projected_;
  MutexScheme scheme_;
  std::vector<State> worlds_;
  std::vector<LugLayer> layers_;
  bool truncated_ = false;
};

}  // namespace bsp
