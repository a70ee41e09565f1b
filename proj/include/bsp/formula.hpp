#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bsp {

using FluentId = std::uint32_t;

struct Literal {
  FluentId fluent = 0;
  bool positive = true;

  constexpr Literal negated() const { return {fluent, !positive}; }
  // Dense index: 2*fluent for the positive literal, 2*fluent+1 for the negative.
  constexpr std::uint32_t code() const { return 2 * fluent + (positive ? 0u : 1u); }
  static constexpr Literal from_code(std::uint32_t c) { return {c / 2, (c & 1u) == 0}; }

  friend constexpr bool operator==(const Literal&, const Literal&) = default;
  friend constexpr auto operator<=>(const Literal& a, const Literal& b) {
    return a.code() <=> b.code();
  }
};

// A complete assignment to the fluents of a universe.
class State {
 public:
  State() = default;
  explicit State(std::size_t num_fluents) : values_(num_fluents, false) {}

  std::size_t size() const { return values_.size(); }
  bool value(FluentId f) const { return values_[f]; }
  void set(FluentId f, bool v) { values_[f] = v; }
  bool holds(Literal l) const { return values_[l.fluent] == l.positive; }
  bool satisfies(std::span<const Literal> cube) const;
  void apply(Literal l) { values_[l.fluent] = l.positive; }
  std::vector<Literal> literals() const;  // one literal per fluent

  friend bool operator==(const State&, const State&) = default;
  friend bool operator<(const State& a, const State& b) { return a.values_ < b.values_; }

 private:
  std::vector<bool> values_;
};

using Cube = std::vector<Literal>;
using Clause = std::vector<Literal>;
using ClauseSet = std::vector<Clause>;
using ConstituentSet = std::vector<Cube>;

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UniverseMismatch : public std::invalid_argument {
 public:
  UniverseMismatch() : std::invalid_argument("formulas belong to different universes") {}
};

struct StoreLimits {
  std::uint64_t model_count_cap = std::uint64_t{1} << 20;
  std::uint64_t enumeration_cap = std::uint64_t{1} << 16;
  std::uint64_t normal_form_cap = std::uint64_t{1} << 16;  // paths visited by to_clauses/to_constituents
};

class FormulaStore;

// Handle to a canonical formula. Equal handles denote equivalent formulas.
class Formula {
 public:
  Formula() = default;

  bool valid() const { return store_ != nullptr; }
  bool is_true() const { return id_ == 1; }
  bool is_false() const { return id_ == 0; }
  std::uint32_t id() const { return id_; }
  FormulaStore& store() const { return *store_; }

  Formula operator&(const Formula& o) const;
  Formula operator|(const Formula& o) const;
  Formula operator~() const;
  Formula& operator&=(const Formula& o) { return *this = *this & o; }
  Formula& operator|=(const Formula& o) { return *this = *this | o; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.id_ == b.id_ && a.store_ == b.store_;
  }

 private:
  friend class FormulaStore;
  Formula(FormulaStore* s, std::uint32_t id) : store_(s), id_(id) {}

  FormulaStore* store_ = nullptr;
  std::uint32_t id_ = 0;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return std::hash<std::uint32_t>()(f.id()); }
};

// Syntactic formula over fluent names.
struct Expr {
  enum class Kind { kTrue, kFalse, kAtom, kNot, kAnd, kOr, kOneOf };
  Kind kind = Kind::kTrue;
  std::string atom;
  std::vector<Expr> children;

  static Expr top() { return {}; }
  static Expr bottom() { return {Kind::kFalse, {}, {}}; }
  static Expr atom_of(std::string name) { return {Kind::kAtom, std::move(name), {}}; }
  static Expr literal(std::string name, bool positive);
  static Expr negation(Expr e) { return {Kind::kNot, {}, {std::move(e)}}; }
  static Expr conjunction(std::vector<Expr> c) { return {Kind::kAnd, {}, std::move(c)}; }
  static Expr disjunction(std::vector<Expr> c) { return {Kind::kOr, {}, std::move(c)}; }
  static Expr one_of(std::vector<Expr> c) { return {Kind::kOneOf, {}, std::move(c)}; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct SExpr;
Expr expr_from_sexpr(const SExpr& e);
Expr parse_expr(std::string_view text);
std::string to_string(const Expr& e);

// Pushes negations to atoms and expands oneof, giving and/or over literals.
Expr to_nnf(const Expr& e);

// Reduced ordered BDD store. Variable order is fluent id order.
class FormulaStore {
 public:
  explicit FormulaStore(std::vector<std::string> fluent_names, StoreLimits limits = {});
  FormulaStore(const FormulaStore&) = delete;
  FormulaStore& operator=(const FormulaStore&) = delete;

  std::size_t num_fluents() const { return names_.size(); }
  const std::vector<std::string>& fluent_names() const { return names_; }
  const std::string& fluent_name(FluentId f) const { return names_.at(f); }
  std::optional<FluentId> find_fluent(std::string_view name) const;
  const StoreLimits& limits() const { return limits_; }
  StoreLimits& limits() { return limits_; }
  std::size_t node_count() const { return nodes_.size(); }

  Formula top() { return {this, 1}; }
  Formula bottom() { return {this, 0}; }
  Formula literal(Literal l);
  Formula cube(std::span<const Literal> lits);
  Formula clause(std::span<const Literal> lits);
  Formula state(const State& s);

  Formula conj(Formula a, Formula b);
  Formula disj(Formula a, Formula b);
  Formula neg(Formula a);
  Formula diff(Formula a, Formula b);  // a and not b
  bool entails(Formula a, Formula b);
  bool consistent(Formula a, Formula b) { return !conj(a, b).is_false(); }
  bool eval(Formula f, const State& s) const;

  Formula exists(Formula f, std::span<const FluentId> vars);
  Formula restrict(Formula f, Literal l);
  // Replaces every positive occurrence of fluent p by pos[p] and every negative one by
  // neg[p], reading each decision node as (p and hi) or (not p and lo). The true
  // terminal maps to top_image.
  Formula substitute(Formula f, std::span<const Formula> pos, std::span<const Formula> neg,
                     Formula top_image);
  std::vector<FluentId> support(Formula f) const;

  double count_models_real(Formula f);
  std::uint64_t count_models(Formula f);
  void for_each_model(Formula f, const std::function<void(const State&)>& fn);
  std::vector<State> models(Formula f);
  // Models projected on a subset of fluents; unlisted fluents are false in the result.
  std::vector<State> models(Formula f, std::span<const FluentId> restrict_to);

  // Clauses and constituents are prime, irredundant-by-construction covers derived
  // from the diagram paths. Results are memoised per handle.
  const ClauseSet& to_clauses(Formula f);
  const ConstituentSet& to_constituents(Formula f);
  // Literals occurring in some constituent.
  std::vector<Literal> constituent_literals(Formula f);

  Formula build(const Expr& e);
  Formula parse(std::string_view text);
  std::string to_string(Formula f);
  std::string literal_name(Literal l) const;
  Expr cube_expr(std::span<const Literal> cube) const;
  Expr to_expr(Formula f);

  void clear_caches();

 private:
  struct Node {
    std::uint32_t var;
    std::uint32_t lo;
    std::uint32_t hi;
  };
  struct CacheEntry {
    std::uint32_t op = 0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t r = 0;
  };
  enum Op : std::uint32_t { kAnd = 1, kOr, kDiff, kNot };

  void check(const Formula& f) const;
  std::uint32_t mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi);
  void grow_table();
  std::uint32_t apply(Op op, std::uint32_t a, std::uint32_t b);
  std::uint32_t negate(std::uint32_t a);
  std::uint32_t var_of(std::uint32_t n) const { return nodes_[n].var; }
  std::uint32_t cofactor_assignment(std::uint32_t f, const std::vector<std::int8_t>& assign,
                                    std::unordered_map<std::uint32_t, std::uint32_t>& memo);
  bool cube_implies(const Cube& cube, std::uint32_t f);
  bool implies_clause(std::uint32_t f, const Clause& clause);
  void paths(std::uint32_t f, std::uint32_t terminal, std::vector<Cube>& out);

  std::vector<std::string> names_;
  StoreLimits limits_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> table_;
  std::vector<CacheEntry> cache_;
  std::unordered_map<std::uint32_t, ClauseSet> clause_memo_;
  std::unordered_map<std::uint32_t, ConstituentSet> constituent_memo_;
};

inline Formula conj(Formula a, Formula b) { return a.store().conj(a, b); }
inline Formula disj(Formula a, Formula b) { return a.store().disj(a, b); }
inline Formula neg(Formula a) { return a.store().neg(a); }
inline bool entails(Formula a, Formula b) { return a.store().entails(a, b); }
inline std::uint64_t count_models(Formula f) { return f.store().count_models(f); }
inline std::vector<State> models(Formula f) { return f.store().models(f); }
inline const ClauseSet& to_clauses(Formula f) { return f.store().to_clauses(f); }
inline const ConstituentSet& to_constituents(Formula f) { return f.store().to_constituents(f); }

}  // namespace bsp
