#include "bsp/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "bsp/sexpr.hpp"

namespace bsp {

bool State::satisfies(std::span<const Literal> cube) const {
  for (Literal l : cube)
    if (!holds(l)) return false;
  return true;
}

std::vector<Literal> State::literals() const {
  std::vector<Literal> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    out.push_back({static_cast<FluentId>(i), values_[i]});
  return out;
}

Formula Formula::operator&(const Formula& o) const { return store_->conj(*this, o); }
Formula Formula::operator|(const Formula& o) const { return store_->disj(*this, o); }
Formula Formula::operator~() const { return store_->neg(*this); }

// ---------------------------------------------------------------- Expr

Expr Expr::literal(std::string name, bool positive) {
  Expr a = atom_of(std::move(name));
  return positive ? a : negation(std::move(a));
}

Expr expr_from_sexpr(const SExpr& e) {
  if (e.is_atom) {
    if (e.is("true")) return Expr::top();
    if (e.is("false")) return Expr::bottom();
    return Expr::atom_of(e.atom);
  }
  if (e.items.empty()) e.fail("empty formula");
  const SExpr& head = e.items.front();
  std::vector<Expr> args;
  for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(expr_from_sexpr(e.items[i]));
  if (head.is("and")) return Expr::conjunction(std::move(args));
  if (head.is("or")) return Expr::disjunction(std::move(args));
  if (head.is("oneof")) return Expr::one_of(std::move(args));
  if (head.is("not")) {
    if (args.size() != 1) e.fail("'not' takes exactly one argument");
    return Expr::negation(std::move(args.front()));
  }
  if (head.is_atom && e.items.size() == 1) return Expr::atom_of(head.atom);
  e.fail("unknown connective '" + to_string(head) + "'");
}

Expr parse_expr(std::string_view text) { return expr_from_sexpr(parse_sexpr(text)); }

std::string to_string(const Expr& e) {
  auto join = [&](const char* op) {
    std::string s = std::string("(") + op;
    for (const Expr& c : e.children) s += " " + to_string(c);
    return s + ")";
  };
  switch (e.kind) {
    case Expr::Kind::kTrue: return "true";
    case Expr::Kind::kFalse: return "false";
    case Expr::Kind::kAtom: return e.atom;
    case Expr::Kind::kNot: return "(not " + to_string(e.children.front()) + ")";
    case Expr::Kind::kAnd: return join("and");
    case Expr::Kind::kOr: return join("or");
    case Expr::Kind::kOneOf: return join("oneof");
  }
  return "";
}

namespace {

Expr nnf(const Expr& e, bool negated) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::kTrue: return negated ? Expr::bottom() : Expr::top();
    case K::kFalse: return negated ? Expr::top() : Expr::bottom();
    case K::kAtom: return negated ? Expr::negation(e) : e;
    case K::kNot: return nnf(e.children.front(), !negated);
    case K::kAnd:
    case K::kOr: {
      std::vector<Expr> c;
      for (const Expr& x : e.children) c.push_back(nnf(x, negated));
      bool is_and = (e.kind == K::kAnd) != negated;
      return is_and ? Expr::conjunction(std::move(c)) : Expr::disjunction(std::move(c));
    }
    case K::kOneOf: {
      std::vector<Expr> alts;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        std::vector<Expr> c;
        for (std::size_t j = 0; j < e.children.size(); ++j)
          c.push_back(i == j ? e.children[j] : Expr::negation(e.children[j]));
        alts.push_back(Expr::conjunction(std::move(c)));
      }
      return nnf(Expr::disjunction(std::move(alts)), negated);
    }
  }
  return e;
}

}  // namespace

Expr to_nnf(const Expr& e) { return nnf(e, false); }

// ---------------------------------------------------------------- store

namespace {
constexpr std::size_t kCacheSize = std::size_t{1} << 18;

inline std::size_t hash3(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  std::uint64_t h = a * 0x9E3779B97F4A7C15ull;
  h ^= (b + 0x7F4A7C15ull + (h << 6) + (h >> 2)) * 0xBF58476D1CE4E5B9ull;
  h ^= (c + 0x94D049BB133111EBull + (h << 6) + (h >> 2)) * 0x94D049BB133111EBull;
  return static_cast<std::size_t>(h ^ (h >> 31));
}
}  // namespace

FormulaStore::FormulaStore(std::vector<std::string> fluent_names, StoreLimits limits)
    : names_(std::move(fluent_names)), limits_(limits) {
  const auto terminal = static_cast<std::uint32_t>(names_.size());
  nodes_.push_back({terminal, 0, 0});
  nodes_.push_back({terminal, 1, 1});
  table_.assign(1024, 0);
  cache_.assign(kCacheSize, {});
}

std::optional<FluentId> FormulaStore::find_fluent(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<FluentId>(i);
  return std::nullopt;
}

void FormulaStore::check(const Formula& f) const {
  if (!f.valid() || &f.store() != this) throw UniverseMismatch();
}

void FormulaStore::grow_table() {
  std::vector<std::uint32_t> bigger(table_.size() * 2, 0);
  const std::size_t mask = bigger.size() - 1;
  for (std::uint32_t id : table_) {
    if (id == 0) continue;
    const Node& n = nodes_[id];
    std::size_t i = hash3(n.var, n.lo, n.hi) & mask;
    while (bigger[i] != 0) i = (i + 1) & mask;
    bigger[i] = id;
  }
  table_.swap(bigger);
}

std::uint32_t FormulaStore::mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi) {
  if (lo == hi) return lo;
  if ((nodes_.size() + 1) * 10 > table_.size() * 7) grow_table();
  const std::size_t mask = table_.size() - 1;
  std::size_t i = hash3(var, lo, hi) & mask;
  while (table_[i] != 0) {
    const Node& n = nodes_[table_[i]];
    if (n.var == var && n.lo == lo && n.hi == hi) return table_[i];
    i = (i + 1) & mask;
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({var, lo, hi});
  table_[i] = id;
  return id;
}

std::uint32_t FormulaStore::negate(std::uint32_t a) {
  if (a <= 1) return 1 - a;
  CacheEntry& slot = cache_[hash3(kNot, a, 0) & (kCacheSize - 1)];
  if (slot.op == kNot && slot.a == a) return slot.r;
  const Node n = nodes_[a];
  std::uint32_t lo = negate(n.lo);
  std::uint32_t hi = negate(n.hi);
  std::uint32_t r = mk(n.var, lo, hi);
  cache_[hash3(kNot, a, 0) & (kCacheSize - 1)] = {kNot, a, 0, r};
  return r;
}

std::uint32_t FormulaStore::apply(Op op, std::uint32_t a, std::uint32_t b) {
  switch (op) {
    case kAnd:
      if (a == 0 || b == 0) return 0;
      if (a == 1) return b;
      if (b == 1 || a == b) return a;
      if (a > b) std::swap(a, b);
      break;
    case kOr:
      if (a == 1 || b == 1) return 1;
      if (a == 0) return b;
      if (b == 0 || a == b) return a;
      if (a > b) std::swap(a, b);
      break;
    case kDiff:
      if (a == 0 || b == 1 || a == b) return 0;
      if (b == 0) return a;
      if (a == 1) return negate(b);
      break;
    default:
      break;
  }
  const std::size_t h = hash3(op, a, b) & (kCacheSize - 1);
  if (cache_[h].op == op && cache_[h].a == a && cache_[h].b == b) return cache_[h].r;
  const Node na = nodes_[a];
  const Node nb = nodes_[b];
  const std::uint32_t v = std::min(na.var, nb.var);
  const std::uint32_t a0 = na.var == v ? na.lo : a, a1 = na.var == v ? na.hi : a;
  const std::uint32_t b0 = nb.var == v ? nb.lo : b, b1 = nb.var == v ? nb.hi : b;
  const std::uint32_t lo = apply(op, a0, b0);
  const std::uint32_t hi = apply(op, a1, b1);
  const std::uint32_t r = mk(v, lo, hi);
  cache_[h] = {op, a, b, r};
  return r;
}

Formula FormulaStore::literal(Literal l) {
  if (l.fluent >= names_.size()) throw std::out_of_range("fluent id out of range");
  return {this, l.positive ? mk(l.fluent, 0, 1) : mk(l.fluent, 1, 0)};
}

Formula FormulaStore::cube(std::span<const Literal> lits) {
  Formula r = top();
  for (Literal l : lits) r = conj(r, literal(l));
  return r;
}

Formula FormulaStore::clause(std::span<const Literal> lits) {
  Formula r = bottom();
  for (Literal l : lits) r = disj(r, literal(l));
  return r;
}

Formula FormulaStore::state(const State& s) {
  if (s.size() != names_.size()) throw std::invalid_argument("state size does not match universe");
  std::uint32_t r = 1;
  for (std::size_t i = names_.size(); i-- > 0;) {
    const auto v = static_cast<std::uint32_t>(i);
    r = s.value(v) ? mk(v, 0, r) : mk(v, r, 0);
  }
  return {this, r};
}

Formula FormulaStore::conj(Formula a, Formula b) {
  check(a);
  check(b);
  return {this, apply(kAnd, a.id_, b.id_)};
}

Formula FormulaStore::disj(Formula a, Formula b) {
  check(a);
  check(b);
  return {this, apply(kOr, a.id_, b.id_)};
}

Formula FormulaStore::diff(Formula a, Formula b) {
  check(a);
  check(b);
  return {this, apply(kDiff, a.id_, b.id_)};
}

Formula FormulaStore::neg(Formula a) {
  check(a);
  return {this, negate(a.id_)};
}

bool FormulaStore::entails(Formula a, Formula b) { return diff(a, b).is_false(); }

bool FormulaStore::eval(Formula f, const State& s) const {
  check(f);
  std::uint32_t n = f.id_;
  while (n > 1) n = s.value(nodes_[n].var) ? nodes_[n].hi : nodes_[n].lo;
  return n == 1;
}

Formula FormulaStore::exists(Formula f, std::span<const FluentId> vars) {
  check(f);
  std::vector<char> mask(names_.size(), 0);
  for (FluentId v : vars) mask.at(v) = 1;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t n) -> std::uint32_t {
    if (n <= 1) return n;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const Node node = nodes_[n];
    std::uint32_t lo = rec(node.lo);
    std::uint32_t hi = rec(node.hi);
    std::uint32_t r = mask[node.var] ? apply(kOr, lo, hi) : mk(node.var, lo, hi);
    memo.emplace(n, r);
    return r;
  };
  return {this, rec(f.id_)};
}

Formula FormulaStore::restrict(Formula f, Literal l) {
  check(f);
  std::vector<std::int8_t> assign(names_.size(), -1);
  assign.at(l.fluent) = l.positive ? 1 : 0;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  return {this, cofactor_assignment(f.id_, assign, memo)};
}

std::uint32_t FormulaStore::cofactor_assignment(
    std::uint32_t f, const std::vector<std::int8_t>& assign,
    std::unordered_map<std::uint32_t, std::uint32_t>& memo) {
  if (f <= 1) return f;
  if (auto it = memo.find(f); it != memo.end()) return it->second;
  const Node n = nodes_[f];
  std::uint32_t r;
  if (assign[n.var] == 1) {
    r = cofactor_assignment(n.hi, assign, memo);
  } else if (assign[n.var] == 0) {
    r = cofactor_assignment(n.lo, assign, memo);
  } else {
    std::uint32_t lo = cofactor_assignment(n.lo, assign, memo);
    std::uint32_t hi = cofactor_assignment(n.hi, assign, memo);
    r = mk(n.var, lo, hi);
  }
  memo.emplace(f, r);
  return r;
}

Formula FormulaStore::substitute(Formula f, std::span<const Formula> pos,
                                 std::span<const Formula> neg, Formula top_image) {
  check(f);
  check(top_image);
  if (pos.size() != names_.size() || neg.size() != names_.size())
    throw std::invalid_argument("substitution must cover every fluent");
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t n) -> std::uint32_t {
    if (n == 0) return 0;
    if (n == 1) return top_image.id_;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const Node node = nodes_[n];
    std::uint32_t hi = apply(kAnd, pos[node.var].id_, rec(node.hi));
    std::uint32_t lo = apply(kAnd, neg[node.var].id_, rec(node.lo));
    std::uint32_t r = apply(kOr, lo, hi);
    memo.emplace(n, r);
    return r;
  };
  return {this, rec(f.id_)};
}

std::vector<FluentId> FormulaStore::support(Formula f) const {
  check(f);
  std::vector<char> seen_var(names_.size(), 0);
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{f.id_};
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (n <= 1 || !seen.insert(n).second) continue;
    seen_var[nodes_[n].var] = 1;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  std::vector<FluentId> out;
  for (std::size_t i = 0; i < seen_var.size(); ++i)
    if (seen_var[i]) out.push_back(static_cast<FluentId>(i));
  return out;
}

double FormulaStore::count_models_real(Formula f) {
  check(f);
  std::unordered_map<std::uint32_t, double> memo;
  std::function<double(std::uint32_t)> rec = [&](std::uint32_t n) -> double {
    if (n <= 1) return static_cast<double>(n);
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const Node node = nodes_[n];
    double lo = rec(node.lo) * std::ldexp(1.0, static_cast<int>(var_of(node.lo) - node.var - 1));
    double hi = rec(node.hi) * std::ldexp(1.0, static_cast<int>(var_of(node.hi) - node.var - 1));
    memo.emplace(n, lo + hi);
    return lo + hi;
  };
  return rec(f.id_) * std::ldexp(1.0, static_cast<int>(var_of(f.id_)));
}

std::uint64_t FormulaStore::count_models(Formula f) {
  double c = count_models_real(f);
  if (c > static_cast<double>(limits_.model_count_cap))
    throw CapExceeded("model count exceeds cap of " + std::to_string(limits_.model_count_cap));
  return static_cast<std::uint64_t>(std::llround(c));
}

void FormulaStore::for_each_model(Formula f, const std::function<void(const State&)>& fn) {
  double c = count_models_real(f);
  if (c > static_cast<double>(limits_.enumeration_cap))
    throw CapExceeded("model enumeration exceeds cap of " + std::to_string(limits_.enumeration_cap));
  const auto nv = static_cast<std::uint32_t>(names_.size());
  State s(nv);
  std::function<void(std::uint32_t, std::uint32_t)> rec = [&](std::uint32_t n, std::uint32_t i) {
    if (n == 0) return;
    if (i == nv) {
      fn(s);
      return;
    }
    const Node node = nodes_[n];
    if (node.var > i) {
      s.set(i, false);
      rec(n, i + 1);
      s.set(i, true);
      rec(n, i + 1);
    } else {
      s.set(i, false);
      rec(node.lo, i + 1);
      s.set(i, true);
      rec(node.hi, i + 1);
    }
    s.set(i, false);
  };
  rec(f.id_, 0);
}

std::vector<State> FormulaStore::models(Formula f) {
  std::vector<State> out;
  for_each_model(f, [&](const State& s) { out.push_back(s); });
  return out;
}

std::vector<State> FormulaStore::models(Formula f, std::span<const FluentId> restrict_to) {
  check(f);
  std::vector<char> keep(names_.size(), 0);
  for (FluentId v : restrict_to) keep.at(v) = 1;
  std::vector<FluentId> drop;
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (!keep[i]) drop.push_back(static_cast<FluentId>(i));
  Formula g = exists(f, drop);
  std::vector<FluentId> order(restrict_to.begin(), restrict_to.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::vector<State> out;
  State s(names_.size());
  std::function<void(std::uint32_t, std::size_t)> rec = [&](std::uint32_t n, std::size_t k) {
    if (n == 0) return;
    if (k == order.size()) {
      if (out.size() >= limits_.enumeration_cap)
        throw CapExceeded("model enumeration exceeds cap");
      out.push_back(s);
      return;
    }
    const FluentId v = order[k];
    for (int val = 0; val < 2; ++val) {
      s.set(v, val == 1);
      std::uint32_t next = n;
      if (n > 1 && nodes_[n].var == v) next = val ? nodes_[n].hi : nodes_[n].lo;
      rec(next, k + 1);
    }
    s.set(v, false);
  };
  rec(g.id_, 0);
  return out;
}

// ---------------------------------------------------------------- normal forms

void FormulaStore::paths(std::uint32_t f, std::uint32_t terminal, std::vector<Cube>& out) {
  Cube current;
  std::function<void(std::uint32_t)> rec = [&](std::uint32_t n) {
    if (n <= 1) {
      if (n == terminal) {
        if (out.size() >= limits_.normal_form_cap)
          throw CapExceeded("normal form exceeds cap of " + std::to_string(limits_.normal_form_cap));
        out.push_back(current);
      }
      return;
    }
    const Node node = nodes_[n];
    current.push_back({node.var, false});
    rec(node.lo);
    current.back() = {node.var, true};
    rec(node.hi);
    current.pop_back();
  };
  rec(f);
}

bool FormulaStore::cube_implies(const Cube& cube, std::uint32_t f) {
  std::vector<std::int8_t> assign(names_.size(), -1);
  for (Literal l : cube) assign[l.fluent] = l.positive ? 1 : 0;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  return cofactor_assignment(f, assign, memo) == 1;
}

bool FormulaStore::implies_clause(std::uint32_t f, const Clause& clause) {
  std::vector<std::int8_t> assign(names_.size(), -1);
  for (Literal l : clause) assign[l.fluent] = l.positive ? 0 : 1;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  return cofactor_assignment(f, assign, memo) == 0;
}

namespace {
template <class T>
void dedupe_keep_order(std::vector<T>& v) {
  std::vector<T> out;
  std::set<T> seen;
  for (auto& x : v)
    if (seen.insert(x).second) out.push_back(x);
  v.swap(out);
}
}  // namespace

const ConstituentSet& FormulaStore::to_constituents(Formula f) {
  check(f);
  if (auto it = constituent_memo_.find(f.id_); it != constituent_memo_.end()) return it->second;
  std::vector<Cube> raw;
  paths(f.id_, 1, raw);
  for (Cube& cube : raw) {
    for (std::size_t i = 0; i < cube.size();) {
      Cube smaller = cube;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
      if (cube_implies(smaller, f.id_)) {
        cube = std::move(smaller);
      } else {
        ++i;
      }
    }
  }
  dedupe_keep_order(raw);
  return constituent_memo_.emplace(f.id_, std::move(raw)).first->second;
}

const ClauseSet& FormulaStore::to_clauses(Formula f) {
  check(f);
  if (auto it = clause_memo_.find(f.id_); it != clause_memo_.end()) return it->second;
  std::vector<Cube> raw;
  paths(f.id_, 0, raw);
  ClauseSet clauses;
  for (const Cube& path : raw) {
    Clause c;
    for (Literal l : path) c.push_back(l.negated());
    for (std::size_t i = 0; i < c.size();) {
      Clause smaller = c;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
      if (implies_clause(f.id_, smaller)) {
        c = std::move(smaller);
      } else {
        ++i;
      }
    }
    clauses.push_back(std::move(c));
  }
  dedupe_keep_order(clauses);
  return clause_memo_.emplace(f.id_, std::move(clauses)).first->second;
}

std::vector<Literal> FormulaStore::constituent_literals(Formula f) {
  std::set<Literal> lits;
  for (const Cube& c : to_constituents(f)) lits.insert(c.begin(), c.end());
  return {lits.begin(), lits.end()};
}

// ---------------------------------------------------------------- text

Formula FormulaStore::build(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::kTrue: return top();
    case K::kFalse: return bottom();
    case K::kAtom: {
      auto f = find_fluent(e.atom);
      if (!f) throw std::invalid_argument("unknown fluent '" + e.atom + "'");
      return literal({*f, true});
    }
    case K::kNot: return neg(build(e.children.front()));
    case K::kAnd: {
      Formula r = top();
      for (const Expr& c : e.children) r = conj(r, build(c));
      return r;
    }
    case K::kOr: {
      Formula r = bottom();
      for (const Expr& c : e.children) r = disj(r, build(c));
      return r;
    }
    case K::kOneOf: {
      std::vector<Formula> parts;
      for (const Expr& c : e.children) parts.push_back(build(c));
      Formula r = bottom();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        Formula alt = parts[i];
        for (std::size_t j = 0; j < parts.size(); ++j)
          if (j != i) alt = conj(alt, neg(parts[j]));
        r = disj(r, alt);
      }
      return r;
    }
  }
  return bottom();
}

Formula FormulaStore::parse(std::string_view text) { return build(parse_expr(text)); }

std::string FormulaStore::literal_name(Literal l) const {
  return l.positive ? names_.at(l.fluent) : "(not " + names_.at(l.fluent) + ")";
}

Expr FormulaStore::cube_expr(std::span<const Literal> cube) const {
  std::vector<Expr> lits;
  for (Literal l : cube) lits.push_back(Expr::literal(names_.at(l.fluent), l.positive));
  if (lits.empty()) return Expr::top();
  if (lits.size() == 1) return lits.front();
  return Expr::conjunction(std::move(lits));
}

Expr FormulaStore::to_expr(Formula f) {
  if (f.is_true()) return Expr::top();
  if (f.is_false()) return Expr::bottom();
  const ConstituentSet& cs = to_constituents(f);
  if (cs.size() == 1) return cube_expr(cs.front());
  std::vector<Expr> alts;
  for (const Cube& c : cs) alts.push_back(cube_expr(c));
  return Expr::disjunction(std::move(alts));
}

std::string FormulaStore::to_string(Formula f) { return bsp::to_string(to_expr(f)); }

void FormulaStore::clear_caches() {
  std::fill(cache_.begin(), cache_.end(), CacheEntry{});
  clause_memo_.clear();
  constituent_memo_.clear();
}

}  // namespace bsp
