#include "bsp/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bsp/sexpr.hpp"

namespace bsp {

bool Problem::has_observations() const {
  return std::any_of(actions.begin(), actions.end(),
                     [](const Action& a) { return a.observational(); });
}

int Problem::find_action(std::string_view n) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].name == n) return static_cast<int>(i);
  return -1;
}

namespace {

struct Names {
  std::map<std::string, FluentId> ids;

  Literal lookup(const std::string& name, bool positive, const SExpr& where) const {
    auto it = ids.find(name);
    if (it == ids.end()) where.fail("unknown fluent '" + name + "'");
    return {it->second, positive};
  }
};

// Sorted, duplicate-free cube; nullopt when contradictory.
std::optional<Cube> normalize_cube(Cube c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (c[i].fluent == c[i + 1].fluent) return std::nullopt;
  return c;
}

// DNF of an s-expression formula as a list of consistent cubes.
std::vector<Cube> dnf(const SExpr& e, const Names& names, bool negated = false) {
  if (e.is_atom) {
    if (e.is("true")) return negated ? std::vector<Cube>{} : std::vector<Cube>{Cube{}};
    if (e.is("false")) return negated ? std::vector<Cube>{Cube{}} : std::vector<Cube>{};
    return {Cube{names.lookup(e.atom, !negated, e)}};
  }
  if (e.items.empty()) e.fail("empty formula");
  const SExpr& head = e.items.front();
  if (head.is("not")) {
    if (e.items.size() != 2) e.fail("'not' takes exactly one argument");
    return dnf(e.items[1], names, !negated);
  }
  bool is_and = head.is("and");
  bool is_or = head.is("or");
  if (head.is("oneof")) {
    // Expand through the generic formula route.
    std::vector<SExpr> alts;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      SExpr conj;
      conj.line = e.line;
      conj.column = e.column;
      SExpr a;
      a.is_atom = true;
      a.atom = "and";
      conj.items.push_back(a);
      for (std::size_t j = 1; j < e.items.size(); ++j) {
        if (i == j) {
          conj.items.push_back(e.items[j]);
        } else {
          SExpr n;
          SExpr notatom;
          notatom.is_atom = true;
          notatom.atom = "not";
          n.items = {notatom, e.items[j]};
          conj.items.push_back(n);
        }
      }
      alts.push_back(conj);
    }
    SExpr disj;
    SExpr oratom;
    oratom.is_atom = true;
    oratom.atom = "or";
    disj.items.push_back(oratom);
    for (auto& a : alts) disj.items.push_back(a);
    return dnf(disj, names, negated);
  }
  if (!is_and && !is_or) {
    if (head.is_atom && e.items.size() == 1) return dnf(head, names, negated);
    e.fail("unknown connective '" + to_string(head) + "'");
  }
  if (negated) std::swap(is_and, is_or);
  std::vector<Cube> result;
  if (is_or) {
    for (std::size_t i = 1; i < e.items.size(); ++i)
      for (Cube& c : dnf(e.items[i], names, negated)) result.push_back(std::move(c));
  } else {
    result.push_back(Cube{});
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      std::vector<Cube> part = dnf(e.items[i], names, negated);
      std::vector<Cube> next;
      for (const Cube& a : result)
        for (const Cube& b : part) {
          Cube c = a;
          c.insert(c.end(), b.begin(), b.end());
          if (auto n = normalize_cube(std::move(c))) next.push_back(std::move(*n));
        }
      result.swap(next);
    }
  }
  std::vector<Cube> out;
  std::set<Cube> seen;
  for (Cube& c : result)
    if (auto n = normalize_cube(std::move(c)); n && seen.insert(*n).second) out.push_back(*n);
  return out;
}

Cube literal_conjunction(const SExpr& e, const Names& names, const char* what) {
  std::vector<Cube> d = dnf(e, names);
  if (d.size() != 1) e.fail(std::string("disjunctive or contradictory ") + what + " is not allowed");
  return d.front();
}

struct RawEffect {
  std::vector<Cube> antecedents;  // disjuncts
  Cube consequent;
};

void collect_effects(const SExpr& e, const Names& names, Cube& unconditional,
                     std::vector<RawEffect>& conditional) {
  if (e.head_is("and")) {
    for (std::size_t i = 1; i < e.items.size(); ++i)
      collect_effects(e.items[i], names, unconditional, conditional);
    return;
  }
  if (e.head_is("when")) {
    if (e.items.size() != 3) e.fail("'when' takes a condition and an effect");
    RawEffect r;
    r.antecedents = dnf(e.items[1], names);
    r.consequent = literal_conjunction(e.items[2], names, "effect consequent");
    conditional.push_back(std::move(r));
    return;
  }
  if (e.head_is("or") || e.head_is("oneof")) e.fail("disjunctive effect consequent is not allowed");
  Cube c = literal_conjunction(e, names, "effect");
  unconditional.insert(unconditional.end(), c.begin(), c.end());
}

std::vector<Action> parse_action(const SExpr& e, const Names& names) {
  if (e.items.size() < 2 || !e.items[1].is_atom) e.fail("action needs a name");
  std::string name = e.items[1].atom;
  std::vector<Cube> pres{Cube{}};
  Cube unconditional;
  std::vector<RawEffect> conditional;
  std::vector<Expr> observations;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const SExpr& key = e.items[i];
    if (i + 1 >= e.items.size()) key.fail("missing value for action field");
    const SExpr& val = e.items[i + 1];
    if (key.is(":precondition")) {
      pres = dnf(val, names);
    } else if (key.is(":effect")) {
      collect_effects(val, names, unconditional, conditional);
    } else if (key.is(":observation") || key.is(":observe")) {
      if (!val.is_list()) val.fail("observation expects a list of readings");
      for (const SExpr& r : val.items) {
        Expr x = expr_from_sexpr(r);
        (void)dnf(r, names);  // name check
        observations.push_back(std::move(x));
      }
    } else {
      key.fail("unknown action field '" + to_string(key) + "'");
    }
  }
  auto u = normalize_cube(unconditional);
  if (!u) e.fail("unconditional effect of '" + name + "' is contradictory");

  Action base;
  base.observations = observations;
  base.effects.push_back({Cube{}, *u});
  for (const RawEffect& r : conditional)
    for (const Cube& ante : r.antecedents) {
      auto cons = normalize_cube(r.consequent);
      if (!cons) e.fail("effect consequent of '" + name + "' is contradictory");
      base.effects.push_back({ante, *cons});
    }

  std::vector<Action> out;
  for (std::size_t k = 0; k < pres.size(); ++k) {
    Action a = base;
    a.name = pres.size() == 1 ? name : name + "#" + std::to_string(k + 1);
    a.precondition = pres[k];
    out.push_back(std::move(a));
  }
  return out;
}

std::string cube_text(const Problem& p, const Cube& c) {
  auto lit = [&](Literal l) {
    return l.positive ? p.fluents[l.fluent] : "(not " + p.fluents[l.fluent] + ")";
  };
  if (c.empty()) return "(and)";
  if (c.size() == 1) return lit(c.front());
  std::string s = "(and";
  for (Literal l : c) s += " " + lit(l);
  return s + ")";
}

}  // namespace

Problem parse_problem(std::string_view text) {
  std::vector<SExpr> top = parse_sexprs(text);
  if (top.size() != 1) throw ParseError("expected a single (define ...) form", 1, 1);
  const SExpr& def = top.front();
  if (!def.head_is("define")) def.fail("expected (define ...)");
  Problem p;
  Names names;
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  std::vector<const SExpr*> actions;
  for (std::size_t i = 1; i < def.items.size(); ++i) {
    const SExpr& s = def.items[i];
    if (s.head_is("problem") || s.head_is("domain")) {
      if (s.items.size() >= 2 && s.items[1].is_atom) p.name = s.items[1].atom;
    } else if (s.head_is(":fluents") || s.head_is(":predicates")) {
      for (std::size_t j = 1; j < s.items.size(); ++j) {
        const SExpr& f = s.items[j];
        std::string n = f.is_atom ? f.atom : (f.items.size() == 1 && f.items[0].is_atom
                                                  ? f.items[0].atom
                                                  : std::string());
        if (n.empty()) f.fail("fluents must be plain names");
        if (names.ids.count(n)) f.fail("duplicate fluent '" + n + "'");
        names.ids.emplace(n, static_cast<FluentId>(p.fluents.size()));
        p.fluents.push_back(n);
      }
    } else if (s.head_is(":action")) {
      actions.push_back(&s);
    } else if (s.head_is(":init")) {
      if (s.items.size() != 2) s.fail(":init takes one formula");
      init = &s.items[1];
    } else if (s.head_is(":goal")) {
      if (s.items.size() != 2) s.fail(":goal takes one formula");
      goal = &s.items[1];
    } else {
      s.fail("unknown section '" + to_string(s.is_atom ? s : s.items.front()) + "'");
    }
  }
  if (!init) def.fail("missing :init");
  if (!goal) def.fail("missing :goal");
  for (const SExpr* a : actions)
    for (Action& x : parse_action(*a, names)) p.actions.push_back(std::move(x));
  (void)dnf(*init, names);
  (void)dnf(*goal, names);
  p.init = expr_from_sexpr(*init);
  p.goal = expr_from_sexpr(*goal);
  validate_problem(p);
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << (p.name.empty() ? "unnamed" : p.name) << ")\n  (:fluents";
  for (const auto& f : p.fluents) os << " " << f;
  os << ")\n";
  for (const Action& a : p.actions) {
    os << "  (:action " << a.name << "\n    :precondition " << cube_text(p, a.precondition);
    std::string eff;
    std::vector<std::string> parts;
    for (Literal l : a.effects.front().consequent)
      parts.push_back(l.positive ? p.fluents[l.fluent] : "(not " + p.fluents[l.fluent] + ")");
    for (std::size_t i = 1; i < a.effects.size(); ++i)
      parts.push_back("(when " + cube_text(p, a.effects[i].antecedent) + " " +
                      cube_text(p, a.effects[i].consequent) + ")");
    os << "\n    :effect (and";
    for (const auto& s : parts) os << " " << s;
    os << ")";
    if (a.observational()) {
      os << "\n    :observation (";
      for (std::size_t i = 0; i < a.observations.size(); ++i)
        os << (i ? " " : "") << to_string(a.observations[i]);
      os << ")";
    }
    os << ")\n";
  }
  os << "  (:init " << to_string(p.init) << ")\n  (:goal " << to_string(p.goal) << "))\n";
  return os.str();
}

void validate_problem(Problem& p) {
  if (p.fluents.empty()) throw ModelError("problem has no fluents");
  std::set<std::string> seen;
  for (const Action& a : p.actions) {
    if (!seen.insert(a.name).second) throw ModelError("duplicate action '" + a.name + "'");
    if (a.effects.empty() || !a.effects.front().antecedent.empty())
      throw ModelError("action '" + a.name + "' lacks an unconditional effect");
  }
  ProblemContext ctx(p);
  if (ctx.init().is_false()) throw ModelError("initial belief is inconsistent");
  if (ctx.goal().is_false()) throw ModelError("goal is inconsistent");
  FormulaStore& st = ctx.store();
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    const auto& rs = ctx.readings(i);
    if (rs.empty()) continue;
    Formula cover = st.bottom();
    bool overlap = false;
    for (std::size_t j = 0; j < rs.size(); ++j) {
      for (std::size_t k = j + 1; k < rs.size(); ++k)
        if (st.consistent(rs[j], rs[k])) overlap = true;
      cover = cover | rs[j];
    }
    if (overlap) p.warnings.push_back("readings of '" + p.actions[i].name + "' overlap");
    if (!cover.is_true())
      p.warnings.push_back("readings of '" + p.actions[i].name + "' are not exhaustive");
  }
}

ProblemContext::ProblemContext(const Problem& p, StoreLimits limits)
    : problem_(&p), store_(std::make_unique<FormulaStore>(p.fluents, limits)) {
  init_ = store_->build(p.init);
  goal_ = store_->build(p.goal);
  for (const Action& a : p.actions) {
    pre_.push_back(store_->cube(a.precondition));
    std::vector<Formula> rs;
    for (const Expr& o : a.observations) rs.push_back(store_->build(o));
    readings_.push_back(std::move(rs));
  }
}

// ---------------------------------------------------------------- generators

namespace {

Literal pos(FluentId f) { return {f, true}; }
Literal negl(FluentId f) { return {f, false}; }

Expr lit_expr(const Problem& p, Literal l) { return Expr::literal(p.fluents[l.fluent], l.positive); }

Expr oneof_expr(const Problem& p, const std::vector<FluentId>& fs) {
  std::vector<Expr> c;
  for (FluentId f : fs) c.push_back(Expr::atom_of(p.fluents[f]));
  return Expr::one_of(std::move(c));
}

Problem finish(Problem p) {
  for (Action& a : p.actions) {
    std::sort(a.precondition.begin(), a.precondition.end());
    for (Effect& e : a.effects) {
      std::sort(e.antecedent.begin(), e.antecedent.end());
      std::sort(e.consequent.begin(), e.consequent.end());
    }
  }
  return p;
}

void need(int n, int lo, const char* what) {
  if (n < lo) throw ModelError(std::string(what) + " needs n >= " + std::to_string(lo));
}

// Bomb-in-toilet family. arm=0, clog=1 when clogged, packages follow.
Problem bomb(int n, bool clog, bool sensing, bool courteous) {
  need(n, 1, "bomb problems");
  Problem p;
  p.name = std::string(courteous ? "cbtc" : clog ? "btc" : "bt") + (sensing ? "s" : "") +
           std::to_string(n);
  p.fluents.push_back("arm");
  if (clog) p.fluents.push_back("clog");
  const FluentId arm = 0;
  const FluentId cl = 1;
  const FluentId first = clog ? 2 : 1;
  std::vector<FluentId> pkgs;
  for (int i = 1; i <= n; ++i) {
    pkgs.push_back(static_cast<FluentId>(p.fluents.size()));
    p.fluents.push_back("inP" + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    Action d;
    d.name = "DunkP" + std::to_string(i + 1);
    if (clog) d.precondition = {negl(cl)};
    d.effects.push_back({{}, clog ? Cube{pos(cl)} : Cube{}});
    d.effects.push_back({{pos(first + static_cast<FluentId>(i))}, {negl(arm)}});
    p.actions.push_back(std::move(d));
  }
  if (clog) {
    Action f;
    f.name = "Flush";
    f.effects.push_back({{}, {negl(cl)}});
    p.actions.push_back(std::move(f));
  }
  if (sensing) {
    for (int i = 0; i < n; ++i) {
      Action s;
      s.name = n == 1 ? "DetectMetal" : "DetectMetalP" + std::to_string(i + 1);
      s.effects.push_back({{}, {}});
      Expr in = Expr::atom_of(p.fluents[pkgs[i]]);
      s.observations = {in, Expr::negation(in)};
      p.actions.push_back(std::move(s));
    }
  }
  std::vector<Expr> init{Expr::atom_of("arm")};
  if (clog) init.push_back(courteous ? Expr::atom_of("clog") : Expr::literal("clog", false));
  init.push_back(oneof_expr(p, pkgs));
  p.init = Expr::conjunction(std::move(init));
  if (courteous)
    p.goal = Expr::conjunction({Expr::literal("clog", false), Expr::literal("arm", false)});
  else
    p.goal = Expr::literal("arm", false);
  return finish(std::move(p));
}

}  // namespace

Problem gen_bt(int n) { return bomb(n, false, false, false); }
Problem gen_bts(int n) { return bomb(n, false, true, false); }
Problem gen_btc(int n) { return bomb(n, true, false, false); }
Problem gen_btcs(int n) { return bomb(n, true, true, false); }
Problem gen_cbtc() { return bomb(2, true, false, true); }

Problem gen_cube(int n) {
  need(n, 1, "cube");
  if (n % 2 == 0) throw ModelError("cube needs an odd side length");
  Problem p;
  p.name = "cube" + std::to_string(n);
  const char axes[3] = {'x', 'y', 'z'};
  for (char a : axes)
    for (int i = 0; i < n; ++i) p.fluents.push_back(std::string(1, a) + std::to_string(i));
  auto id = [&](int axis, int i) { return static_cast<FluentId>(axis * n + i); };
  for (int axis = 0; axis < 3; ++axis) {
    for (int dir : {+1, -1}) {
      Action m;
      m.name = std::string(dir > 0 ? "inc-" : "dec-") + axes[axis];
      m.effects.push_back({{}, {}});
      for (int i = 0; i < n; ++i) {
        int j = i + dir;
        if (j < 0 || j >= n) continue;
        m.effects.push_back({{pos(id(axis, i))}, {pos(id(axis, j)), negl(id(axis, i))}});
      }
      p.actions.push_back(std::move(m));
    }
  }
  std::vector<Expr> init;
  std::vector<Expr> goal;
  const int c = (n - 1) / 2;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<FluentId> fs;
    for (int i = 0; i < n; ++i) fs.push_back(id(axis, i));
    init.push_back(oneof_expr(p, fs));
    goal.push_back(lit_expr(p, pos(id(axis, c))));
  }
  p.init = Expr::conjunction(std::move(init));
  p.goal = Expr::conjunction(std::move(goal));
  return finish(std::move(p));
}

Problem gen_ring(int n) {
  need(n, 1, "ring");
  Problem p;
  p.name = "ring" + std::to_string(n);
  auto at = [](int i) { return static_cast<FluentId>(4 * i); };
  auto open = [](int i) { return static_cast<FluentId>(4 * i + 1); };
  auto closed = [](int i) { return static_cast<FluentId>(4 * i + 2); };
  auto locked = [](int i) { return static_cast<FluentId>(4 * i + 3); };
  for (int i = 1; i <= n; ++i) {
    for (const char* f : {"at", "open", "closed", "locked"})
      p.fluents.push_back(std::string(f) + std::to_string(i));
  }
  for (int dir : {+1, -1}) {
    Action m;
    m.name = dir > 0 ? "move-right" : "move-left";
    m.effects.push_back({{}, {}});
    for (int i = 0; i < n; ++i) {
      int j = ((i + dir) % n + n) % n;
      if (j == i) continue;
      m.effects.push_back({{pos(at(i))}, {pos(at(j)), negl(at(i))}});
    }
    p.actions.push_back(std::move(m));
  }
  Action close;
  close.name = "close";
  close.effects.push_back({{}, {}});
  Action lock;
  lock.name = "lock";
  lock.effects.push_back({{}, {}});
  for (int i = 0; i < n; ++i) {
    close.effects.push_back({{pos(at(i)), pos(open(i))}, {pos(closed(i)), negl(open(i))}});
    lock.effects.push_back({{pos(at(i)), pos(closed(i))}, {pos(locked(i)), negl(closed(i))}});
  }
  p.actions.push_back(std::move(close));
  p.actions.push_back(std::move(lock));
  std::vector<Expr> init;
  std::vector<FluentId> rooms;
  for (int i = 0; i < n; ++i) rooms.push_back(at(i));
  init.push_back(oneof_expr(p, rooms));
  std::vector<Expr> goal;
  for (int i = 0; i < n; ++i) {
    init.push_back(oneof_expr(p, {open(i), closed(i), locked(i)}));
    goal.push_back(lit_expr(p, pos(locked(i))));
  }
  p.init = Expr::conjunction(std::move(init));
  p.goal = goal.size() == 1 ? goal.front() : Expr::conjunction(std::move(goal));
  return finish(std::move(p));
}

Problem generate(std::string_view spec) {
  std::string s(spec);
  std::string name = s;
  int n = 0;
  bool has_n = false;
  if (auto colon = s.find(':'); colon != std::string::npos) {
    name = s.substr(0, colon);
    try {
      std::size_t used = 0;
      n = std::stoi(s.substr(colon + 1), &used);
      if (used != s.size() - colon - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ModelError("bad generator size in '" + s + "'");
    }
    has_n = true;
  }
  auto sized = [&]() {
    if (!has_n) throw ModelError("generator '" + name + "' needs a size, e.g. " + name + ":3");
    return n;
  };
  if (name == "bt") return gen_bt(sized());
  if (name == "bts") return gen_bts(sized());
  if (name == "btc") return gen_btc(sized());
  if (name == "btcs") return gen_btcs(sized());
  if (name == "cbtc") return gen_cbtc();
  if (name == "cube") return gen_cube(sized());
  if (name == "ring") return gen_ring(sized());
  throw ModelError("unknown generator '" + name + "'");
}

}  // namespace bsp
