#include "bsp/transition.hpp"

#include <set>

namespace bsp {

namespace {

bool contains(const Cube& c, Literal l) {
  for (Literal x : c)
    if (x == l) return true;
  return false;
}

void check_causative(const ProblemContext& ctx, std::size_t action) {
  if (ctx.problem().actions.at(action).observational())
    throw std::invalid_argument("regression is undefined for sensing action '" +
                                ctx.problem().actions[action].name + "'");
}

}  // namespace

Formula causes(const ProblemContext& ctx, std::size_t action, Literal l) {
  FormulaStore& st = ctx.store();
  Formula r = st.literal(l);
  for (const Effect& e : ctx.problem().actions.at(action).effects)
    if (contains(e.consequent, l)) r = r | st.cube(e.antecedent);
  return r;
}

Formula preserves(const ProblemContext& ctx, std::size_t action, Literal l) {
  FormulaStore& st = ctx.store();
  Formula r = st.top();
  for (const Effect& e : ctx.problem().actions.at(action).effects)
    if (contains(e.consequent, l.negated())) r = r & ~st.cube(e.antecedent);
  return r;
}

Formula regress(const ProblemContext& ctx, Formula bs, std::size_t action) {
  check_causative(ctx, action);
  FormulaStore& st = ctx.store();
  const std::size_t n = st.num_fluents();
  std::vector<Formula> pos(n), neg(n);
  for (std::size_t f = 0; f < n; ++f) {
    Literal p{static_cast<FluentId>(f), true};
    pos[f] = causes(ctx, action, p) & preserves(ctx, action, p);
    neg[f] = causes(ctx, action, p.negated()) & preserves(ctx, action, p.negated());
  }
  return ctx.precondition(action) & st.substitute(bs, pos, neg, st.top());
}

bool is_relevant(const ProblemContext& ctx, std::size_t action, Formula bs) {
  if (bs.is_false()) return false;
  const Action& a = ctx.problem().actions.at(action);
  const ConstituentSet& cs = ctx.store().to_constituents(bs);
  for (const Cube& c : cs)
    for (Literal l : a.unconditional().consequent)
      if (contains(c, l.negated())) return false;
  std::set<Literal> present;
  for (const Cube& c : cs) present.insert(c.begin(), c.end());
  for (const Effect& e : a.effects)
    for (Literal l : e.consequent)
      if (present.count(l)) return true;
  return false;
}

State progress_state(const Problem& p, const State& s, std::size_t action) {
  const Action& a = p.actions.at(action);
  if (!s.satisfies(a.precondition))
    throw std::invalid_argument("precondition of '" + a.name + "' does not hold");
  std::vector<std::int8_t> set(s.size(), -1);
  for (const Effect& e : a.effects) {
    if (!s.satisfies(e.antecedent)) continue;
    for (Literal l : e.consequent) {
      std::int8_t v = l.positive ? 1 : 0;
      if (set[l.fluent] >= 0 && set[l.fluent] != v)
        throw IllFormedAction("conflicting effects of '" + a.name + "' on '" +
                              p.fluents[l.fluent] + "'");
      set[l.fluent] = v;
    }
  }
  State next = s;
  for (std::size_t f = 0; f < set.size(); ++f)
    if (set[f] >= 0) next.set(static_cast<FluentId>(f), set[f] == 1);
  return next;
}

Formula progress_causative(const ProblemContext& ctx, Formula bs, std::size_t action) {
  FormulaStore& st = ctx.store();
  if (!st.entails(bs, ctx.precondition(action))) return st.bottom();
  const Action& a = ctx.problem().actions.at(action);
  std::vector<Formula> ante;
  for (const Effect& e : a.effects) ante.push_back(st.cube(e.antecedent));
  std::vector<std::size_t> fired;
  // Partition bs by which effects fire, then apply each fixed firing pattern.
  std::function<Formula(Formula, std::size_t)> split = [&](Formula b, std::size_t i) -> Formula {
    if (b.is_false()) return b;
    if (i == a.effects.size()) {
      std::vector<std::int8_t> set(st.num_fluents(), -1);
      for (std::size_t j : fired)
        for (Literal l : a.effects[j].consequent) {
          std::int8_t v = l.positive ? 1 : 0;
          if (set[l.fluent] >= 0 && set[l.fluent] != v)
            throw IllFormedAction("conflicting effects of '" + a.name + "' on '" +
                                  st.fluent_name(l.fluent) + "'");
          set[l.fluent] = v;
        }
      std::vector<FluentId> touched;
      Cube assigned;
      for (std::size_t f = 0; f < set.size(); ++f)
        if (set[f] >= 0) {
          touched.push_back(static_cast<FluentId>(f));
          assigned.push_back({static_cast<FluentId>(f), set[f] == 1});
        }
      return st.exists(b, touched) & st.cube(assigned);
    }
    if (a.effects[i].consequent.empty()) return split(b, i + 1);
    if (st.entails(b, ante[i])) {
      fired.push_back(i);
      Formula r = split(b, i + 1);
      fired.pop_back();
      return r;
    }
    Formula with = b & ante[i];
    if (with.is_false()) return split(b, i + 1);
    fired.push_back(i);
    Formula r1 = split(with, i + 1);
    fired.pop_back();
    Formula r0 = split(st.diff(b, ante[i]), i + 1);
    return r1 | r0;
  };
  return split(bs, 0);
}

std::vector<Branch> progress_branches(const ProblemContext& ctx, Formula bs, std::size_t action) {
  std::vector<Branch> out;
  if (bs.is_false() || !ctx.store().entails(bs, ctx.precondition(action))) return out;
  Formula next = progress_causative(ctx, bs, action);
  const auto& rs = ctx.readings(action);
  if (rs.empty()) {
    out.push_back({Branch::kNoReading, next});
    return out;
  }
  for (std::size_t i = 0; i < rs.size(); ++i) {
    Formula b = next & rs[i];
    if (!b.is_false()) out.push_back({i, b});
  }
  return out;
}

std::vector<Formula> progress(const ProblemContext& ctx, Formula bs, std::size_t action) {
  std::vector<Formula> out;
  for (const Branch& b : progress_branches(ctx, bs, action)) out.push_back(b.belief);
  return out;
}

}  // namespace bsp
