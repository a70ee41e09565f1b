#include "bsp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bsp {

namespace {

std::vector<std::uint32_t> codes(const Cube& c) {
  std::vector<std::uint32_t> out;
  for (Literal l : c) out.push_back(l.code());
  return out;
}

bool inconsistent(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  for (std::uint32_t x : a)
    for (std::uint32_t y : b)
      if ((x ^ 1u) == y) return true;
  return false;
}

bool subset(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  for (std::uint32_t x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

}  // namespace

GraphDomain::GraphDomain(const Problem& p) : problem_(&p) {
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    const Action& a = p.actions[i];
    GraphAction ga;
    ga.name = a.name;
    ga.pre = codes(a.precondition);
    ga.source = static_cast<int>(i);
    for (std::size_t j = 0; j < a.effects.size(); ++j) {
      ga.effects.push_back(static_cast<std::uint32_t>(effects_.size()));
      effects_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          codes(a.effects[j].antecedent), codes(a.effects[j].consequent)});
    }
    actions_.push_back(std::move(ga));
  }
  for (std::uint32_t l = 0; l < num_literals(); ++l) {
    GraphAction ga;
    ga.name = "persist " + literal_name(l);
    ga.pre = {l};
    ga.persisted = static_cast<int>(l);
    ga.effects.push_back(static_cast<std::uint32_t>(effects_.size()));
    effects_.push_back({static_cast<std::uint32_t>(actions_.size()), 0, {}, {l}});
    actions_.push_back(std::move(ga));
  }
  support_.assign(num_literals(), {});
  for (std::uint32_t e = 0; e < effects_.size(); ++e)
    for (std::uint32_t l : effects_[e].consequent) support_[l].push_back(e);

  induced_.assign(effects_.size(), {});
  for (std::uint32_t e = 0; e < effects_.size(); ++e) {
    const GraphAction& a = actions_[effects_[e].action];
    std::vector<std::uint32_t> given = a.pre;
    given.insert(given.end(), effects_[e].antecedent.begin(), effects_[e].antecedent.end());
    for (std::uint32_t f : a.effects)
      if (f != e && subset(effects_[f].antecedent, given)) induced_[e].push_back(f);
  }

  const std::size_t na = actions_.size();
  act_interfere_.assign(na * na, 0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = a + 1; b < na; ++b) {
      const auto& pa = actions_[a].pre;
      const auto& pb = actions_[b].pre;
      const auto& ea = effects_[actions_[a].effects.front()].consequent;
      const auto& eb = effects_[actions_[b].effects.front()].consequent;
      bool x = inconsistent(ea, pb) || inconsistent(pa, eb) || inconsistent(ea, eb) ||
               inconsistent(pa, pb);
      act_interfere_[a * na + b] = act_interfere_[b * na + a] = x;
    }
  const std::size_t ne = effects_.size();
  eff_interfere_.assign(ne * ne, 0);
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t f = e + 1; f < ne; ++f) {
      const GraphEffect& x = effects_[e];
      const GraphEffect& y = effects_[f];
      bool r = inconsistent(x.consequent, y.consequent) || inconsistent(x.antecedent, y.antecedent);
      if (x.action != y.action)
        r = r || inconsistent(x.consequent, y.antecedent) || inconsistent(x.antecedent, y.consequent);
      eff_interfere_[e * ne + f] = eff_interfere_[f * ne + e] = r;
    }
}

std::string GraphDomain::literal_name(std::uint32_t lit) const {
  Literal l = Literal::from_code(lit);
  const std::string& n = problem_->fluents.at(l.fluent);
  return l.positive ? n : "(not " + n + ")";
}

std::string GraphDomain::effect_name(std::uint32_t e) const {
  const GraphEffect& x = effects_[e];
  return actions_[x.action].name + "/" + std::to_string(x.index);
}

std::vector<std::uint32_t> literal_codes(std::span<const Literal> lits) {
  std::vector<std::uint32_t> out;
  for (Literal l : lits) out.push_back(l.code());
  return out;
}

// ---------------------------------------------------------------- single graph

SingleGraph::SingleGraph(const GraphDomain& d, std::span<const std::uint32_t> initial,
                         MutexDepth depth, int level_cap, const Deadline& deadline)
    : domain_(&d), depth_(depth) {
  const std::size_t nl = d.num_literals(), na = d.num_actions(), ne = d.num_effects();
  lit_level_.assign(nl, kNotReached);
  act_level_.assign(na, kNotReached);
  eff_level_.assign(ne, kNotReached);
  SgLayer first;
  first.lits.assign(nl, 0);
  for (std::uint32_t l : initial) first.lits.at(l) = 1;
  if (depth != MutexDepth::kNone)
    for (std::uint32_t l = 0; l < nl; l += 2)
      if (first.lits[l] && first.lits[l + 1]) first.lit_mutex.insert(l, l + 1);
  for (std::uint32_t l = 0; l < nl; ++l)
    if (first.lits[l]) lit_level_[l] = 0;
  layers_.push_back(std::move(first));

  for (int k = 0;; ++k) {
    deadline.check();
    SgLayer& cur = layers_[static_cast<std::size_t>(k)];
    cur.acts.assign(na, 0);
    cur.effs.assign(ne, 0);
    for (std::uint32_t a = 0; a < na; ++a) {
      bool ok = true;
      for (std::uint32_t l : d.action(a).pre) ok = ok && cur.lits[l];
      cur.acts[a] = ok;
      if (ok && act_level_[a] == kNotReached) act_level_[a] = k;
    }
    for (std::uint32_t e = 0; e < ne; ++e) {
      const GraphEffect& x = d.effect(e);
      bool ok = cur.acts[x.action] != 0;
      for (std::uint32_t l : x.antecedent) ok = ok && cur.lits[l];
      cur.effs[e] = ok;
      if (ok && eff_level_[e] == kNotReached) eff_level_[e] = k;
    }
    if (depth != MutexDepth::kNone) {
      cur.act_mutex = sg_action_mutexes(d, cur, depth);
      cur.eff_mutex = sg_effect_mutexes(d, cur, depth);
    }
    SgLayer next;
    next.lits.assign(nl, 0);
    for (std::uint32_t e = 0; e < ne; ++e)
      if (cur.effs[e])
        for (std::uint32_t l : d.effect(e).consequent) next.lits[l] = 1;
    if (depth != MutexDepth::kNone) next.lit_mutex = sg_literal_mutexes(d, cur, next.lits, depth);
    if (next.lits == cur.lits && next.lit_mutex == cur.lit_mutex) break;
    if (k + 1 > level_cap) {
      truncated_ = true;
      break;
    }
    for (std::uint32_t l = 0; l < nl; ++l)
      if (next.lits[l] && lit_level_[l] == kNotReached) lit_level_[l] = k + 1;
    layers_.push_back(std::move(next));
  }
}

const SgLayer& SingleGraph::layer(int k) const {
  if (k < 0) throw std::out_of_range("negative level");
  return layers_[std::min<std::size_t>(static_cast<std::size_t>(k), layers_.size() - 1)];
}

// ---------------------------------------------------------------- beliefs

std::vector<Literal> aggregate_state(FormulaStore& st, Formula bs) {
  return st.constituent_literals(bs);
}

std::vector<State> sample_states(FormulaStore& st, Formula bs, double fraction,
                                 std::mt19937_64& rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("sampling fraction must lie in (0, 1]");
  std::vector<State> all = st.models(bs);
  const std::size_t n = all.size();
  if (n == 0) return all;
  auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  m = std::clamp<std::size_t>(m, 1, n);
  if (m == n) return all;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  std::vector<State> out;
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

std::vector<State> sample_states(FormulaStore& st, Formula bs, double fraction,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_states(st, bs, fraction, rng);
}

GraphSet::GraphSet(const GraphDomain& d, std::vector<State> worlds, MutexDepth depth,
                   int level_cap, const Deadline& deadline)
    : worlds_(std::move(worlds)) {
  graphs_.reserve(worlds_.size());
  for (const State& s : worlds_) {
    auto lits = s.literals();
    auto init = literal_codes(lits);
    graphs_.emplace_back(d, init, depth, level_cap, deadline);
  }
}

// ---------------------------------------------------------------- LUG

Lug::Lug(const GraphDomain& d, FormulaStore& st, Formula projected, MutexScheme scheme,
         int level_cap, const Deadline& deadline)
    : domain_(&d), store_(&st), projected_(projected), scheme_(scheme) {
  const std::size_t nl = d.num_literals(), na = d.num_actions(), ne = d.num_effects();
  const bool cross = scheme.cross_worlds();
  if (cross) {
    if (st.count_models_real(projected) > static_cast<double>(kCrossWorldCap))
      throw CapExceeded("cross-world mutexes need at most " + std::to_string(kCrossWorldCap) +
                        " worlds");
    worlds_ = st.models(projected);
  }
  const Formula none = st.bottom();
  LugLayer first;
  first.lits.assign(nl, none);
  for (std::uint32_t l = 0; l < nl; ++l)
    first.lits[l] = st.literal(Literal::from_code(l)) & projected;
  first.lit_cross = CrossMap(worlds_.size());
  layers_.push_back(std::move(first));

  for (int k = 0;; ++k) {
    deadline.check();
    LugLayer& cur = layers_[static_cast<std::size_t>(k)];
    cur.acts.assign(na, none);
    cur.effs.assign(ne, none);
    for (std::uint32_t a = 0; a < na; ++a) {
      Formula lab = projected;
      for (std::uint32_t l : d.action(a).pre) lab = lab & cur.lits[l];
      cur.acts[a] = lab;
    }
    for (std::uint32_t e = 0; e < ne; ++e) {
      const GraphEffect& x = d.effect(e);
      Formula lab = cur.acts[x.action];
      for (std::uint32_t l : x.antecedent) lab = lab & cur.lits[l];
      cur.effs[e] = lab;
    }
    Presence lit_in, act_in, eff_in;
    if (scheme.enabled()) {
      cur.act_mutex = lug_action_mutexes(d, cur, projected, scheme.depth);
      cur.eff_mutex = lug_effect_mutexes(d, cur, projected, scheme.depth);
      if (cross) {
        lit_in = presence_of(cur.lits, worlds_);
        act_in = presence_of(cur.acts, worlds_);
        eff_in = presence_of(cur.effs, worlds_);
        cur.act_cross = lug_action_cross(d, cur, act_in, lit_in, scheme);
        cur.eff_cross = lug_effect_cross(d, cur, eff_in, act_in, lit_in, scheme);
      }
    }
    LugLayer next;
    next.lits.assign(nl, none);
    for (std::uint32_t l = 0; l < nl; ++l) {
      Formula lab = none;
      for (std::uint32_t e : d.supporters(l)) lab = lab | cur.effs[e];
      next.lits[l] = lab;
    }
    next.lit_cross = CrossMap(worlds_.size());
    if (scheme.enabled()) {
      next.lit_mutex = lug_literal_mutexes(d, cur, next.lits, scheme.depth);
      if (cross) next.lit_cross = lug_literal_cross(d, cur, eff_in, presence_of(next.lits, worlds_), scheme);
    }
    if (next.lits == cur.lits && next.lit_mutex == cur.lit_mutex && next.lit_cross == cur.lit_cross)
      break;
    if (k + 1 > level_cap) {
      truncated_ = true;
      break;
    }
    layers_.push_back(std::move(next));
  }
}

const LugLayer& Lug::layer(int k) const {
  if (k < 0) throw std::out_of_range("negative level");
  return layers_[std::min<std::size_t>(static_cast<std::size_t>(k), layers_.size() - 1)];
}

Formula Lug::literal_mutex(int k, std::uint32_t a, std::uint32_t b) const {
  return layer(k).lit_mutex.get(a, b, store_->bottom());
}
Formula Lug::action_mutex(int k, std::uint32_t a, std::uint32_t b) const {
  return layer(k).act_mutex.get(a, b, store_->bottom());
}
Formula Lug::effect_mutex(int k, std::uint32_t a, std::uint32_t b) const {
  return layer(k).eff_mutex.get(a, b, store_->bottom());
}

Formula Lug::extended_label(int k, const Expr& e) const {
  using K = Expr::Kind;
  FormulaStore& st = *store_;
  auto literal_of = [&](const Expr& atom, bool positive) {
    auto f = st.find_fluent(atom.atom);
    if (!f) throw std::invalid_argument("unknown fluent '" + atom.atom + "'");
    return literal_label(k, Literal{*f, positive}.code());
  };
  switch (e.kind) {
    case K::kTrue: return projected_;
    case K::kFalse: return st.bottom();
    case K::kAtom: return literal_of(e, true);
    case K::kNot:
      if (e.children.front().kind != K::kAtom)
        return extended_label(k, to_nnf(e));
      return literal_of(e.children.front(), false);
    case K::kAnd: {
      Formula r = projected_;
      for (const Expr& c : e.children) r = r & extended_label(k, c);
      return r;
    }
    case K::kOr: {
      Formula r = st.bottom();
      for (const Expr& c : e.children) r = r | extended_label(k, c);
      return r;
    }
    case K::kOneOf: return extended_label(k, to_nnf(e));
  }
  return st.bottom();
}

Formula Lug::cube_label(int k, std::span<const Literal> cube) const {
  Formula r = projected_;
  for (Literal l : cube) r = r & literal_label(k, l.code());
  return r;
}

Formula Lug::clause_label(int k, std::span<const Literal> clause) const {
  Formula r = store_->bottom();
  for (Literal l : clause) r = r | literal_label(k, l.code());
  return r;
}

std::string Lug::dump() const {
  std::ostringstream os;
  const GraphDomain& d = *domain_;
  for (int k = 0; k <= last_level(); ++k) {
    const LugLayer& L = layers_[static_cast<std::size_t>(k)];
    os << "level " << k << "\n";
    for (std::uint32_t l = 0; l < L.lits.size(); ++l)
      if (!L.lits[l].is_false())
        os << "  L " << d.literal_name(l) << " : " << store_->to_string(L.lits[l]) << "\n";
    for (std::uint32_t a = 0; a < L.acts.size(); ++a)
      if (!L.acts[a].is_false() && !d.is_persistence(a))
        os << "  A " << d.action(a).name << " : " << store_->to_string(L.acts[a]) << "\n";
    for (std::uint32_t e = 0; e < L.effs.size(); ++e)
      if (!L.effs[e].is_false() && !d.is_persistence_effect(e))
        os << "  E " << d.effect_name(e) << " : " << store_->to_string(L.effs[e]) << "\n";
    if (scheme_.enabled())
      os << "  mutexes: " << L.lit_mutex.size() << " literal, " << L.act_mutex.size()
         << " action, " << L.eff_mutex.size() << " effect\n";
  }
  if (truncated_) os << "truncated at level cap\n";
  return os.str();
}

}  // namespace bsp
