#include "bsp/mutex.hpp"

#include "bsp/graph.hpp"

namespace bsp {

MutexScheme MutexScheme::parse(std::string_view text) {
  MutexScheme m;
  std::string_view depth = text;
  if (auto dash = text.find('-'); dash != std::string_view::npos) {
    depth = text.substr(0, dash);
    std::string_view w = text.substr(dash + 1);
    if (w == "sx") m.worlds = MutexWorlds::kSame;
    else if (w == "ix") m.worlds = MutexWorlds::kIntersect;
    else if (w == "cx") m.worlds = MutexWorlds::kCross;
    else throw std::invalid_argument("unknown mutex world pairing '" + std::string(w) + "'");
  }
  if (depth == "nx") m.depth = MutexDepth::kNone;
  else if (depth == "stx") m.depth = MutexDepth::kStatic;
  else if (depth == "dyx") m.depth = MutexDepth::kDynamic;
  else if (depth == "fx") m.depth = MutexDepth::kFull;
  else throw std::invalid_argument("unknown mutex scheme '" + std::string(text) + "'");
  return m;
}

std::string MutexScheme::to_string() const {
  std::string s;
  switch (depth) {
    case MutexDepth::kNone: return "nx";
    case MutexDepth::kStatic: s = "stx"; break;
    case MutexDepth::kDynamic: s = "dyx"; break;
    case MutexDepth::kFull: s = "fx"; break;
  }
  switch (worlds) {
    case MutexWorlds::kSame: return s;
    case MutexWorlds::kIntersect: return s + "-ix";
    case MutexWorlds::kCross: return s + "-cx";
  }
  return s;
}

void LabelMap::add(std::uint32_t a, std::uint32_t b, Formula label) {
  if (label.is_false()) return;
  auto [it, fresh] = map_.emplace(pair_key(a, b), label);
  if (!fresh) it->second = it->second | label;
}

Formula LabelMap::get(std::uint32_t a, std::uint32_t b, Formula none) const {
  auto it = map_.find(pair_key(a, b));
  return it == map_.end() ? none : it->second;
}

void CrossMap::set(std::uint32_t x, std::size_t i, std::uint32_t y, std::size_t j) {
  auto& bits = map_[pair_key(x, y)];
  if (bits.empty()) bits.assign(worlds_ * worlds_, false);
  if (x <= y) bits[i * worlds_ + j] = true;
  if (y <= x) bits[j * worlds_ + i] = true;
}

bool CrossMap::get(std::uint32_t x, std::size_t i, std::uint32_t y, std::size_t j) const {
  auto it = map_.find(pair_key(x, y));
  if (it == map_.end()) return false;
  return x <= y ? it->second[i * worlds_ + j] : it->second[j * worlds_ + i];
}

namespace {

std::vector<std::uint32_t> present(const std::vector<char>& v) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < v.size(); ++i)
    if (v[i]) out.push_back(i);
  return out;
}

std::vector<std::uint32_t> present(const std::vector<Formula>& v) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < v.size(); ++i)
    if (!v[i].is_false()) out.push_back(i);
  return out;
}

bool needs_clash(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                 const PairSet& lit_mutex) {
  for (std::uint32_t l : a)
    for (std::uint32_t m : b)
      if (l != m && lit_mutex.contains(l, m)) return true;
  return false;
}

Formula needs_clash(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                    const LabelMap& lit_mutex, Formula none) {
  Formula r = none;
  for (std::uint32_t l : a)
    for (std::uint32_t m : b)
      if (l != m) r = r | lit_mutex.get(l, m, none);
  return r;
}

}  // namespace

// ---------------------------------------------------------------- single graph

PairSet sg_action_mutexes(const GraphDomain& d, const SgLayer& layer, MutexDepth depth) {
  PairSet out;
  if (depth == MutexDepth::kNone) return out;
  auto acts = present(layer.acts);
  for (std::size_t i = 0; i < acts.size(); ++i)
    for (std::size_t j = i + 1; j < acts.size(); ++j) {
      std::uint32_t a = acts[i], b = acts[j];
      if (d.actions_interfere(a, b) ||
          (depth >= MutexDepth::kDynamic &&
           needs_clash(d.action(a).pre, d.action(b).pre, layer.lit_mutex)))
        out.insert(a, b);
    }
  return out;
}

PairSet sg_effect_mutexes(const GraphDomain& d, const SgLayer& layer, MutexDepth depth) {
  PairSet base;
  if (depth == MutexDepth::kNone) return base;
  auto effs = present(layer.effs);
  for (std::size_t i = 0; i < effs.size(); ++i)
    for (std::size_t j = i + 1; j < effs.size(); ++j) {
      std::uint32_t e = effs[i], f = effs[j];
      const GraphEffect& x = d.effect(e);
      const GraphEffect& y = d.effect(f);
      if ((x.action != y.action && layer.act_mutex.contains(x.action, y.action)) ||
          d.effects_interfere(e, f) ||
          (depth >= MutexDepth::kDynamic && needs_clash(x.antecedent, y.antecedent, layer.lit_mutex)))
        base.insert(e, f);
    }
  if (depth < MutexDepth::kFull) return base;
  PairSet out = base;
  for (std::uint32_t e : effs)
    for (std::uint32_t j : d.induced(e)) {
      if (!layer.effs[j]) continue;
      for (std::uint32_t f : effs)
        if (f != e && base.contains(j, f)) out.insert(e, f);
    }
  return out;
}

PairSet sg_literal_mutexes(const GraphDomain& d, const SgLayer& prev,
                           const std::vector<char>& lits, MutexDepth depth) {
  PairSet out;
  if (depth == MutexDepth::kNone) return out;
  auto ls = present(lits);
  for (std::size_t i = 0; i < ls.size(); ++i)
    for (std::size_t j = i + 1; j < ls.size(); ++j) {
      std::uint32_t l = ls[i], m = ls[j];
      if ((l ^ 1u) == m) {
        out.insert(l, m);
        continue;
      }
      if (depth < MutexDepth::kDynamic) continue;
      bool all = true;
      for (std::uint32_t p : d.supporters(l)) {
        if (!prev.effs[p]) continue;
        for (std::uint32_t q : d.supporters(m)) {
          if (!prev.effs[q]) continue;
          if (p == q || !prev.eff_mutex.contains(p, q)) {
            all = false;
            break;
          }
        }
        if (!all) break;
      }
      if (all) out.insert(l, m);
    }
  return out;
}

// ---------------------------------------------------------------- labelled, same world

LabelMap lug_action_mutexes(const GraphDomain& d, const LugLayer& layer, Formula projected,
                            MutexDepth depth) {
  LabelMap out;
  if (depth == MutexDepth::kNone) return out;
  FormulaStore& st = projected.store();
  const Formula none = st.bottom();
  auto acts = present(layer.acts);
  for (std::size_t i = 0; i < acts.size(); ++i)
    for (std::size_t j = i + 1; j < acts.size(); ++j) {
      std::uint32_t a = acts[i], b = acts[j];
      Formula lab = d.actions_interfere(a, b) ? projected : none;
      if (depth >= MutexDepth::kDynamic && !lab.is_true()) {
        Formula cn = needs_clash(d.action(a).pre, d.action(b).pre, layer.lit_mutex, none);
        if (!cn.is_false()) lab = lab | (layer.acts[a] & layer.acts[b] & cn);
      }
      out.add(a, b, lab);
    }
  return out;
}

LabelMap lug_effect_mutexes(const GraphDomain& d, const LugLayer& layer, Formula projected,
                            MutexDepth depth) {
  LabelMap base;
  if (depth == MutexDepth::kNone) return base;
  FormulaStore& st = projected.store();
  const Formula none = st.bottom();
  auto effs = present(layer.effs);
  for (std::size_t i = 0; i < effs.size(); ++i)
    for (std::size_t j = i + 1; j < effs.size(); ++j) {
      std::uint32_t e = effs[i], f = effs[j];
      const GraphEffect& x = d.effect(e);
      const GraphEffect& y = d.effect(f);
      Formula lab = none;
      if (x.action != y.action) lab = layer.act_mutex.get(x.action, y.action, none);
      if (d.effects_interfere(e, f)) lab = lab | projected;
      if (depth >= MutexDepth::kDynamic) {
        Formula cn = needs_clash(x.antecedent, y.antecedent, layer.lit_mutex, none);
        if (!cn.is_false()) lab = lab | (layer.effs[e] & layer.effs[f] & cn);
      }
      base.add(e, f, lab);
    }
  if (depth < MutexDepth::kFull) return base;
  LabelMap out = base;
  for (std::uint32_t e : effs)
    for (std::uint32_t j : d.induced(e)) {
      if (layer.effs[j].is_false()) continue;
      for (std::uint32_t f : effs) {
        if (f == e) continue;
        Formula m = base.get(j, f, none);
        if (!m.is_false()) out.add(e, f, m & layer.effs[e] & layer.effs[j]);
      }
    }
  return out;
}

LabelMap lug_literal_mutexes(const GraphDomain& d, const LugLayer& prev,
                             const std::vector<Formula>& lits, MutexDepth depth) {
  LabelMap out;
  if (depth == MutexDepth::kNone) return out;
  auto ls = present(lits);
  if (ls.empty()) return out;
  FormulaStore& st = lits[ls.front()].store();
  const Formula none = st.bottom();
  for (std::size_t i = 0; i < ls.size(); ++i)
    for (std::size_t j = i + 1; j < ls.size(); ++j) {
      std::uint32_t l = ls[i], m = ls[j];
      Formula both = lits[l] & lits[m];
      if (both.is_false()) continue;
      if ((l ^ 1u) == m) {
        out.add(l, m, both);
        continue;
      }
      if (depth < MutexDepth::kDynamic) continue;
      Formula s = both;
      for (std::uint32_t p : d.supporters(l)) {
        if (prev.effs[p].is_false()) continue;
        for (std::uint32_t q : d.supporters(m)) {
          if (prev.effs[q].is_false()) continue;
          if (p == q) {
            s = s & ~prev.effs[p];
          } else {
            Formula together = prev.effs[p] & prev.effs[q];
            s = s & (~together | prev.eff_mutex.get(p, q, none));
          }
          if (s.is_false()) break;
        }
        if (s.is_false()) break;
      }
      out.add(l, m, s);
    }
  return out;
}

// ---------------------------------------------------------------- cross world

Presence presence_of(const std::vector<Formula>& labels, const std::vector<State>& worlds) {
  Presence out(labels.size(), std::vector<char>(worlds.size(), 0));
  for (std::size_t x = 0; x < labels.size(); ++x) {
    if (labels[x].is_false()) continue;
    for (std::size_t w = 0; w < worlds.size(); ++w)
      out[x][w] = labels[x].store().eval(labels[x], worlds[w]);
  }
  return out;
}

namespace {

bool allowed(const Presence& in, std::uint32_t x, std::size_t i, std::uint32_t y, std::size_t j,
             MutexWorlds w) {
  if (i == j || !in[x][i] || !in[y][j]) return false;
  if (w == MutexWorlds::kIntersect) return in[x][j] && in[y][i];
  return true;
}

bool any_present(const std::vector<char>& v) {
  for (char c : v)
    if (c) return true;
  return false;
}

bool needs_clash_cross(const std::vector<std::uint32_t>& a, std::size_t i,
                       const std::vector<std::uint32_t>& b, std::size_t j, const CrossMap& lits) {
  for (std::uint32_t l : a)
    for (std::uint32_t m : b)
      if (lits.get(l, i, m, j)) return true;
  return false;
}

}  // namespace

CrossMap lug_action_cross(const GraphDomain& d, const LugLayer& layer, const Presence& acts,
                          const Presence& lits, MutexScheme scheme) {
  (void)lits;
  const std::size_t W = acts.empty() ? 0 : acts.front().size();
  CrossMap out(W);
  std::vector<std::uint32_t> live;
  for (std::uint32_t a = 0; a < acts.size(); ++a)
    if (any_present(acts[a])) live.push_back(a);
  for (std::size_t x = 0; x < live.size(); ++x)
    for (std::size_t y = x; y < live.size(); ++y) {
      std::uint32_t a = live[x], b = live[y];
      bool interfere = a != b && d.actions_interfere(a, b);
      for (std::size_t i = 0; i < W; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          if (!allowed(acts, a, i, b, j, scheme.worlds)) continue;
          if (interfere || (scheme.depth >= MutexDepth::kDynamic &&
                            needs_clash_cross(d.action(a).pre, i, d.action(b).pre, j,
                                              layer.lit_cross)))
            out.set(a, i, b, j);
        }
    }
  return out;
}

CrossMap lug_effect_cross(const GraphDomain& d, const LugLayer& layer, const Presence& effs,
                          const Presence& acts, const Presence& lits, MutexScheme scheme) {
  (void)acts;
  (void)lits;
  const std::size_t W = effs.empty() ? 0 : effs.front().size();
  CrossMap base(W);
  std::vector<std::uint32_t> live;
  for (std::uint32_t e = 0; e < effs.size(); ++e)
    if (any_present(effs[e])) live.push_back(e);
  for (std::size_t x = 0; x < live.size(); ++x)
    for (std::size_t y = x; y < live.size(); ++y) {
      std::uint32_t e = live[x], f = live[y];
      const GraphEffect& ex = d.effect(e);
      const GraphEffect& fy = d.effect(f);
      for (std::size_t i = 0; i < W; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          if (!allowed(effs, e, i, f, j, scheme.worlds)) continue;
          if (layer.act_cross.get(ex.action, i, fy.action, j) ||
              (scheme.depth >= MutexDepth::kDynamic &&
               needs_clash_cross(ex.antecedent, i, fy.antecedent, j, layer.lit_cross)))
            base.set(e, i, f, j);
        }
    }
  if (scheme.depth < MutexDepth::kFull) return base;
  CrossMap out = base;
  for (std::uint32_t e : live)
    for (std::uint32_t g : d.induced(e))
      for (std::uint32_t f : live) {
        if (f == e) continue;
        for (std::size_t i = 0; i < W; ++i) {
          if (!effs[e][i] || !effs[g][i]) continue;
          for (std::size_t j = 0; j < W; ++j)
            if (allowed(effs, e, i, f, j, scheme.worlds) && base.get(g, i, f, j)) out.set(e, i, f, j);
        }
      }
  return out;
}

CrossMap lug_literal_cross(const GraphDomain& d, const LugLayer& prev, const Presence& effs,
                           const Presence& next_lits, MutexScheme scheme) {
  const std::size_t W = next_lits.empty() ? 0 : next_lits.front().size();
  CrossMap out(W);
  if (scheme.depth < MutexDepth::kDynamic) return out;
  std::vector<std::uint32_t> live;
  for (std::uint32_t l = 0; l < next_lits.size(); ++l)
    if (any_present(next_lits[l])) live.push_back(l);
  for (std::size_t x = 0; x < live.size(); ++x)
    for (std::size_t y = x; y < live.size(); ++y) {
      std::uint32_t l = live[x], m = live[y];
      for (std::size_t i = 0; i < W; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          if (!allowed(next_lits, l, i, m, j, scheme.worlds)) continue;
          bool all = true;
          for (std::uint32_t p : d.supporters(l)) {
            if (!effs[p][i]) continue;
            for (std::uint32_t q : d.supporters(m)) {
              if (!effs[q][j]) continue;
              if (!prev.eff_cross.get(p, i, q, j)) {
                all = false;
                break;
              }
            }
            if (!all) break;
          }
          if (all) out.set(l, i, m, j);
        }
    }
  return out;
}

}  // namespace bsp
