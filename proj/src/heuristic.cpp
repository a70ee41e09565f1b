#include "bsp/heuristic.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace bsp {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool looks_like_mutex(const std::string& t) {
  return t.rfind("nx", 0) == 0 || t.rfind("stx", 0) == 0 || t.rfind("dyx", 0) == 0 ||
         t.rfind("fx", 0) == 0;
}

std::optional<HKind> basic_kind(const std::string& t) {
  if (t == "max") return HKind::kMax;
  if (t == "sum") return HKind::kSum;
  if (t == "level") return HKind::kLevel;
  if (t == "rp") return HKind::kRp;
  return std::nullopt;
}

const char* kind_name(HKind k) {
  switch (k) {
    case HKind::kZero: return "zero";
    case HKind::kCard: return "card";
    case HKind::kMax: return "max";
    case HKind::kSum: return "sum";
    case HKind::kLevel: return "level";
    case HKind::kRp: return "rp";
    case HKind::kRpUnion: return "rpu";
  }
  return "?";
}

Cost add(Cost a, Cost b) { return a + b; }

Cost aggregate(const std::vector<Cost>& v, Aggregation agg) {
  Cost out = 0;
  for (Cost c : v) out = agg == Aggregation::kSum ? add(out, c) : std::max(out, c);
  return out;
}

}  // namespace

HeuristicSpec HeuristicSpec::parse(std::string_view text) {
  auto tok = split(text, ':');
  HeuristicSpec h;
  auto bad = [&](const std::string& why) {
    return SpecError("invalid heuristic '" + std::string(text) + "': " + why);
  };
  if (tok.size() > 1 && looks_like_mutex(tok.back())) {
    try {
      h.mutex = MutexScheme::parse(tok.back());
    } catch (const std::invalid_argument& e) {
      throw bad(e.what());
    }
    h.mutex_given = true;
    tok.pop_back();
  }
  const std::string& head = tok[0];
  if (head == "zero" || head == "card") {
    if (tok.size() != 1) throw bad("takes no arguments");
    if (h.mutex_given) throw bad("mutexes need a planning graph");
    h.kind = head == "zero" ? HKind::kZero : HKind::kCard;
    return h;
  }
  if (tok.size() < 2) throw bad("missing measure");
  auto kind = basic_kind(tok[1]);
  if (head == "sg" || head == "sgu" || head == "sg1") {
    h.substrate = head == "sg1" ? Substrate::kSgSample : Substrate::kSgUnion;
    if (!kind) throw bad("unknown measure '" + tok[1] + "'");
    if (tok.size() != 2) throw bad("a single graph has nothing to aggregate");
    h.kind = *kind;
    return h;
  }
  if (head == "mg") {
    h.substrate = Substrate::kMg;
    if (tok[1] == "rpu") {
      if (tok.size() != 2) throw bad("the union takes no aggregation");
      h.kind = HKind::kRpUnion;
      h.agg = Aggregation::kUnion;
      return h;
    }
  } else if (head == "lug") {
    h.substrate = Substrate::kLug;
  } else {
    throw bad("unknown substrate '" + head + "'");
  }
  if (!kind) throw bad("unknown measure '" + tok[1] + "'");
  h.kind = *kind;
  h.agg = Aggregation::kMax;
  if (tok.size() == 3) {
    if (h.substrate == Substrate::kLug && h.kind == HKind::kRp)
      throw bad("the relaxed plan takes no aggregation");
    if (tok[2] == "max") h.agg = Aggregation::kMax;
    else if (tok[2] == "sum") h.agg = Aggregation::kSum;
    else throw bad("unknown aggregation '" + tok[2] + "'");
  } else if (tok.size() > 3) {
    throw bad("too many components");
  }
  if (h.substrate == Substrate::kLug && h.kind == HKind::kRp) h.agg = Aggregation::kNone;
  return h;
}

std::string HeuristicSpec::to_string() const {
  std::string s;
  switch (substrate) {
    case Substrate::kNone: return kind_name(kind);
    case Substrate::kSgUnion: s = "sg"; break;
    case Substrate::kSgSample: s = "sg1"; break;
    case Substrate::kMg: s = "mg"; break;
    case Substrate::kLug: s = "lug"; break;
  }
  s += ':';
  s += kind_name(kind);
  if (agg == Aggregation::kMax) s += ":max";
  if (agg == Aggregation::kSum) s += ":sum";
  if (mutex.enabled()) s += ":" + mutex.to_string();
  return s;
}

// ---------------------------------------------------------------- plans

Cost RelaxedPlan::value() const {
  if (!reachable) return kInfinity;
  return static_cast<Cost>(count_actions(actions));
}

std::size_t count_actions(const std::vector<std::vector<std::uint32_t>>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

std::vector<std::vector<std::uint32_t>> merge_plans(
    const std::vector<std::vector<std::vector<std::uint32_t>>>& plans, Direction dir) {
  std::size_t len = 0;
  for (const auto& p : plans) len = std::max(len, p.size());
  std::vector<std::set<std::uint32_t>> acc(len);
  for (const auto& p : plans) {
    const std::size_t shift = dir == Direction::kRegression ? len - p.size() : 0;
    for (std::size_t i = 0; i < p.size(); ++i) acc[shift + i].insert(p[i].begin(), p[i].end());
  }
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& s : acc) out.emplace_back(s.begin(), s.end());
  return out;
}

// ---------------------------------------------------------------- single graph

Cost clause_cost(const SingleGraph& g, std::span<const Literal> clause) {
  Cost best = kInfinity;
  for (Literal l : clause) {
    int lev = g.literal_level(l.code());
    if (lev != kNotReached) best = std::min<Cost>(best, lev);
  }
  return best;
}

Cost constituent_level(const SingleGraph& g, std::span<const Literal> cube) {
  auto codes = literal_codes(cube);
  for (int k = 0; k <= g.last_level(); ++k) {
    bool ok = true;
    for (std::size_t i = 0; i < codes.size() && ok; ++i) {
      ok = g.has_literal(k, codes[i]);
      for (std::size_t j = i + 1; j < codes.size() && ok; ++j)
        ok = !g.literals_mutex(k, codes[i], codes[j]);
    }
    if (ok) return k;
  }
  return kInfinity;
}

namespace {

// Level of the cheapest constituent and the first constituent attaining it.
std::pair<Cost, const Cube*> best_constituent(const SingleGraph& g, const ConstituentSet& cons) {
  std::pair<Cost, const Cube*> best{kInfinity, nullptr};
  for (const Cube& c : cons) {
    Cost lev = constituent_level(g, c);
    if (lev < best.first) best = {lev, &c};
  }
  return best;
}

}  // namespace

RelaxedPlan sg_relaxed_plan(const SingleGraph& g, FormulaStore& st, Formula bs_i) {
  const GraphDomain& d = g.domain();
  RelaxedPlan rp;
  auto [lev, cube] = best_constituent(g, st.to_constituents(bs_i));
  if (lev == kInfinity) return rp;
  rp.reachable = true;
  const int b = static_cast<int>(lev);
  rp.level = b;
  std::vector<std::set<std::uint32_t>> goals(static_cast<std::size_t>(b) + 1);
  for (Literal l : *cube) goals[static_cast<std::size_t>(b)].insert(l.code());
  rp.actions.resize(static_cast<std::size_t>(b));
  rp.effects.resize(static_cast<std::size_t>(b));
  for (int r = b; r >= 1; --r) {
    const int k = r - 1;
    auto& below = goals[static_cast<std::size_t>(k)];
    std::set<std::uint32_t> covered, acts, effs;
    for (std::uint32_t l : goals[static_cast<std::size_t>(r)]) {
      if (covered.count(l)) continue;
      if (g.has_literal(k, l)) {
        effs.insert(d.action(d.persistence_of(l)).effects[0]);
        below.insert(l);
        covered.insert(l);
        continue;
      }
      std::optional<std::uint32_t> pick;
      auto rank = [&](std::uint32_t e) {
        return std::make_tuple(acts.count(d.effect(e).action) ? 0 : 1, g.effect_level(e), e);
      };
      for (std::uint32_t e : d.supporters(l)) {
        if (d.is_persistence_effect(e) || !g.has_effect(k, e)) continue;
        if (!pick || rank(e) < rank(*pick)) pick = e;
      }
      if (!pick) throw std::logic_error("relaxed plan: no supporter for " + d.literal_name(l));
      const GraphEffect& x = d.effect(*pick);
      effs.insert(*pick);
      acts.insert(x.action);
      for (std::uint32_t c : x.consequent) covered.insert(c);
      for (std::uint32_t a : x.antecedent) below.insert(a);
      for (std::uint32_t p : d.action(x.action).pre) below.insert(p);
    }
    rp.actions[static_cast<std::size_t>(k)].assign(acts.begin(), acts.end());
    rp.effects[static_cast<std::size_t>(k)].assign(effs.begin(), effs.end());
  }
  for (const auto& s : goals) rp.literals.emplace_back(s.begin(), s.end());
  return rp;
}

Cost sg_value(const SingleGraph& g, FormulaStore& st, Formula bs_i, HKind kind) {
  switch (kind) {
    case HKind::kMax:
    case HKind::kSum: {
      Cost out = 0;
      for (const Clause& c : st.to_clauses(bs_i)) {
        Cost v = clause_cost(g, c);
        out = kind == HKind::kMax ? std::max(out, v) : out + v;
      }
      return out;
    }
    case HKind::kLevel: return best_constituent(g, st.to_constituents(bs_i)).first;
    case HKind::kRp: return sg_relaxed_plan(g, st, bs_i).value();
    default: throw std::logic_error("measure not defined on a single graph");
  }
}

Cost mg_value(const GraphSet& gs, FormulaStore& st, Formula bs_i, HKind kind, Aggregation agg,
              Direction dir) {
  if (kind == HKind::kRpUnion) {
    std::vector<std::vector<std::vector<std::uint32_t>>> plans;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      RelaxedPlan rp = sg_relaxed_plan(gs.graph(i), st, bs_i);
      if (!rp.reachable) return kInfinity;
      plans.push_back(std::move(rp.actions));
    }
    return static_cast<Cost>(count_actions(merge_plans(plans, dir)));
  }
  std::vector<Cost> v;
  for (std::size_t i = 0; i < gs.size(); ++i) v.push_back(sg_value(gs.graph(i), st, bs_i, kind));
  return aggregate(v, agg);
}

// ---------------------------------------------------------------- uncertainty graph

Cost lug_clause_cost(const Lug& lug, std::span<const Literal> clause) {
  FormulaStore& st = lug.store();
  for (int k = 0; k <= lug.last_level(); ++k)
    if (st.entails(lug.projected(), lug.clause_label(k, clause))) return k;
  return kInfinity;
}

Formula lug_reach_label(const Lug& lug, int k, const ConstituentSet& cons) {
  FormulaStore& st = lug.store();
  Formula out = st.bottom();
  for (const Cube& c : cons) {
    Formula lab = lug.cube_label(k, c);
    if (lab.is_false()) continue;
    if (lug.scheme().enabled()) {
      auto codes = literal_codes(c);
      for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = i + 1; j < codes.size(); ++j)
          lab = st.diff(lab, lug.literal_mutex(k, codes[i], codes[j]));
    }
    out = out | lab;
  }
  return out;
}

namespace {

// Whether some choice of reachable constituents avoids cross-world mutexes for
// every pair of worlds.
bool cross_consistent(const Lug& lug, int k, const ConstituentSet& cons) {
  FormulaStore& st = lug.store();
  const auto& worlds = lug.worlds();
  std::vector<std::vector<std::vector<std::uint32_t>>> usable(worlds.size());
  std::vector<Formula> labels;
  for (const Cube& c : cons) labels.push_back(lug_reach_label(lug, k, {c}));
  for (std::size_t w = 0; w < worlds.size(); ++w)
    for (std::size_t c = 0; c < cons.size(); ++c)
      if (st.eval(labels[c], worlds[w])) usable[w].push_back(literal_codes(cons[c]));
  for (std::size_t i = 0; i < worlds.size(); ++i)
    for (std::size_t j = i + 1; j < worlds.size(); ++j) {
      bool found = false;
      for (const auto& ci : usable[i]) {
        for (const auto& cj : usable[j]) {
          bool clash = false;
          for (std::uint32_t a : ci) {
            for (std::uint32_t b : cj)
              if (lug.literal_cross(k, a, i, b, j)) {
                clash = true;
                break;
              }
            if (clash) break;
          }
          if (!clash) {
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) return false;
    }
  return true;
}

// First level at which the world satisfies the label produced by f(k).
template <class F>
Cost first_level_in(const Lug& lug, const State& w, F label_at) {
  for (int k = 0; k <= lug.last_level(); ++k)
    if (lug.store().eval(label_at(k), w)) return k;
  return kInfinity;
}

}  // namespace

Cost lug_level(const Lug& lug, Formula bs_i) {
  FormulaStore& st = lug.store();
  const ConstituentSet& cons = st.to_constituents(bs_i);
  const bool cross = lug.scheme().cross_worlds() && !lug.worlds().empty();
  for (int k = 0; k <= lug.last_level(); ++k) {
    if (!st.entails(lug.projected(), lug_reach_label(lug, k, cons))) continue;
    if (cross && !cross_consistent(lug, k, cons)) continue;
    return k;
  }
  return kInfinity;
}

Cost lug_value(const Lug& lug, Formula bs_i, HKind kind, Aggregation agg) {
  FormulaStore& st = lug.store();
  if (kind == HKind::kRp) return lug_relaxed_plan(lug, bs_i).value();
  if (agg == Aggregation::kSum) {
    const ClauseSet& clauses = st.to_clauses(bs_i);
    const ConstituentSet& cons = st.to_constituents(bs_i);
    Cost total = 0;
    for (const State& w : st.models(lug.projected())) {
      if (kind == HKind::kLevel) {
        total += first_level_in(lug, w, [&](int k) { return lug_reach_label(lug, k, cons); });
        continue;
      }
      Cost world = 0;
      for (const Clause& c : clauses) {
        Cost v = first_level_in(lug, w, [&](int k) { return lug.clause_label(k, c); });
        world = kind == HKind::kMax ? std::max(world, v) : world + v;
      }
      total += world;
    }
    return total;
  }
  if (kind == HKind::kLevel) return lug_level(lug, bs_i);
  Cost out = 0;
  for (const Clause& c : st.to_clauses(bs_i)) {
    Cost v = lug_clause_cost(lug, c);
    out = kind == HKind::kMax ? std::max(out, v) : out + v;
  }
  return out;
}

RelaxedPlan lug_relaxed_plan(const Lug& lug, Formula bs_i) {
  FormulaStore& st = lug.store();
  const GraphDomain& d = lug.domain();
  RelaxedPlan rp;
  Cost lev = lug_level(lug, bs_i);
  if (lev == kInfinity) return rp;
  rp.reachable = true;
  const int b = static_cast<int>(lev);
  const std::size_t B = static_cast<std::size_t>(b);
  rp.level = b;
  rp.actions.resize(B);
  rp.effects.resize(B);
  rp.effect_need.resize(B);
  rp.action_need.resize(B);
  rp.literal_need.resize(B + 1);

  // Subgoals: clauses at the top, single literals below.
  std::vector<std::pair<Clause, Formula>> subgoals;
  for (const Clause& c : st.to_clauses(bs_i)) {
    subgoals.emplace_back(c, lug.projected());
    for (Literal l : c) {
      auto& n = rp.literal_need[B].emplace(l.code(), st.bottom()).first->second;
      n = n | lug.projected();
    }
  }
  for (int r = b; r >= 1; --r) {
    const int k = r - 1;
    const std::size_t K = static_cast<std::size_t>(k);
    auto& chosen = rp.effect_need[K];
    std::set<std::uint32_t> acts;
    for (const auto& [clause, need] : subgoals) {
      Formula covered = st.bottom();
      for (Literal lit : clause) {
        const std::uint32_t l = lit.code();
        Formula part = st.diff(need & lug.literal_label(k, l), covered);
        if (part.is_false()) continue;
        std::uint32_t pe = d.action(d.persistence_of(l)).effects[0];
        auto& n = chosen.emplace(pe, st.bottom()).first->second;
        n = n | part;
        covered = covered | part;
      }
      Formula remaining = st.diff(need, covered);
      while (!remaining.is_false()) {
        std::optional<std::uint32_t> pick;
        std::tuple<int, double, std::uint32_t> pick_rank{};
        for (Literal lit : clause)
          for (std::uint32_t e : d.supporters(lit.code())) {
            if (d.is_persistence_effect(e)) continue;
            Formula gain = remaining & lug.effect_label(k, e);
            if (gain.is_false()) continue;
            auto rank = std::make_tuple(acts.count(d.effect(e).action) ? 0 : 1,
                                        -st.count_models_real(gain), e);
            if (!pick || rank < pick_rank) {
              pick = e;
              pick_rank = rank;
            }
          }
        if (!pick)
          throw std::logic_error("relaxed plan: worlds left uncovered at level " +
                                 std::to_string(r));
        Formula gain = remaining & lug.effect_label(k, *pick);
        auto& n = chosen.emplace(*pick, st.bottom()).first->second;
        n = n | gain;
        acts.insert(d.effect(*pick).action);
        remaining = st.diff(remaining, gain);
      }
    }
    // Needs of chosen actions and the literals they rely on.
    auto& lit_need = rp.literal_need[K];
    auto need_literal = [&](std::uint32_t l, Formula n) {
      auto& x = lit_need.emplace(l, st.bottom()).first->second;
      x = x | n;
    };
    for (const auto& [e, n] : chosen) {
      const GraphEffect& x = d.effect(e);
      auto& an = rp.action_need[K].emplace(x.action, st.bottom()).first->second;
      an = an | n;
      for (std::uint32_t l : x.antecedent) need_literal(l, n);
    }
    for (const auto& [a, n] : rp.action_need[K])
      for (std::uint32_t l : d.action(a).pre) need_literal(l, n);
    for (const auto& [e, n] : chosen) {
      rp.effects[K].push_back(e);
      std::uint32_t a = d.effect(e).action;
      if (!d.is_persistence(a) &&
          (rp.actions[K].empty() || rp.actions[K].back() != a))
        rp.actions[K].push_back(a);
    }
    std::sort(rp.actions[K].begin(), rp.actions[K].end());
    rp.actions[K].erase(std::unique(rp.actions[K].begin(), rp.actions[K].end()),
                        rp.actions[K].end());
    subgoals.clear();
    for (const auto& [l, n] : lit_need) subgoals.emplace_back(Clause{Literal::from_code(l)}, n);
  }
  for (const auto& m : rp.literal_need) {
    rp.literals.emplace_back();
    for (const auto& [l, n] : m) rp.literals.back().push_back(l);
  }
  return rp;
}

// ---------------------------------------------------------------- evaluator

HeuristicEvaluator::HeuristicEvaluator(const ProblemContext& ctx, HeuristicSpec spec,
                                       Direction dir, Deadline deadline)
    : ctx_(&ctx),
      spec_(spec),
      dir_(dir),
      deadline_(deadline),
      domain_(ctx.problem()),
      rng_(spec.seed) {
  if (spec_.fraction <= 0 || spec_.fraction > 1)
    throw SpecError("sampling fraction must lie in (0, 1]");
}

std::unique_ptr<GraphBundle> HeuristicEvaluator::build(Formula bs_p) {
  FormulaStore& st = ctx_->store();
  auto b = std::make_unique<GraphBundle>();
  b->projected = bs_p;
  const MutexDepth depth = spec_.mutex.depth;
  switch (spec_.substrate) {
    case Substrate::kNone: break;
    case Substrate::kSgUnion:
      b->sg.emplace(domain_, literal_codes(aggregate_state(st, bs_p)), depth, kDefaultLevelCap,
                    deadline_);
      break;
    case Substrate::kSgSample: {
      auto s = sample_states(st, bs_p, 1e-12, rng_);
      b->sg.emplace(domain_, literal_codes(s.front().literals()), depth, kDefaultLevelCap,
                    deadline_);
      break;
    }
    case Substrate::kMg: {
      auto worlds = spec_.fraction < 1 ? sample_states(st, bs_p, spec_.fraction, rng_)
                                       : st.models(bs_p);
      b->mg.emplace(domain_, std::move(worlds), depth, kDefaultLevelCap, deadline_);
      break;
    }
    case Substrate::kLug: {
      if (spec_.fraction < 1) {
        Formula p = st.bottom();
        for (const State& s : sample_states(st, bs_p, spec_.fraction, rng_)) p = p | st.state(s);
        b->projected = p;
      }
      MutexScheme scheme = spec_.mutex;
      if (scheme.cross_worlds() &&
          st.count_models_real(b->projected) > static_cast<double>(kCrossWorldCap))
        scheme.worlds = MutexWorlds::kSame;
      b->lug.emplace(domain_, st, b->projected, scheme, kDefaultLevelCap, deadline_);
      break;
    }
  }
  return b;
}

Cost HeuristicEvaluator::evaluate(const GraphBundle& b, Formula bs_p, Formula bs_i) {
  FormulaStore& st = ctx_->store();
  switch (spec_.substrate) {
    case Substrate::kNone:
      if (spec_.kind == HKind::kZero) return 0;
      return st.count_models_real(dir_ == Direction::kRegression ? bs_i : bs_p);
    case Substrate::kSgUnion:
    case Substrate::kSgSample: return sg_value(*b.sg, st, bs_i, spec_.kind);
    case Substrate::kMg: return mg_value(*b.mg, st, bs_i, spec_.kind, spec_.agg, dir_);
    case Substrate::kLug: return lug_value(*b.lug, bs_i, spec_.kind, spec_.agg);
  }
  return 0;
}

Cost HeuristicEvaluator::estimate(Formula bs_p, Formula bs_i) {
  if (spec_.kind == HKind::kZero) return 0;
  FormulaStore& st = ctx_->store();
  if (st.entails(bs_p, bs_i)) return 0;
  if (spec_.substrate == Substrate::kNone) return evaluate(GraphBundle{}, bs_p, bs_i);
  if (dir_ == Direction::kRegression && bs_p == ctx_->init()) {
    if (!fixed_) fixed_ = build(bs_p);
    return evaluate(*fixed_, bs_p, bs_i);
  }
  auto b = build(bs_p);
  return evaluate(*b, bs_p, bs_i);
}

Cost HeuristicEvaluator::operator()(Formula node) {
  auto it = memo_.find(node);
  if (it != memo_.end()) return it->second;
  auto t0 = std::chrono::steady_clock::now();
  Cost h = dir_ == Direction::kRegression ? estimate(ctx_->init(), node)
                                          : estimate(node, ctx_->goal());
  elapsed_ms_ +=
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  ++evaluations_;
  memo_.emplace(node, h);
  return h;
}

}  // namespace bsp
