#include "bsp/search.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace bsp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void finish_stats(SearchStats& s, const HeuristicEvaluator& h, Clock::time_point t0) {
  s.total_ms = ms_since(t0);
  s.heuristic_ms = h.elapsed_ms();
  s.search_ms = std::max(0.0, s.total_ms - s.heuristic_ms);
}

}  // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::kSolved: return "solved";
    case Status::kUnsolvable: return "unsolvable";
    case Status::kTimeout: return "TO";
  }
  return "?";
}

// ---------------------------------------------------------------- plans

Plan Plan::sequence(const std::vector<std::size_t>& actions) {
  Plan p;
  for (std::size_t i = 0; i < actions.size(); ++i)
    p.nodes.push_back({actions[i], {{Branch::kNoReading, i + 1}}});
  p.nodes.push_back({});
  return p;
}

bool Plan::conditional() const {
  for (const PlanNode& n : nodes)
    if (n.branches.size() > 1) return true;
  return false;
}

std::vector<std::size_t> Plan::actions() const {
  std::vector<std::size_t> out;
  if (nodes.empty()) return out;
  std::size_t i = 0;
  while (nodes[i].action != PlanNode::kGoal) {
    if (nodes[i].branches.size() != 1) throw std::logic_error("plan branches");
    out.push_back(nodes[i].action);
    i = nodes[i].branches[0].second;
  }
  return out;
}

int Plan::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> memo(nodes.size(), -1);
  std::function<int(std::size_t)> go = [&](std::size_t i) {
    if (memo[i] >= 0) return memo[i];
    int d = 0;
    if (nodes[i].action != PlanNode::kGoal)
      for (const auto& [r, c] : nodes[i].branches) d = std::max(d, 1 + go(c));
    return memo[i] = d;
  };
  return go(0);
}

std::string Plan::to_string(const Problem& p) const {
  std::ostringstream out;
  if (nodes.empty()) return "";
  std::function<void(std::size_t, int)> emit = [&](std::size_t i, int indent) {
    while (nodes[i].action != PlanNode::kGoal) {
      const Action& a = p.actions[nodes[i].action];
      out << std::string(static_cast<std::size_t>(indent), ' ') << a.name << '\n';
      if (nodes[i].branches.size() == 1 && nodes[i].branches[0].first == Branch::kNoReading) {
        i = nodes[i].branches[0].second;
        continue;
      }
      for (const auto& [r, c] : nodes[i].branches) {
        out << std::string(static_cast<std::size_t>(indent), ' ') << "obs "
            << bsp::to_string(a.observations[r]) << ":\n";
        emit(c, indent + 2);
      }
      return;
    }
  };
  emit(0, 0);
  return out.str();
}

// ---------------------------------------------------------------- A*

SearchResult astar_regress(const ProblemContext& ctx, HeuristicEvaluator& h,
                           const SearchOptions& opt) {
  const auto t0 = Clock::now();
  const Problem& p = ctx.problem();
  FormulaStore& st = ctx.store();
  for (const Action& a : p.actions)
    if (a.observational())
      throw std::invalid_argument("regression search cannot use sensing action '" + a.name + "'");

  struct Node {
    Formula belief;
    int g;
    std::size_t parent;
    std::size_t action;
  };
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<Node> nodes;
  struct Entry {
    Cost f;
    int g;
    std::size_t seq;
    std::size_t node;
    bool operator<(const Entry& o) const {  // max-heap on priority
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;
      return seq > o.seq;
    }
  };
  std::priority_queue<Entry> open;
  std::unordered_map<Formula, int, FormulaHash> best_g;
  std::size_t seq = 0;
  SearchResult res;

  try {
    Cost h0 = h(ctx.goal());
    nodes.push_back({ctx.goal(), 0, kNone, kNone});
    best_g[ctx.goal()] = 0;
    if (h0 != kInfinity) open.push({opt.weight * h0, 0, seq++, 0});
    while (!open.empty()) {
      opt.deadline.check();
      Entry e = open.top();
      open.pop();
      const Node n = nodes[e.node];
      if (best_g[n.belief] < n.g) continue;
      if (st.entails(ctx.init(), n.belief)) {
        std::vector<std::size_t> acts;
        for (std::size_t i = e.node; nodes[i].parent != kNone; i = nodes[i].parent)
          acts.push_back(nodes[i].action);
        res.status = Status::kSolved;
        res.plan = Plan::sequence(acts);
        res.root_cost = n.g;
        break;
      }
      ++res.stats.expanded;
      for (std::size_t a = 0; a < p.actions.size(); ++a) {
        if (!is_relevant(ctx, a, n.belief)) continue;
        Formula child = regress(ctx, n.belief, a);
        if (child.is_false()) continue;
        ++res.stats.generated;
        const int g = n.g + 1;
        auto it = best_g.find(child);
        if (it != best_g.end() && it->second <= g) continue;
        best_g[child] = g;
        Cost hc = h(child);
        if (hc == kInfinity) continue;
        nodes.push_back({child, g, e.node, a});
        open.push({g + opt.weight * hc, g, seq++, nodes.size() - 1});
      }
    }
  } catch (const Timeout&) {
    res.status = Status::kTimeout;
  }
  finish_stats(res.stats, h, t0);
  return res;
}

// ---------------------------------------------------------------- AO*

namespace {

struct AoEdge {
  std::size_t action;
  std::vector<std::pair<std::size_t, std::size_t>> children;  // (reading, node)
};

struct AoNode {
  Formula belief;
  Cost cost = 0;
  bool terminal = false;
  bool expanded = false;
  bool solved = false;
  std::size_t best = static_cast<std::size_t>(-1);
  std::vector<AoEdge> edges;
  std::vector<std::size_t> parents;
};

class AoSearch {
 public:
  AoSearch(const ProblemContext& ctx, HeuristicEvaluator& h, const SearchOptions& opt,
           SearchStats& stats)
      : ctx_(ctx), h_(h), opt_(opt), stats_(stats) {}

  SearchResult run() {
    SearchResult res;
    std::size_t root = node_for(ctx_.init());
    while (true) {
      opt_.deadline.check();
      if (nodes_[root].cost == kInfinity) {
        res.status = Status::kUnsolvable;
        return res;
      }
      std::optional<std::size_t> tip = find_tip(root);
      if (!tip) break;
      expand(*tip);
      revise(*tip);
      if (opt_.trace) {
        const AoNode& r = nodes_[root];
        opt_.trace(r.best == kNone ? "" : ctx_.problem().actions[r.edges[r.best].action].name,
                   r.cost);
      }
    }
    res.status = Status::kSolved;
    res.root_cost = nodes_[root].cost;
    res.plan = extract(root);
    res.revision_stable = stable();
    return res;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t node_for(Formula bs) {
    auto it = index_.find(bs);
    if (it != index_.end()) return it->second;
    AoNode n;
    n.belief = bs;
    if (ctx_.store().entails(bs, ctx_.goal())) {
      n.terminal = n.solved = true;
      n.cost = 0;
    } else {
      Cost hv = h_(bs);
      n.cost = hv == kInfinity ? kInfinity : opt_.weight * hv;
    }
    nodes_.push_back(std::move(n));
    index_.emplace(bs, nodes_.size() - 1);
    return nodes_.size() - 1;
  }

  // First unexpanded non-terminal node on the best partial solution, depth first.
  std::optional<std::size_t> find_tip(std::size_t root) {
    std::unordered_set<std::size_t> seen;
    std::function<std::optional<std::size_t>(std::size_t)> go =
        [&](std::size_t n) -> std::optional<std::size_t> {
      if (!seen.insert(n).second) return std::nullopt;
      const AoNode& x = nodes_[n];
      if (x.terminal) return std::nullopt;
      if (!x.expanded) return n;
      if (x.best == kNone) return std::nullopt;
      for (const auto& [r, c] : x.edges[x.best].children)
        if (auto t = go(c)) return t;
      return std::nullopt;
    };
    return go(root);
  }

  bool reaches(std::size_t from, std::size_t target) {
    std::vector<std::size_t> stack{from};
    std::unordered_set<std::size_t> seen{from};
    while (!stack.empty()) {
      std::size_t n = stack.back();
      stack.pop_back();
      if (n == target) return true;
      for (const AoEdge& e : nodes_[n].edges)
        for (const auto& [r, c] : e.children)
          if (seen.insert(c).second) stack.push_back(c);
    }
    return false;
  }

  void expand(std::size_t n) {
    ++stats_.expanded;
    const Problem& p = ctx_.problem();
    for (std::size_t a = 0; a < p.actions.size(); ++a) {
      std::vector<Branch> branches;
      try {
        branches = progress_branches(ctx_, nodes_[n].belief, a);
      } catch (const IllFormedAction&) {
        continue;
      }
      if (branches.empty()) continue;
      AoEdge edge{a, {}};
      bool cyclic = false;
      for (const Branch& b : branches) {
        ++stats_.generated;
        std::size_t c = node_for(b.belief);
        edge.children.emplace_back(b.reading, c);
        if (c == n || reaches(c, n)) cyclic = true;
      }
      if (cyclic) continue;
      for (const auto& [r, c] : edge.children) {
        auto& ps = nodes_[c].parents;
        if (std::find(ps.begin(), ps.end(), n) == ps.end()) ps.push_back(n);
      }
      nodes_[n].edges.push_back(std::move(edge));
    }
    nodes_[n].expanded = true;
  }

  // Cheapest edge. Among ties keep the current choice if it is solved, else take
  // the first solved edge, else the first edge.
  void update(std::size_t n) {
    AoNode& x = nodes_[n];
    if (x.terminal || !x.expanded) return;
    std::vector<Cost> cost(x.edges.size());
    std::vector<char> solved(x.edges.size());
    Cost low = kInfinity;
    for (std::size_t i = 0; i < x.edges.size(); ++i) {
      Cost sum = 0;
      bool all = true;
      for (const auto& [r, c] : x.edges[i].children) {
        sum += nodes_[c].cost;
        all = all && nodes_[c].solved;
      }
      cost[i] = 1 + sum / static_cast<Cost>(x.edges[i].children.size());
      solved[i] = all;
      low = std::min(low, cost[i]);
    }
    std::size_t best = kNone;
    if (low != kInfinity) {
      if (x.best != kNone && cost[x.best] == low && solved[x.best]) best = x.best;
      for (std::size_t i = 0; i < x.edges.size() && best == kNone; ++i)
        if (cost[i] == low && solved[i]) best = i;
      for (std::size_t i = 0; i < x.edges.size() && best == kNone; ++i)
        if (cost[i] == low) best = i;
    }
    x.best = best;
    x.cost = low;
    x.solved = best != kNone && solved[best];
  }

  // Recomputes the tip and its ancestors, children before parents.
  void revise(std::size_t tip) {
    std::unordered_set<std::size_t> z{tip};
    std::vector<std::size_t> stack{tip};
    while (!stack.empty()) {
      std::size_t n = stack.back();
      stack.pop_back();
      for (std::size_t q : nodes_[n].parents)
        if (z.insert(q).second) stack.push_back(q);
    }
    std::unordered_set<std::size_t> done;
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
      if (!done.insert(n).second) return;
      for (const AoEdge& e : nodes_[n].edges)
        for (const auto& [r, c] : e.children)
          if (z.count(c)) visit(c);
      update(n);
    };
    std::vector<std::size_t> order(z.begin(), z.end());
    std::sort(order.begin(), order.end());
    for (std::size_t n : order) visit(n);
  }

  // Whether one more revision of every expanded node changes nothing.
  bool stable() {
    std::vector<std::pair<std::size_t, Cost>> before;
    for (const AoNode& x : nodes_) before.emplace_back(x.best, x.cost);
    std::vector<char> done(nodes_.size(), 0);
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
      if (done[n]) return;
      done[n] = 1;
      for (const AoEdge& e : nodes_[n].edges)
        for (const auto& [r, c] : e.children) visit(c);
      update(n);
    };
    for (std::size_t n = 0; n < nodes_.size(); ++n) visit(n);
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      if (nodes_[n].best != before[n].first || nodes_[n].cost != before[n].second) return false;
    return true;
  }

  Plan extract(std::size_t root) {
    Plan plan;
    std::unordered_map<std::size_t, std::size_t> id;
    std::function<std::size_t(std::size_t)> go = [&](std::size_t n) -> std::size_t {
      auto it = id.find(n);
      if (it != id.end()) return it->second;
      std::size_t me = plan.nodes.size();
      plan.nodes.emplace_back();
      id.emplace(n, me);
      const AoNode& x = nodes_[n];
      if (x.terminal) return me;
      const AoEdge& e = x.edges[x.best];
      PlanNode pn;
      pn.action = e.action;
      for (const auto& [r, c] : e.children) pn.branches.emplace_back(r, go(c));
      plan.nodes[me] = std::move(pn);
      return me;
    };
    go(root);
    return plan;
  }

  const ProblemContext& ctx_;
  HeuristicEvaluator& h_;
  const SearchOptions& opt_;
  SearchStats& stats_;
  std::vector<AoNode> nodes_;
  std::unordered_map<Formula, std::size_t, FormulaHash> index_;
};

}  // namespace

SearchResult aostar_progress(const ProblemContext& ctx, HeuristicEvaluator& h,
                             const SearchOptions& opt) {
  const auto t0 = Clock::now();
  SearchStats stats;
  SearchResult res;
  try {
    AoSearch s(ctx, h, opt, stats);
    res = s.run();
  } catch (const Timeout&) {
    res.status = Status::kTimeout;
  }
  res.stats = stats;
  finish_stats(res.stats, h, t0);
  return res;
}

// ---------------------------------------------------------------- validation

Validation validate(const ProblemContext& ctx, const Plan& plan) {
  const Problem& p = ctx.problem();
  FormulaStore& st = ctx.store();
  Validation v;
  v.valid = true;
  if (plan.nodes.empty()) {
    v.valid = false;
    v.message = "empty plan structure";
    return v;
  }
  const int limit = static_cast<int>(plan.nodes.size());
  for (const State& s0 : st.models(ctx.init())) {
    State s = s0;
    std::size_t i = 0;
    int steps = 0;
    std::string fail;
    while (fail.empty()) {
      const PlanNode& n = plan.nodes[i];
      if (n.action == PlanNode::kGoal) {
        if (!st.eval(ctx.goal(), s)) fail = "goal not reached";
        break;
      }
      if (steps++ > limit) {
        fail = "plan loops";
        break;
      }
      const Action& a = p.actions[n.action];
      if (!s.satisfies(a.precondition)) {
        fail = "'" + a.name + "' not applicable";
        break;
      }
      try {
        s = progress_state(p, s, n.action);
      } catch (const IllFormedAction& e) {
        fail = e.what();
        break;
      }
      std::optional<std::size_t> next;
      for (const auto& [r, c] : n.branches) {
        if (r == Branch::kNoReading || st.eval(ctx.readings(n.action)[r], s)) {
          next = c;
          break;
        }
      }
      if (!next) {
        fail = "no branch for the reading after '" + a.name + "'";
        break;
      }
      i = *next;
    }
    if (!fail.empty()) {
      v.valid = false;
      v.witness = s0;
      v.message = fail;
      return v;
    }
    v.max_length = std::max(v.max_length, steps);
  }
  return v;
}

// ---------------------------------------------------------------- oracle

std::optional<int> bfs_oracle(const ProblemContext& ctx, Formula start, std::size_t cap) {
  const Problem& p = ctx.problem();
  FormulaStore& st = ctx.store();
  auto goal = [&](Formula b) { return st.entails(b, ctx.goal()); };
  auto successors = [&](Formula b, std::size_t a) {
    try {
      return progress_branches(ctx, b, a);
    } catch (const IllFormedAction&) {
      return std::vector<Branch>{};
    }
  };
  std::size_t visited = 0;
  auto tick = [&] {
    if (++visited > cap) throw CapExceeded("belief search exceeded " + std::to_string(cap));
  };

  if (!p.has_observations()) {
    std::unordered_set<Formula, FormulaHash> seen{start};
    std::vector<Formula> frontier{start};
    for (int depth = 0; !frontier.empty(); ++depth) {
      std::vector<Formula> next;
      for (Formula b : frontier) {
        tick();
        if (goal(b)) return depth;
        for (std::size_t a = 0; a < p.actions.size(); ++a)
          for (const Branch& br : successors(b, a))
            if (seen.insert(br.belief).second) next.push_back(br.belief);
      }
      frontier = std::move(next);
    }
    return std::nullopt;
  }

  // And-or search, deepening the bound on the longest branch. fails[b] holds the
  // largest bound already shown insufficient for b.
  std::unordered_map<Formula, int, FormulaHash> fails;
  std::unordered_set<Formula, FormulaHash> reached{start};
  std::function<bool(Formula, int)> solvable = [&](Formula b, int d) {
    if (goal(b)) return true;
    if (d == 0) return false;
    auto it = fails.find(b);
    if (it != fails.end() && it->second >= d) return false;
    tick();
    for (std::size_t a = 0; a < p.actions.size(); ++a) {
      auto br = successors(b, a);
      if (br.empty()) continue;
      bool ok = true;
      for (const Branch& x : br) {
        reached.insert(x.belief);
        if (x.belief == b || !solvable(x.belief, d - 1)) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    fails[b] = std::max(fails[b], d);
    return false;
  };
  std::size_t last_reached = 0;
  for (int d = 0;; ++d) {
    if (solvable(start, d)) return d;
    // Bounds beyond the number of distinct beliefs cannot help.
    if (d > 0 && reached.size() == last_reached && d > static_cast<int>(reached.size()))
      return std::nullopt;
    last_reached = reached.size();
  }
}

}  // namespace bsp
