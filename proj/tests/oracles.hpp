#pragma once

// Brute-force reference computations shared by the test binaries.

#include <map>
#include <queue>
#include <random>
#include <set>

#include "bsp/transition.hpp"

namespace oracle {

using namespace bsp;

inline std::vector<State> all_states(std::size_t n) {
  std::vector<State> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    State s(n);
    for (std::size_t i = 0; i < n; ++i) s.set(static_cast<FluentId>(i), (m >> i) & 1);
    out.push_back(s);
  }
  return out;
}

inline std::vector<State> successors(const Problem& p, const State& s) {
  std::vector<State> out;
  for (std::size_t a = 0; a < p.actions.size(); ++a)
    if (s.satisfies(p.actions[a].precondition)) out.push_back(progress_state(p, s, a));
  return out;
}

// Serial distance from s to every reachable state.
inline std::map<State, int> state_distances(const Problem& p, const State& s) {
  std::map<State, int> dist{{s, 0}};
  std::queue<State> q;
  q.push(s);
  while (!q.empty()) {
    State t = q.front();
    q.pop();
    for (const State& u : successors(p, t))
      if (dist.emplace(u, dist[t] + 1).second) q.push(u);
  }
  return dist;
}

inline std::vector<State> reachable_states(const ProblemContext& ctx) {
  std::set<State> seen;
  for (const State& s : ctx.store().models(ctx.init()))
    for (auto& [t, d] : state_distances(ctx.problem(), s)) seen.insert(t);
  return {seen.begin(), seen.end()};
}

inline Formula random_belief(FormulaStore& st, std::mt19937& rng, const std::vector<State>& univ,
                             double density = 0.3) {
  Formula f = st.bottom();
  std::bernoulli_distribution coin(density);
  for (const State& s : univ)
    if (coin(rng)) f = f | st.state(s);
  if (f.is_false()) f = st.state(univ[rng() % univ.size()]);
  return f;
}

// Literals reachable in a relaxed (delete-free) sense from a state, by level, with
// every action applied in parallel. Mirrors planning graph literal layers.
inline std::vector<std::set<std::uint32_t>> relaxed_layers(const Problem& p,
                                                           std::set<std::uint32_t> lits,
                                                           int levels) {
  std::vector<std::set<std::uint32_t>> out{lits};
  for (int k = 0; k < levels; ++k) {
    std::set<std::uint32_t> next = out.back();
    for (const Action& a : p.actions) {
      bool ok = true;
      for (Literal l : a.precondition) ok = ok && out.back().count(l.code());
      if (!ok) continue;
      for (const Effect& e : a.effects) {
        bool fire = true;
        for (Literal l : e.antecedent) fire = fire && out.back().count(l.code());
        if (fire)
          for (Literal l : e.consequent) next.insert(l.code());
      }
    }
    out.push_back(next);
  }
  return out;
}

}  // namespace oracle
