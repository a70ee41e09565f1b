#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bsp/formula.hpp"

namespace bsp {

enum class MutexDepth { kNone, kStatic, kDynamic, kFull };
enum class MutexWorlds { kSame, kIntersect, kCross };

// nx | stx | dyx | fx, optionally suffixed -sx (same world, the default), -ix
// (intersecting worlds) or -cx (all world pairs).
struct MutexScheme {
  MutexDepth depth = MutexDepth::kNone;
  MutexWorlds worlds = MutexWorlds::kSame;

  bool enabled() const { return depth != MutexDepth::kNone; }
  bool cross_worlds() const { return enabled() && worlds != MutexWorlds::kSame; }
  static MutexScheme parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const MutexScheme&, const MutexScheme&) = default;
};

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}
inline std::uint32_t key_first(std::uint64_t k) { return static_cast<std::uint32_t>(k >> 32); }
inline std::uint32_t key_second(std::uint64_t k) { return static_cast<std::uint32_t>(k); }

// Unordered element pairs.
class PairSet {
 public:
  void insert(std::uint32_t a, std::uint32_t b) { set_.insert(pair_key(a, b)); }
  bool contains(std::uint32_t a, std::uint32_t b) const { return set_.count(pair_key(a, b)) > 0; }
  std::size_t size() const { return set_.size(); }
  const std::unordered_set<std::uint64_t>& raw() const { return set_; }
  friend bool operator==(const PairSet&, const PairSet&) = default;

 private:
  std::unordered_set<std::uint64_t> set_;
};

// Same-world mutex labels; absent pairs are mutex nowhere.
class LabelMap {
 public:
  void add(std::uint32_t a, std::uint32_t b, Formula label);
  Formula get(std::uint32_t a, std::uint32_t b, Formula none) const;
  std::size_t size() const { return map_.size(); }
  const std::unordered_map<std::uint64_t, Formula>& raw() const { return map_; }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::unordered_map<std::uint64_t, Formula> map_;
};

// Mutexes between an element in world i and another in world j, i != j.
class CrossMap {
 public:
  explicit CrossMap(std::size_t worlds = 0) : worlds_(worlds) {}
  void set(std::uint32_t x, std::size_t i, std::uint32_t y, std::size_t j);
  bool get(std::uint32_t x, std::size_t i, std::uint32_t y, std::size_t j) const;
  std::size_t size() const { return map_.size(); }
  friend bool operator==(const CrossMap&, const CrossMap&) = default;

 private:
  std::size_t worlds_;
  std::unordered_map<std::uint64_t, std::vector<bool>> map_;
};

class GraphDomain;
struct SgLayer;
struct LugLayer;

// Single graph mutexes. Actions and effects are computed on a layer whose literal
// mutexes are known; literal mutexes of the next layer come from the effect layer.
PairSet sg_action_mutexes(const GraphDomain& d, const SgLayer& layer, MutexDepth depth);
PairSet sg_effect_mutexes(const GraphDomain& d, const SgLayer& layer, MutexDepth depth);
PairSet sg_literal_mutexes(const GraphDomain& d, const SgLayer& prev,
                           const std::vector<char>& lits, MutexDepth depth);

// Labelled mutexes in the uncertainty graph, same world.
LabelMap lug_action_mutexes(const GraphDomain& d, const LugLayer& layer, Formula projected,
                            MutexDepth depth);
LabelMap lug_effect_mutexes(const GraphDomain& d, const LugLayer& layer, Formula projected,
                            MutexDepth depth);
LabelMap lug_literal_mutexes(const GraphDomain& d, const LugLayer& prev,
                             const std::vector<Formula>& lits, MutexDepth depth);

// Element presence per world: presence[element][world].
using Presence = std::vector<std::vector<char>>;
Presence presence_of(const std::vector<Formula>& labels, const std::vector<State>& worlds);

CrossMap lug_action_cross(const GraphDomain& d, const LugLayer& layer, const Presence& acts,
                          const Presence& lits, MutexScheme scheme);
CrossMap lug_effect_cross(const GraphDomain& d, const LugLayer& layer, const Presence& effs,
                          const Presence& acts, const Presence& lits, MutexScheme scheme);
CrossMap lug_literal_cross(const GraphDomain& d, const LugLayer& prev, const Presence& effs,
                           const Presence& next_lits, MutexScheme scheme);

}  // namespace bsp
