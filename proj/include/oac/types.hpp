#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "oac/hash.hpp"

namespace oac {

// Entity ids are dense per-mode integers produced by interning.
using Id = std::uint32_t;
using Mode = std::uint32_t;

// Most relations are triadic or 4-adic; keep tuples allocation-free there.
using IdVec = boost::container::small_vector<Id, 4>;

// Which density a run filters and reports: the exact box density, or the
// generating-tuple count over the box volume (a lower bound on the former).
enum class DensityMode { Exact, Generators };

// A mode-tagged entity id.
struct EntityId {
  Mode mode = 0;
  Id id = 0;

  friend bool operator==(const EntityId&, const EntityId&) = default;
};

// One element of the N-ary relation; ids[k] is the mode-k entity.
struct Tuple {
  IdVec ids;

  Tuple() = default;
  explicit Tuple(IdVec v) : ids(std::move(v)) {}
  Tuple(std::initializer_list<Id> init) : ids(init.begin(), init.end()) {}

  std::size_t arity() const { return ids.size(); }

  friend bool operator==(const Tuple& a, const Tuple& b) { return a.ids == b.ids; }
  friend bool operator<(const Tuple& a, const Tuple& b) { return a.ids < b.ids; }
};

struct TupleHash {
  std::size_t operator()(const Tuple& t) const {
    return static_cast<std::size_t>(fnv1aIds({t.ids.data(), t.ids.size()}));
  }
};

struct IdVecHash {
  std::size_t operator()(const IdVec& v) const {
    return static_cast<std::size_t>(fnv1aIds({v.data(), v.size()}));
  }
};

// A mode-tagged set of entity ids in canonical form: members sorted strictly
// ascending. The value of cum(i,k) / a prime set.
struct Cumulus {
  Mode mode = 0;
  std::vector<Id> members;

  bool contains(Id id) const {
    return std::binary_search(members.begin(), members.end(), id);
  }
  std::size_t size() const { return members.size(); }

  friend bool operator==(const Cumulus& a, const Cumulus& b) {
    return a.mode == b.mode && a.members == b.members;
  }
  friend bool operator<(const Cumulus& a, const Cumulus& b) {
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.members < b.members;
  }
};

// An N-tuple of cumuli, one per mode, plus generator bookkeeping. Structural
// identity is the component sequence; generatorCount and generator are
// metadata carried alongside.
struct MultimodalCluster {
  std::vector<Cumulus> components;
  std::uint64_t generatorCount = 0;
  std::optional<Tuple> generator;  // lexicographically smallest generating tuple

  std::size_t arity() const { return components.size(); }
};

// Product of component cardinalities, saturating at uint64 max.
std::uint64_t volume(const MultimodalCluster& cluster);

// Same, as a double (density denominator; never saturates at these scales).
double volumeAsDouble(const MultimodalCluster& cluster);

inline bool sameComponents(const MultimodalCluster& a, const MultimodalCluster& b) {
  return a.components == b.components;
}

inline bool componentsLess(const MultimodalCluster& a, const MultimodalCluster& b) {
  return a.components < b.components;
}

struct ClusterComponentsHash {
  std::size_t operator()(const MultimodalCluster& c) const {
    std::uint64_t h = kFnvOffsetBasis;
    for (const Cumulus& cum : c.components) {
      h = fnv1aStep(h, cum.mode);
      h = fnv1aIds({cum.members.data(), cum.members.size()}, h);
      h = fnv1aStep(h, 0xffffffffu);  // component separator
    }
    return static_cast<std::size_t>(h);
  }
};

struct ClusterComponentsEq {
  bool operator()(const MultimodalCluster& a, const MultimodalCluster& b) const {
    return sameComponents(a, b);
  }
};

// A cluster paired with the density the selected mode assigned to it.
struct ClusterResult {
  MultimodalCluster cluster;
  double density = 0.0;
};

// Sorts results into canonical order (lexicographic over component sequences).
void canonicalize(std::vector<ClusterResult>& results);

// Full engine-equivalence comparison: component sets, generator counts, and
// reported densities must all agree.
bool resultsEqual(std::span<const ClusterResult> a, std::span<const ClusterResult> b);

}  // namespace oac
