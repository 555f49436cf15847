#pragma once

#include <unordered_map>
#include <vector>

#include "oac/context.hpp"
#include "oac/hash.hpp"
#include "oac/types.hpp"

namespace oac {

// Key of a sub-relation: omit one mode, keep the other entities in ascending
// mode order. Two tuples share the mode-k key iff they differ only at k.
struct SubRelationKey {
  Mode omitted = 0;
  IdVec remaining;

  friend bool operator==(const SubRelationKey& a, const SubRelationKey& b) = default;
};

inline bool subRelationKeyLess(const SubRelationKey& a, const SubRelationKey& b) {
  if (a.omitted != b.omitted) return a.omitted < b.omitted;
  return a.remaining < b.remaining;
}

struct SubRelationKeyHash {
  std::size_t operator()(const SubRelationKey& k) const {
    return static_cast<std::size_t>(
        fnv1aIds({k.remaining.data(), k.remaining.size()}, fnv1aStep(kFnvOffsetBasis, k.omitted)));
  }
};

// The N−1 surviving entities of t when mode `omitted` is dropped.
IdVec subRemaining(const Tuple& t, Mode omitted);

// Per-mode prime tables: remaining-key -> entities of the omitted mode. One
// pass over I fills them; lookups then assemble any tuple's cluster without
// re-probing the relation.
class CumulusTable {
 public:
  CumulusTable() = default;
  explicit CumulusTable(std::size_t arity) : maps_(arity) {}

  std::size_t arity() const { return maps_.size(); }

  // Registers t.ids[k] under key(t,k) for every mode k. Caller guarantees
  // distinct tuples, so members stay duplicate-free until tables are merged.
  void add(const Tuple& t);

  // Appends every entry of `other` (used to merge per-worker shards; may
  // introduce duplicate members, which sortMembers collapses).
  void absorb(CumulusTable&& other);

  // Sorts all member lists ascending and drops duplicates, making every
  // stored list a canonical cumulus.
  void sortMembers();

  const std::vector<Id>* find(Mode omitted, const IdVec& remaining) const;
  std::size_t keyCount(Mode omitted) const { return maps_[omitted].size(); }

 private:
  std::vector<std::unordered_map<IdVec, std::vector<Id>, IdVecHash>> maps_;
};

// Builds the full table for a context; equals pointwise application of the
// cumulus operator. Sharding over `workers` never changes the result.
CumulusTable precomputePrimes(const PolyContext& ctx, unsigned workers = 1);

// Batch engine: precompute primes, emit one cluster per tuple, deduplicate
// structurally, filter by density ≥ theta, return in canonical order.
std::vector<ClusterResult> batchCluster(const PolyContext& ctx, double theta,
                                        DensityMode densityMode = DensityMode::Exact,
                                        unsigned workers = 1);

}  // namespace oac
