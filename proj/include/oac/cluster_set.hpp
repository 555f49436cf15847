#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

// Structural deduplication of generated clusters. Per distinct component
// sequence it tallies how many generators collapsed into it and keeps the
// lexicographically smallest generating tuple, so identical inputs yield
// identical metadata no matter how the work was split.
class ClusterAccumulator {
 public:
  // Adds one generated cluster; its generatorCount joins the tally.
  void add(MultimodalCluster&& c);

  // Folds another accumulator in; the result is independent of merge order.
  void absorb(ClusterAccumulator&& other);

  std::size_t distinctCount() const { return entries_.size(); }

  // Moves the distinct clusters out (unspecified order); leaves this empty.
  std::vector<MultimodalCluster> take();

 private:
  struct Tally {
    std::uint64_t count = 0;
    std::optional<Tuple> generator;
  };

  std::unordered_map<MultimodalCluster, Tally, ClusterComponentsHash, ClusterComponentsEq>
      entries_;
};

// Shared tail of every engine: density per distinct cluster, the theta
// filter, optional per-mode minimum component cardinalities, canonical
// ordering. minCardinality is empty (no constraint) or one entry per mode.
std::vector<ClusterResult> finalizeClusters(const PolyContext& ctx,
                                            std::vector<MultimodalCluster> distinct,
                                            double theta, DensityMode mode,
                                            std::span<const std::size_t> minCardinality = {},
                                            unsigned workers = 1);

}  // namespace oac
