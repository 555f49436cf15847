#include "oac/cluster_set.hpp"

#include <utility>

#include "oac/detail/parallel.hpp"
#include "oac/errors.hpp"

namespace oac {

void ClusterAccumulator::add(MultimodalCluster&& c) {
  auto it = entries_.find(c);
  if (it == entries_.end()) {
    Tally tally{c.generatorCount, std::move(c.generator)};
    c.generator.reset();
    entries_.emplace(std::move(c), std::move(tally));
    return;
  }
  it->second.count += c.generatorCount;
  if (c.generator && (!it->second.generator || c.generator->ids < it->second.generator->ids)) {
    it->second.generator = std::move(c.generator);
  }
}

void ClusterAccumulator::absorb(ClusterAccumulator&& other) {
  if (entries_.empty()) {
    entries_ = std::move(other.entries_);
    return;
  }
  while (!other.entries_.empty()) {
    auto node = other.entries_.extract(other.entries_.begin());
    auto it = entries_.find(node.key());
    if (it == entries_.end()) {
      entries_.insert(std::move(node));
      continue;
    }
    it->second.count += node.mapped().count;
    auto& g = node.mapped().generator;
    if (g && (!it->second.generator || g->ids < it->second.generator->ids)) {
      it->second.generator = std::move(g);
    }
  }
}

std::vector<MultimodalCluster> ClusterAccumulator::take() {
  std::vector<MultimodalCluster> out;
  out.reserve(entries_.size());
  while (!entries_.empty()) {
    auto node = entries_.extract(entries_.begin());
    MultimodalCluster c = std::move(node.key());
    c.generatorCount = node.mapped().count;
    c.generator = std::move(node.mapped().generator);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ClusterResult> finalizeClusters(const PolyContext& ctx,
                                            std::vector<MultimodalCluster> distinct,
                                            double theta, DensityMode mode,
                                            std::span<const std::size_t> minCardinality,
                                            unsigned workers) {
  if (!minCardinality.empty() && minCardinality.size() != ctx.arity()) {
    throw ConfigError("minimum-cardinality list must have one entry per mode");
  }
  std::vector<std::optional<ClusterResult>> slots(distinct.size());
  detail::parallelChunks(distinct.size(), workers,
                         [&](std::size_t begin, std::size_t end, std::size_t) {
                           for (std::size_t i = begin; i < end; ++i) {
                             MultimodalCluster& c = distinct[i];
                             bool keep = true;
                             for (std::size_t k = 0; k < minCardinality.size(); ++k) {
                               if (c.components[k].size() < minCardinality[k]) {
                                 keep = false;
                                 break;
                               }
                             }
                             if (!keep) continue;
                             const double d = clusterDensity(ctx, c, mode);
                             if (d < theta) continue;
                             slots[i] = ClusterResult{std::move(c), d};
                           }
                         });
  std::vector<ClusterResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  canonicalize(out);
  return out;
}

}  // namespace oac
