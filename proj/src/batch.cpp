#include "oac/batch.hpp"

#include <algorithm>
#include <utility>

#include "oac/cluster_set.hpp"
#include "oac/detail/parallel.hpp"
#include "oac/errors.hpp"

namespace oac {

IdVec subRemaining(const Tuple& t, Mode omitted) {
  IdVec rest;
  rest.reserve(t.arity() - 1);
  for (Mode k = 0; k < t.arity(); ++k) {
    if (k != omitted) rest.push_back(t.ids[k]);
  }
  return rest;
}

void CumulusTable::add(const Tuple& t) {
  for (Mode k = 0; k < static_cast<Mode>(maps_.size()); ++k) {
    maps_[k][subRemaining(t, k)].push_back(t.ids[k]);
  }
}

void CumulusTable::absorb(CumulusTable&& other) {
  for (Mode k = 0; k < static_cast<Mode>(maps_.size()); ++k) {
    for (auto& [key, members] : other.maps_[k]) {
      auto& mine = maps_[k][key];
      if (mine.empty()) {
        mine = std::move(members);
      } else {
        mine.insert(mine.end(), members.begin(), members.end());
      }
    }
    other.maps_[k].clear();
  }
}

void CumulusTable::sortMembers() {
  for (auto& map : maps_) {
    for (auto& [key, members] : map) {
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
    }
  }
}

const std::vector<Id>* CumulusTable::find(Mode omitted, const IdVec& remaining) const {
  const auto& map = maps_[omitted];
  auto it = map.find(remaining);
  return it == map.end() ? nullptr : &it->second;
}

CumulusTable precomputePrimes(const PolyContext& ctx, unsigned workers) {
  const auto& tuples = ctx.tuples();
  const std::size_t chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(workers, tuples.size()));
  std::vector<CumulusTable> shards(chunks, CumulusTable(ctx.arity()));
  detail::parallelChunks(tuples.size(), workers,
                         [&](std::size_t begin, std::size_t end, std::size_t c) {
                           for (std::size_t i = begin; i < end; ++i) shards[c].add(tuples[i]);
                         });
  CumulusTable table = std::move(shards.front());
  for (std::size_t c = 1; c < shards.size(); ++c) table.absorb(std::move(shards[c]));
  table.sortMembers();
  return table;
}

std::vector<ClusterResult> batchCluster(const PolyContext& ctx, double theta,
                                        DensityMode densityMode, unsigned workers) {
  if (theta < 0.0 || theta > 1.0) {
    throw ConfigError("theta must lie in [0,1]");
  }
  const CumulusTable table = precomputePrimes(ctx, workers);
  const auto& tuples = ctx.tuples();
  const std::size_t chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(workers, tuples.size()));
  std::vector<ClusterAccumulator> shards(std::max<std::size_t>(chunks, 1));
  detail::parallelChunks(
      tuples.size(), workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
        for (std::size_t i = begin; i < end; ++i) {
          const Tuple& t = tuples[i];
          MultimodalCluster cluster;
          cluster.components.reserve(ctx.arity());
          for (Mode k = 0; k < ctx.arity(); ++k) {
            const std::vector<Id>* members = table.find(k, subRemaining(t, k));
            if (members == nullptr) {
              throw IntegrityError("prime table is missing a key of an ingested tuple");
            }
            cluster.components.push_back(Cumulus{k, *members});
          }
          cluster.generatorCount = 1;
          cluster.generator = t;
          shards[c].add(std::move(cluster));
        }
      });
  ClusterAccumulator acc = std::move(shards.front());
  for (std::size_t c = 1; c < shards.size(); ++c) acc.absorb(std::move(shards[c]));
  return finalizeClusters(ctx, acc.take(), theta, densityMode, {}, workers);
}

}  // namespace oac
