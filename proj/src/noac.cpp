#include "oac/noac.hpp"

#include <algorithm>
#include <utility>

#include "oac/cluster_set.hpp"
#include "oac/detail/parallel.hpp"
#include "oac/errors.hpp"
#include "oac/operators.hpp"

namespace oac {

namespace {

std::vector<std::size_t> resolveMinSup(const std::vector<std::size_t>& minSup,
                                       std::size_t arity) {
  if (minSup.empty()) return std::vector<std::size_t>(arity, 0);
  if (minSup.size() == 1) return std::vector<std::size_t>(arity, minSup.front());
  if (minSup.size() != arity) {
    throw ConfigError("minsup needs one entry, or one per mode");
  }
  return minSup;
}

void validateParams(const NoacParams& params) {
  if (params.delta < 0.0) {
    throw ConfigError("delta must be non-negative");
  }
  if (params.rhoMin < 0.0 || params.rhoMin > 1.0) {
    throw ConfigError("rho-min must lie in [0,1]");
  }
  if (params.workers < 1) {
    throw ConfigError("worker count must be at least 1");
  }
}

bool validAgainst(const PolyContext& ctx, const MultimodalCluster& cluster, double rhoMin,
                  std::span<const std::size_t> minSup) {
  for (std::size_t k = 0; k < cluster.components.size(); ++k) {
    if (cluster.components[k].size() < minSup[k]) return false;
  }
  // Density is the expensive half; skip it when the bound cannot fail.
  if (rhoMin <= 0.0) return true;
  return exactDensity(ctx, cluster) >= rhoMin;
}

}  // namespace

bool isValid(const PolyContext& ctx, const MultimodalCluster& cluster, const NoacParams& params) {
  validateParams(params);
  const auto minSup = resolveMinSup(params.minSup, cluster.components.size());
  for (const Cumulus& c : cluster.components) {
    if (c.members.empty()) {
      throw UndefinedDensityError("cluster has an empty component");
    }
  }
  return validAgainst(ctx, cluster, params.rhoMin, minSup);
}

NoacResult noacCluster(const PolyContext& ctx, const NoacParams& params) {
  validateParams(params);
  const bool valued = ctx.hasValues();
  if (!valued && !params.binaryFallback) {
    throw ConfigError(
        "the delta-operator engine needs a many-valued context "
        "(or the binary fallback for 0/1 data)");
  }
  const auto minSup = resolveMinSup(params.minSup, ctx.arity());

  const auto& tuples = ctx.tuples();
  NoacResult result;
  result.candidates = tuples.size();

  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(params.workers, tuples.size()));
  std::vector<ClusterAccumulator> shards(chunks);
  std::vector<std::uint64_t> validCounts(chunks, 0);
  detail::parallelChunks(
      tuples.size(), params.workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
        for (std::size_t i = begin; i < end; ++i) {
          const Tuple& t = tuples[i];
          MultimodalCluster cluster;
          cluster.components.reserve(ctx.arity());
          for (Mode k = 0; k < ctx.arity(); ++k) {
            // Constant valuation makes every |V−V| zero, so the fallback is
            // exactly the prime operator.
            cluster.components.push_back(valued ? deltaCumulus(ctx, t, k, params.delta)
                                                : cumulus(ctx, t, k));
          }
          cluster.generatorCount = 1;
          cluster.generator = t;
          if (!validAgainst(ctx, cluster, params.rhoMin, minSup)) continue;
          ++validCounts[c];
          shards[c].add(std::move(cluster));
        }
      });
  ClusterAccumulator acc = std::move(shards.front());
  for (std::size_t c = 1; c < shards.size(); ++c) acc.absorb(std::move(shards[c]));
  for (std::uint64_t v : validCounts) result.validPreDedup += v;

  result.clusters = finalizeClusters(ctx, acc.take(), params.rhoMin, DensityMode::Exact, minSup,
                                     params.workers);
  return result;
}

}  // namespace oac
