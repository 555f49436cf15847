#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oac/batch.hpp"
#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

enum class IntermediateStorage { Memory, Files };

struct PipelineConfig {
  unsigned mapWorkers = 1;
  unsigned reduceWorkers = 1;
  unsigned partitions = 1;
  double theta = 0.0;
  DensityMode densityMode = DensityMode::Exact;
  IntermediateStorage storage = IntermediateStorage::Memory;
  std::uint64_t hashSeed = 0;  // folded into the partition hash
  std::string spillDir;        // stage files live here in Files mode
};

// Cumuli flow through stages 1–3 by reference; a cluster is N shared
// mode-ordered cumuli plus a cached content hash so the stage-3 group-by
// never rehashes component data per record.
using CumulusPtr = std::shared_ptr<const Cumulus>;

struct SharedCluster {
  boost::container::small_vector<CumulusPtr, 4> parts;
  std::uint64_t contentHash = 0;
};

SharedCluster makeSharedCluster(boost::container::small_vector<CumulusPtr, 4> parts);
bool sharedClusterEq(const SharedCluster& a, const SharedCluster& b);
bool sharedClusterLess(const SharedCluster& a, const SharedCluster& b);

// Deep copy into a plain cluster (generator metadata left to the caller).
MultimodalCluster materialize(const SharedCluster& c);

template <typename K, typename V>
struct KV {
  K key;
  V value;
};

using Map1Record = KV<SubRelationKey, EntityId>;
using Reduce1Record = KV<SubRelationKey, CumulusPtr>;
using Map2Record = KV<Tuple, CumulusPtr>;
using Reduce2Record = KV<Tuple, SharedCluster>;
using Map3Record = KV<SharedCluster, Tuple>;

template <typename K, typename V>
struct Group {
  K key;
  std::vector<V> values;
};

// partitions[p] holds that partition's groups sorted by key.
template <typename K, typename V>
using PartitionedGroups = std::vector<std::vector<Group<K, V>>>;

// --- stage procedures ---

// ⟨key(t,k), t.ids[k]⟩ for every mode k: exactly N records.
void map1(const Tuple& t, std::vector<Map1Record>& out);

// Set-union of the received entities into one canonical cumulus.
// Mode mismatch between key and any value is a pipeline integrity error.
Reduce1Record reduce1(const SubRelationKey& key, std::span<const EntityId> values);

// Reinsert each cumulus member at the omitted position: one record per
// member, keyed by the reconstructed original tuple.
void map2(const SubRelationKey& key, const CumulusPtr& cum, std::vector<Map2Record>& out);

// Assemble the tuple's cluster; requires exactly one cumulus per mode.
Reduce2Record reduce2(const Tuple& key, std::span<const CumulusPtr> cumuli);

// Key/value swap: group equal clusters, remember their generating tuples.
Map3Record map3(const Tuple& key, SharedCluster cluster);

// Density gate. Generators mode: |distinct generators| / volume ≥ theta.
// Exact mode: exactDensity(ctx) ≥ theta, ctx required. The kept cluster
// carries generatorCount and the smallest generating tuple.
std::optional<ClusterResult> reduce3(const SharedCluster& key, std::span<const Tuple> generators,
                                     const PipelineConfig& cfg, const PolyContext* ctx);

// --- shuffles ---
// Partition by fnv1a(serialize(key), hashSeed) mod partitions; group by exact
// key equality within a partition; groups sorted by key, values kept in
// record order. Record order in, groups out: both deterministic.
PartitionedGroups<SubRelationKey, EntityId> shuffleStage1(std::vector<Map1Record>&& records,
                                                          const PolyContext& ctx,
                                                          const PipelineConfig& cfg);
PartitionedGroups<Tuple, CumulusPtr> shuffleStage2(std::vector<Map2Record>&& records,
                                                   const PolyContext& ctx,
                                                   const PipelineConfig& cfg);
PartitionedGroups<SharedCluster, Tuple> shuffleStage3(std::vector<Map3Record>&& records,
                                                      const PolyContext& ctx,
                                                      const PipelineConfig& cfg);

// --- intermediate record serialization (also used by the partitioner) ---
// Keys/values as mode-prefixed entity-name lists: `k=0|i1,l1`, `m=0|u1,u2`,
// tuples as `u2,i1,l1`, clusters as `;`-joined cumuli. One record per line:
// stage id, key, value, tab-separated.
std::string serializeSubRelationKey(const PolyContext& ctx, const SubRelationKey& key);
std::string serializeTuple(const PolyContext& ctx, const Tuple& t);
std::string serializeCumulus(const PolyContext& ctx, const Cumulus& c);
std::string serializeSharedCluster(const PolyContext& ctx, const SharedCluster& c);

SubRelationKey parseSubRelationKey(const PolyContext& ctx, std::string_view text);
Tuple parseTuple(const PolyContext& ctx, std::string_view text);
Cumulus parseCumulus(const PolyContext& ctx, std::string_view text);
SharedCluster parseSharedCluster(const PolyContext& ctx, std::string_view text);

struct StageCounters {
  std::uint64_t map1Records = 0;
  std::uint64_t reduce1Groups = 0;
  std::uint64_t map2Records = 0;
  std::uint64_t map2PayloadIds = 0;  // total cumulus members carried by stage-2 records
  std::uint64_t reduce2Groups = 0;
  std::uint64_t reduce2CumuliSeen = 0;
  std::uint64_t map3Records = 0;
  std::uint64_t reduce3Groups = 0;
  std::uint64_t keptClusters = 0;
  std::uint64_t peakIntermediateRecords = 0;  // max record count across the five streams
};

// Wall time per phase; reduce phases include their shuffle.
struct StageTimings {
  double map1Ms = 0;
  double reduce1Ms = 0;
  double map2Ms = 0;
  double reduce2Ms = 0;
  double map3Ms = 0;
  double reduce3Ms = 0;
  double totalMs = 0;
};

struct PipelineRun {
  std::vector<ClusterResult> clusters;
  StageCounters counters;
  StageTimings timings;
};

// The three chained stages with a barrier between every map and reduce
// phase. Output is canonical and byte-identical for any worker/partition
// choice; in Files mode every phase round-trips through stage files
// stage1.tsv … stage5.tsv under cfg.spillDir, written in deterministic order.
PipelineRun runPipeline(const PolyContext& ctx, const PipelineConfig& cfg);

}  // namespace oac
