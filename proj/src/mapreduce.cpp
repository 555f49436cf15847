#include "oac/mapreduce.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <utility>

#include "oac/detail/parallel.hpp"
#include "oac/errors.hpp"
#include "oac/hash.hpp"

namespace oac {

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string idListToString(std::span<const Id> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

void appendName(const PolyContext& ctx, Mode k, Id id, std::string& out) {
  out += ctx.entityName(k, id);
}

std::uint64_t parseUint(std::string_view text, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(std::string("malformed ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

// Splits a comma-joined list, applying fn(token) per token. Empty text means
// an empty list.
template <typename Fn>
void forEachToken(std::string_view text, char sep, Fn&& fn) {
  if (text.empty()) return;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    fn(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
}

Id lookupEntity(const PolyContext& ctx, Mode k, std::string_view name) {
  const auto id = ctx.entityId(k, std::string(name));
  if (!id) {
    throw FormatError("unknown mode-" + std::to_string(k) + " entity '" + std::string(name) +
                      "' in intermediate record");
  }
  return *id;
}

}  // namespace

// --- SharedCluster ---

SharedCluster makeSharedCluster(boost::container::small_vector<CumulusPtr, 4> parts) {
  std::uint64_t h = kFnvOffsetBasis;
  for (const CumulusPtr& c : parts) {
    h = fnv1aStep(h, c->mode);
    for (Id id : c->members) h = fnv1aStep(h, id);
    h = fnv1aStep(h, 0xffffffffu);  // component separator
  }
  return SharedCluster{std::move(parts), h};
}

bool sharedClusterEq(const SharedCluster& a, const SharedCluster& b) {
  if (a.contentHash != b.contentHash || a.parts.size() != b.parts.size()) return false;
  for (std::size_t i = 0; i < a.parts.size(); ++i) {
    if (a.parts[i] == b.parts[i]) continue;  // shared cumulus fast path
    if (!(*a.parts[i] == *b.parts[i])) return false;
  }
  return true;
}

bool sharedClusterLess(const SharedCluster& a, const SharedCluster& b) {
  const std::size_t n = std::min(a.parts.size(), b.parts.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.parts[i] == b.parts[i]) continue;
    if (*a.parts[i] < *b.parts[i]) return true;
    if (*b.parts[i] < *a.parts[i]) return false;
  }
  return a.parts.size() < b.parts.size();
}

MultimodalCluster materialize(const SharedCluster& c) {
  MultimodalCluster out;
  out.components.reserve(c.parts.size());
  for (const CumulusPtr& p : c.parts) out.components.push_back(*p);
  return out;
}

// --- stage procedures ---

void map1(const Tuple& t, std::vector<Map1Record>& out) {
  for (Mode k = 0; k < t.arity(); ++k) {
    out.push_back(Map1Record{SubRelationKey{k, subRemaining(t, k)}, EntityId{k, t.ids[k]}});
  }
}

Reduce1Record reduce1(const SubRelationKey& key, std::span<const EntityId> values) {
  std::vector<Id> members;
  members.reserve(values.size());
  for (const EntityId& v : values) {
    if (v.mode != key.omitted) {
      throw IntegrityError("stage reduce1: value of mode " + std::to_string(v.mode) +
                           " under key k=" + std::to_string(key.omitted) + "|" +
                           idListToString({key.remaining.data(), key.remaining.size()}));
    }
    members.push_back(v.id);
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return Reduce1Record{key, std::make_shared<const Cumulus>(Cumulus{key.omitted, std::move(members)})};
}

void map2(const SubRelationKey& key, const CumulusPtr& cum, std::vector<Map2Record>& out) {
  for (Id e : cum->members) {
    IdVec ids;
    ids.reserve(key.remaining.size() + 1);
    for (Mode k = 0; k < key.omitted; ++k) ids.push_back(key.remaining[k]);
    ids.push_back(e);
    for (std::size_t j = key.omitted; j < key.remaining.size(); ++j) ids.push_back(key.remaining[j]);
    out.push_back(Map2Record{Tuple{std::move(ids)}, cum});
  }
}

Reduce2Record reduce2(const Tuple& key, std::span<const CumulusPtr> cumuli) {
  const std::size_t n = key.arity();
  const auto fail = [&](const char* what) {
    throw IntegrityError(std::string("stage reduce2: ") + what + " for key " +
                         idListToString({key.ids.data(), key.ids.size()}));
  };
  if (cumuli.size() != n) fail("wrong cumulus count");
  boost::container::small_vector<CumulusPtr, 4> parts(n);
  for (const CumulusPtr& c : cumuli) {
    if (c->mode >= n) fail("out-of-range mode");
    if (parts[c->mode]) fail("duplicated mode");
    parts[c->mode] = c;
  }
  for (const CumulusPtr& c : parts) {
    if (!c) fail("missing mode");
  }
  return Reduce2Record{key, makeSharedCluster(std::move(parts))};
}

Map3Record map3(const Tuple& key, SharedCluster cluster) {
  return Map3Record{std::move(cluster), key};
}

std::optional<ClusterResult> reduce3(const SharedCluster& key, std::span<const Tuple> generators,
                                     const PipelineConfig& cfg, const PolyContext* ctx) {
  if (generators.empty()) {
    throw IntegrityError("stage reduce3: empty generator group");
  }
  std::vector<Tuple> gens(generators.begin(), generators.end());
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

  MultimodalCluster cluster = materialize(key);
  cluster.generatorCount = gens.size();
  cluster.generator = std::move(gens.front());

  double density = 0.0;
  if (cfg.densityMode == DensityMode::Exact) {
    if (ctx == nullptr) {
      throw ConfigError("exact-density filtering in the pipeline requires the source context");
    }
    density = exactDensity(*ctx, cluster);
  } else {
    density = static_cast<double>(cluster.generatorCount) / volumeAsDouble(cluster);
  }
  if (density < cfg.theta) return std::nullopt;
  return ClusterResult{std::move(cluster), density};
}

// --- serialization ---

std::string serializeSubRelationKey(const PolyContext& ctx, const SubRelationKey& key) {
  std::string out = "k=" + std::to_string(key.omitted) + "|";
  for (std::size_t j = 0; j < key.remaining.size(); ++j) {
    if (j) out += ',';
    const Mode mode = j < key.omitted ? static_cast<Mode>(j) : static_cast<Mode>(j + 1);
    appendName(ctx, mode, key.remaining[j], out);
  }
  return out;
}

std::string serializeTuple(const PolyContext& ctx, const Tuple& t) {
  std::string out;
  for (Mode k = 0; k < t.arity(); ++k) {
    if (k) out += ',';
    appendName(ctx, k, t.ids[k], out);
  }
  return out;
}

std::string serializeCumulus(const PolyContext& ctx, const Cumulus& c) {
  std::string out = "m=" + std::to_string(c.mode) + "|";
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    if (i) out += ',';
    appendName(ctx, c.mode, c.members[i], out);
  }
  return out;
}

std::string serializeSharedCluster(const PolyContext& ctx, const SharedCluster& c) {
  std::string out;
  for (std::size_t i = 0; i < c.parts.size(); ++i) {
    if (i) out += ';';
    out += serializeCumulus(ctx, *c.parts[i]);
  }
  return out;
}

SubRelationKey parseSubRelationKey(const PolyContext& ctx, std::string_view text) {
  if (!text.starts_with("k=")) {
    throw FormatError("subrelation key must start with 'k=': '" + std::string(text) + "'");
  }
  const std::size_t bar = text.find('|');
  if (bar == std::string_view::npos) {
    throw FormatError("subrelation key is missing '|': '" + std::string(text) + "'");
  }
  SubRelationKey key;
  key.omitted = static_cast<Mode>(parseUint(text.substr(2, bar - 2), "mode index"));
  if (key.omitted >= ctx.arity()) {
    throw FormatError("subrelation key omits mode " + std::to_string(key.omitted) +
                      " but the context has arity " + std::to_string(ctx.arity()));
  }
  std::size_t j = 0;
  forEachToken(text.substr(bar + 1), ',', [&](std::string_view name) {
    const Mode mode = j < key.omitted ? static_cast<Mode>(j) : static_cast<Mode>(j + 1);
    if (mode >= ctx.arity()) {
      throw FormatError("too many entities in subrelation key '" + std::string(text) + "'");
    }
    key.remaining.push_back(lookupEntity(ctx, mode, name));
    ++j;
  });
  if (key.remaining.size() + 1 != ctx.arity()) {
    throw FormatError("subrelation key must hold " + std::to_string(ctx.arity() - 1) +
                      " entities: '" + std::string(text) + "'");
  }
  return key;
}

Tuple parseTuple(const PolyContext& ctx, std::string_view text) {
  Tuple t;
  Mode k = 0;
  forEachToken(text, ',', [&](std::string_view name) {
    if (k >= ctx.arity()) {
      throw FormatError("too many entities in tuple '" + std::string(text) + "'");
    }
    t.ids.push_back(lookupEntity(ctx, k, name));
    ++k;
  });
  if (t.arity() != ctx.arity()) {
    throw FormatError("tuple must hold " + std::to_string(ctx.arity()) + " entities: '" +
                      std::string(text) + "'");
  }
  return t;
}

Cumulus parseCumulus(const PolyContext& ctx, std::string_view text) {
  if (!text.starts_with("m=")) {
    throw FormatError("cumulus must start with 'm=': '" + std::string(text) + "'");
  }
  const std::size_t bar = text.find('|');
  if (bar == std::string_view::npos) {
    throw FormatError("cumulus is missing '|': '" + std::string(text) + "'");
  }
  Cumulus c;
  c.mode = static_cast<Mode>(parseUint(text.substr(2, bar - 2), "mode index"));
  if (c.mode >= ctx.arity()) {
    throw FormatError("cumulus mode " + std::to_string(c.mode) + " out of range for arity " +
                      std::to_string(ctx.arity()));
  }
  forEachToken(text.substr(bar + 1), ',', [&](std::string_view name) {
    c.members.push_back(lookupEntity(ctx, c.mode, name));
  });
  std::sort(c.members.begin(), c.members.end());
  c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
  return c;
}

SharedCluster parseSharedCluster(const PolyContext& ctx, std::string_view text) {
  boost::container::small_vector<CumulusPtr, 4> parts;
  forEachToken(text, ';', [&](std::string_view part) {
    parts.push_back(std::make_shared<const Cumulus>(parseCumulus(ctx, part)));
  });
  if (parts.size() != ctx.arity()) {
    throw FormatError("cluster must hold " + std::to_string(ctx.arity()) + " cumuli: '" +
                      std::string(text) + "'");
  }
  for (Mode k = 0; k < parts.size(); ++k) {
    if (parts[k]->mode != k) {
      throw FormatError("cluster cumuli must be ordered by mode: '" + std::string(text) + "'");
    }
  }
  return makeSharedCluster(std::move(parts));
}

// --- shuffle ---

namespace {

template <typename K, typename V, typename Hash, typename Eq, typename Ser, typename Less>
PartitionedGroups<K, V> shuffleImpl(std::vector<KV<K, V>>&& records, const PipelineConfig& cfg,
                                    Ser&& serializeKey, Less&& less) {
  const std::size_t numPartitions = cfg.partitions;
  const std::size_t n = records.size();
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(cfg.mapWorkers, n));

  // Route records to partition buckets. Chunk-local buckets concatenated in
  // chunk order keep every partition's record order equal to arrival order,
  // whatever the worker count.
  std::vector<std::vector<std::vector<KV<K, V>>>> shardBuckets(
      chunks, std::vector<std::vector<KV<K, V>>>(numPartitions));
  detail::parallelChunks(n, cfg.mapWorkers,
                         [&](std::size_t begin, std::size_t end, std::size_t c) {
                           for (std::size_t i = begin; i < end; ++i) {
                             const std::uint64_t h = fnv1a(serializeKey(records[i].key), cfg.hashSeed);
                             shardBuckets[c][h % numPartitions].push_back(std::move(records[i]));
                           }
                         });
  records.clear();
  records.shrink_to_fit();

  PartitionedGroups<K, V> out(numPartitions);
  detail::parallelIndices(numPartitions, cfg.reduceWorkers, [&](std::size_t p) {
    std::unordered_map<K, std::vector<V>, Hash, Eq> grouped;
    for (std::size_t c = 0; c < chunks; ++c) {
      for (KV<K, V>& rec : shardBuckets[c][p]) {
        grouped[std::move(rec.key)].push_back(std::move(rec.value));
      }
      shardBuckets[c][p].clear();
      shardBuckets[c][p].shrink_to_fit();
    }
    std::vector<Group<K, V>> groups;
    groups.reserve(grouped.size());
    while (!grouped.empty()) {
      auto node = grouped.extract(grouped.begin());
      groups.push_back(Group<K, V>{std::move(node.key()), std::move(node.mapped())});
    }
    std::sort(groups.begin(), groups.end(),
              [&](const Group<K, V>& a, const Group<K, V>& b) { return less(a.key, b.key); });
    out[p] = std::move(groups);
  });
  return out;
}

struct SharedClusterHashFn {
  std::size_t operator()(const SharedCluster& c) const {
    return static_cast<std::size_t>(c.contentHash);
  }
};
struct SharedClusterEqFn {
  bool operator()(const SharedCluster& a, const SharedCluster& b) const {
    return sharedClusterEq(a, b);
  }
};

}  // namespace

PartitionedGroups<SubRelationKey, EntityId> shuffleStage1(std::vector<Map1Record>&& records,
                                                          const PolyContext& ctx,
                                                          const PipelineConfig& cfg) {
  return shuffleImpl<SubRelationKey, EntityId, SubRelationKeyHash, std::equal_to<SubRelationKey>>(
      std::move(records), cfg,
      [&](const SubRelationKey& k) { return serializeSubRelationKey(ctx, k); },
      subRelationKeyLess);
}

PartitionedGroups<Tuple, CumulusPtr> shuffleStage2(std::vector<Map2Record>&& records,
                                                   const PolyContext& ctx,
                                                   const PipelineConfig& cfg) {
  return shuffleImpl<Tuple, CumulusPtr, TupleHash, std::equal_to<Tuple>>(
      std::move(records), cfg, [&](const Tuple& t) { return serializeTuple(ctx, t); },
      [](const Tuple& a, const Tuple& b) { return a < b; });
}

PartitionedGroups<SharedCluster, Tuple> shuffleStage3(std::vector<Map3Record>&& records,
                                                      const PolyContext& ctx,
                                                      const PipelineConfig& cfg) {
  return shuffleImpl<SharedCluster, Tuple, SharedClusterHashFn, SharedClusterEqFn>(
      std::move(records), cfg,
      [&](const SharedCluster& c) { return serializeSharedCluster(ctx, c); }, sharedClusterLess);
}

// --- file-backed intermediates ---

namespace {

std::filesystem::path stagePath(const PipelineConfig& cfg, int stage) {
  return std::filesystem::path(cfg.spillDir) / ("stage" + std::to_string(stage) + ".tsv");
}

// Names reach intermediate files verbatim; the record grammar reserves these.
void requireSafeNames(const PolyContext& ctx) {
  for (Mode k = 0; k < ctx.arity(); ++k) {
    for (std::size_t id = 0; id < ctx.modeSize(k); ++id) {
      const std::string& name = ctx.entityName(k, static_cast<Id>(id));
      if (name.find_first_of("\t\n\r,;|") != std::string::npos) {
        throw FormatError("entity name '" + name +
                          "' contains a reserved delimiter and cannot be spilled to stage files");
      }
    }
  }
}

template <typename Rec, typename SerKey, typename SerVal>
void writeStageFile(const std::filesystem::path& path, const char* tag,
                    const std::vector<Rec>& records, SerKey&& serKey, SerVal&& serVal) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open stage file for writing: " + path.string());
  }
  std::string line;
  for (const Rec& rec : records) {
    line.assign(tag);
    line += '\t';
    line += serKey(rec.key);
    line += '\t';
    line += serVal(rec.value);
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  out.flush();
  if (!out) {
    throw IoError("failed writing stage file: " + path.string());
  }
}

template <typename Rec, typename ParseLine>
std::vector<Rec> readStageFile(const std::filesystem::path& path, const char* tag,
                               ParseLine&& parseLine) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open stage file for reading: " + path.string());
  }
  std::vector<Rec> records;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineNo) +
                        ": stage record needs three tab-separated fields");
    }
    const std::string_view stageId = std::string_view(line).substr(0, tab1);
    if (stageId != tag) {
      throw FormatError(path.string() + ":" + std::to_string(lineNo) + ": expected stage id '" +
                        tag + "', got '" + std::string(stageId) + "'");
    }
    const std::string_view keyText = std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string_view valueText = std::string_view(line).substr(tab2 + 1);
    records.push_back(parseLine(keyText, valueText));
  }
  return records;
}

// Concatenates chunk-local outputs in chunk order.
template <typename T>
std::vector<T> concatChunks(std::vector<std::vector<T>>&& locals) {
  std::size_t total = 0;
  for (const auto& l : locals) total += l.size();
  std::vector<T> out;
  out.reserve(total);
  for (auto& l : locals) {
    for (T& item : l) out.push_back(std::move(item));
    l.clear();
    l.shrink_to_fit();
  }
  return out;
}

void validateConfig(const PipelineConfig& cfg) {
  if (cfg.mapWorkers < 1 || cfg.reduceWorkers < 1) {
    throw ConfigError("worker counts must be at least 1");
  }
  if (cfg.partitions < 1) {
    throw ConfigError("partition count must be at least 1");
  }
  if (cfg.theta < 0.0 || cfg.theta > 1.0) {
    throw ConfigError("theta must lie in [0,1]");
  }
  if (cfg.storage == IntermediateStorage::Files && cfg.spillDir.empty()) {
    throw ConfigError("file-backed intermediates require a spill directory");
  }
}

}  // namespace

PipelineRun runPipeline(const PolyContext& ctx, const PipelineConfig& cfg) {
  validateConfig(cfg);
  const bool files = cfg.storage == IntermediateStorage::Files;
  if (files) {
    requireSafeNames(ctx);
    std::filesystem::create_directories(cfg.spillDir);
  }

  PipelineRun run;
  StageCounters& ct = run.counters;
  StageTimings& tm = run.timings;
  const auto t0 = Clock::now();

  // ---- Stage 1: map ----
  auto phaseStart = Clock::now();
  const auto& tuples = ctx.tuples();
  std::vector<Map1Record> records1;
  {
    const std::size_t chunks =
        std::max<std::size_t>(1, std::min<std::size_t>(cfg.mapWorkers, tuples.size()));
    std::vector<std::vector<Map1Record>> locals(chunks);
    detail::parallelChunks(tuples.size(), cfg.mapWorkers,
                           [&](std::size_t begin, std::size_t end, std::size_t c) {
                             for (std::size_t i = begin; i < end; ++i) map1(tuples[i], locals[c]);
                           });
    records1 = concatChunks(std::move(locals));
  }
  ct.map1Records = records1.size();
  if (files) {
    writeStageFile(stagePath(cfg, 1), "S1", records1,
                   [&](const SubRelationKey& k) { return serializeSubRelationKey(ctx, k); },
                   [&](const EntityId& v) { return ctx.entityName(v.mode, v.id); });
    records1 = readStageFile<Map1Record>(
        stagePath(cfg, 1), "S1", [&](std::string_view keyText, std::string_view valueText) {
          SubRelationKey key = parseSubRelationKey(ctx, keyText);
          const EntityId value{key.omitted, lookupEntity(ctx, key.omitted, valueText)};
          return Map1Record{std::move(key), value};
        });
  }
  tm.map1Ms = msSince(phaseStart);

  // ---- Stage 1: shuffle + reduce ----
  phaseStart = Clock::now();
  std::vector<Reduce1Record> records2;
  {
    auto parts = shuffleStage1(std::move(records1), ctx, cfg);
    std::vector<std::vector<Reduce1Record>> perPartition(parts.size());
    detail::parallelIndices(parts.size(), cfg.reduceWorkers, [&](std::size_t p) {
      perPartition[p].reserve(parts[p].size());
      for (const auto& group : parts[p]) {
        perPartition[p].push_back(reduce1(group.key, group.values));
      }
      parts[p].clear();
    });
    records2 = concatChunks(std::move(perPartition));
  }
  ct.reduce1Groups = records2.size();
  if (files) {
    writeStageFile(stagePath(cfg, 2), "S2", records2,
                   [&](const SubRelationKey& k) { return serializeSubRelationKey(ctx, k); },
                   [&](const CumulusPtr& v) { return serializeCumulus(ctx, *v); });
    records2 = readStageFile<Reduce1Record>(
        stagePath(cfg, 2), "S2", [&](std::string_view keyText, std::string_view valueText) {
          return Reduce1Record{parseSubRelationKey(ctx, keyText),
                               std::make_shared<const Cumulus>(parseCumulus(ctx, valueText))};
        });
  }
  tm.reduce1Ms = msSince(phaseStart);

  // ---- Stage 2: map ----
  phaseStart = Clock::now();
  std::vector<Map2Record> records3;
  {
    const std::size_t chunks =
        std::max<std::size_t>(1, std::min<std::size_t>(cfg.mapWorkers, records2.size()));
    std::vector<std::vector<Map2Record>> locals(chunks);
    detail::parallelChunks(records2.size(), cfg.mapWorkers,
                           [&](std::size_t begin, std::size_t end, std::size_t c) {
                             for (std::size_t i = begin; i < end; ++i) {
                               map2(records2[i].key, records2[i].value, locals[c]);
                             }
                           });
    records3 = concatChunks(std::move(locals));
    records2.clear();
    records2.shrink_to_fit();
  }
  ct.map2Records = records3.size();
  for (const Map2Record& rec : records3) ct.map2PayloadIds += rec.value->size();
  if (files) {
    writeStageFile(stagePath(cfg, 3), "S3", records3,
                   [&](const Tuple& t) { return serializeTuple(ctx, t); },
                   [&](const CumulusPtr& v) { return serializeCumulus(ctx, *v); });
    records3 = readStageFile<Map2Record>(
        stagePath(cfg, 3), "S3", [&](std::string_view keyText, std::string_view valueText) {
          return Map2Record{parseTuple(ctx, keyText),
                            std::make_shared<const Cumulus>(parseCumulus(ctx, valueText))};
        });
  }
  tm.map2Ms = msSince(phaseStart);

  // ---- Stage 2: shuffle + reduce ----
  phaseStart = Clock::now();
  std::vector<Reduce2Record> records4;
  {
    auto parts = shuffleStage2(std::move(records3), ctx, cfg);
    std::vector<std::vector<Reduce2Record>> perPartition(parts.size());
    std::vector<std::uint64_t> cumuliSeen(parts.size(), 0);
    detail::parallelIndices(parts.size(), cfg.reduceWorkers, [&](std::size_t p) {
      perPartition[p].reserve(parts[p].size());
      for (const auto& group : parts[p]) {
        cumuliSeen[p] += group.values.size();
        perPartition[p].push_back(reduce2(group.key, group.values));
      }
      parts[p].clear();
    });
    records4 = concatChunks(std::move(perPartition));
    for (std::uint64_t c : cumuliSeen) ct.reduce2CumuliSeen += c;
  }
  ct.reduce2Groups = records4.size();
  if (files) {
    writeStageFile(stagePath(cfg, 4), "S4", records4,
                   [&](const Tuple& t) { return serializeTuple(ctx, t); },
                   [&](const SharedCluster& v) { return serializeSharedCluster(ctx, v); });
    records4 = readStageFile<Reduce2Record>(
        stagePath(cfg, 4), "S4", [&](std::string_view keyText, std::string_view valueText) {
          return Reduce2Record{parseTuple(ctx, keyText), parseSharedCluster(ctx, valueText)};
        });
  }
  tm.reduce2Ms = msSince(phaseStart);

  // ---- Stage 3: map ----
  phaseStart = Clock::now();
  std::vector<Map3Record> records5;
  {
    const std::size_t chunks =
        std::max<std::size_t>(1, std::min<std::size_t>(cfg.mapWorkers, records4.size()));
    std::vector<std::vector<Map3Record>> locals(chunks);
    detail::parallelChunks(records4.size(), cfg.mapWorkers,
                           [&](std::size_t begin, std::size_t end, std::size_t c) {
                             for (std::size_t i = begin; i < end; ++i) {
                               locals[c].push_back(
                                   map3(records4[i].key, std::move(records4[i].value)));
                             }
                           });
    records5 = concatChunks(std::move(locals));
    records4.clear();
    records4.shrink_to_fit();
  }
  ct.map3Records = records5.size();
  if (files) {
    writeStageFile(stagePath(cfg, 5), "S5", records5,
                   [&](const SharedCluster& c) { return serializeSharedCluster(ctx, c); },
                   [&](const Tuple& t) { return serializeTuple(ctx, t); });
    records5 = readStageFile<Map3Record>(
        stagePath(cfg, 5), "S5", [&](std::string_view keyText, std::string_view valueText) {
          return Map3Record{parseSharedCluster(ctx, keyText), parseTuple(ctx, valueText)};
        });
  }
  tm.map3Ms = msSince(phaseStart);

  // ---- Stage 3: shuffle + reduce ----
  phaseStart = Clock::now();
  {
    auto parts = shuffleStage3(std::move(records5), ctx, cfg);
    std::vector<std::vector<ClusterResult>> perPartition(parts.size());
    std::vector<std::uint64_t> groupCounts(parts.size(), 0);
    detail::parallelIndices(parts.size(), cfg.reduceWorkers, [&](std::size_t p) {
      groupCounts[p] = parts[p].size();
      for (const auto& group : parts[p]) {
        if (auto kept = reduce3(group.key, group.values, cfg, &ctx)) {
          perPartition[p].push_back(std::move(*kept));
        }
      }
      parts[p].clear();
    });
    run.clusters = concatChunks(std::move(perPartition));
    for (std::uint64_t g : groupCounts) ct.reduce3Groups += g;
  }
  canonicalize(run.clusters);
  ct.keptClusters = run.clusters.size();
  tm.reduce3Ms = msSince(phaseStart);

  ct.peakIntermediateRecords =
      std::max({ct.map1Records, ct.reduce1Groups, ct.map2Records, ct.reduce2Groups, ct.map3Records});
  tm.totalMs = msSince(t0);
  return run;
}

}  // namespace oac
