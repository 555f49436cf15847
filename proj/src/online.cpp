#include "oac/online.hpp"

#include <algorithm>
#include <utility>

#include "oac/cluster_set.hpp"
#include "oac/errors.hpp"

namespace oac {

OnlineState::OnlineState(std::size_t arity, bool keepTuples)
    : arity_(arity), keepTuples_(keepTuples), table_(arity) {
  if (arity < 2) {
    throw ConfigError("online state arity must be at least 2");
  }
}

void OnlineState::addBatch(std::span<const Tuple> batch) {
  for (const Tuple& t : batch) {
    if (t.arity() != arity_) {
      throw FormatError("ingested tuple arity does not match the stream");
    }
    if (!seen_.insert(t).second) {
      ++duplicatesSkipped_;
      continue;
    }
    table_.add(t);
    records_.push_back(t);
  }
}

MultimodalCluster OnlineState::resolve(const Tuple& t) const {
  MultimodalCluster cluster;
  cluster.components.reserve(arity_);
  for (Mode k = 0; k < arity_; ++k) {
    const std::vector<Id>* members = table_.find(k, subRemaining(t, k));
    if (members == nullptr) {
      throw IntegrityError("online record references a missing table key");
    }
    Cumulus c{k, *members};
    // Table lists grow in arrival order (and merges may append duplicates);
    // canonical form is sorted unique.
    std::sort(c.members.begin(), c.members.end());
    c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
    cluster.components.push_back(std::move(c));
  }
  cluster.generatorCount = 1;
  cluster.generator = t;
  return cluster;
}

std::vector<MultimodalCluster> OnlineState::snapshotClusters() const {
  std::vector<MultimodalCluster> out;
  out.reserve(records_.size());
  for (const Tuple& t : records_) out.push_back(resolve(t));
  return out;
}

std::vector<ClusterResult> OnlineState::postProcess(double theta, DensityMode densityMode,
                                                    std::span<const std::size_t> minCardinality,
                                                    unsigned workers) const {
  if (theta < 0.0 || theta > 1.0) {
    throw ConfigError("theta must lie in [0,1]");
  }
  if (!minCardinality.empty() && minCardinality.size() != arity_) {
    throw ConfigError("minimum-cardinality list must have one entry per mode");
  }
  ClusterAccumulator acc;
  for (const Tuple& t : records_) acc.add(resolve(t));

  if (densityMode == DensityMode::Exact) {
    if (!keepTuples_) {
      throw ConfigError(
          "exact-density post-processing needs the ingested tuples; "
          "this state was created with keepTuples=false");
    }
    const PolyContext ctx = contextFromTuples(arity_, records_);
    return finalizeClusters(ctx, acc.take(), theta, densityMode, minCardinality, workers);
  }

  // Generator-count density needs no context: count / volume, then the
  // cardinality filter and canonical sort.
  std::vector<ClusterResult> out;
  for (MultimodalCluster& c : acc.take()) {
    bool keep = true;
    for (std::size_t k = 0; k < minCardinality.size(); ++k) {
      if (c.components[k].size() < minCardinality[k]) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    const double d = static_cast<double>(c.generatorCount) / volumeAsDouble(c);
    if (d < theta) continue;
    out.push_back(ClusterResult{std::move(c), d});
  }
  canonicalize(out);
  return out;
}

void OnlineState::merge(OnlineState&& other) {
  if (other.arity_ != arity_) {
    throw ConfigError("cannot merge online states of different arity");
  }
  duplicatesSkipped_ += other.duplicatesSkipped_;
  for (Tuple& t : other.records_) {
    if (!seen_.insert(t).second) {
      // The same tuple arrived on both streams; its table entries exist on
      // both sides and collapse during resolution.
      ++duplicatesSkipped_;
      continue;
    }
    records_.push_back(std::move(t));
  }
  table_.absorb(std::move(other.table_));
  other.records_.clear();
  other.seen_.clear();
}

}  // namespace oac
