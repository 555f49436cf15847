#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "oac/batch.hpp"
#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

// One-pass online engine. Each incoming tuple mutates the shared cumulus
// tables (one entry gained per mode) and appends one lightweight record; the
// records are resolved against the live tables only when a snapshot or
// post-processing is requested, so earlier records see later growth for free.
//
// Single writer: at most one addBatch/merge at a time; snapshotClusters and
// postProcess require ingestion to be quiescent.
class OnlineState {
 public:
  // keepTuples controls whether exact-density post-processing is available:
  // it needs a context rebuilt from the ingested tuples. Generator-count
  // density never needs one.
  explicit OnlineState(std::size_t arity, bool keepTuples = true);

  std::size_t arity() const { return arity_; }

  // Ingests a batch: per new tuple, N table updates and one record.
  // Previously seen tuples are skipped (counted in duplicatesSkipped).
  void addBatch(std::span<const Tuple> batch);

  // Number of records == number of distinct tuples ingested.
  std::size_t recordCount() const { return records_.size(); }
  std::size_t duplicatesSkipped() const { return duplicatesSkipped_; }

  // Read access for table-growth inspection.
  const CumulusTable& table() const { return table_; }
  const std::vector<Tuple>& records() const { return records_; }

  // Resolves every record against the current tables, in ingestion order.
  // Duplicate clusters are NOT removed here; that is post-processing's job.
  std::vector<MultimodalCluster> snapshotClusters() const;

  // Resolve + structural dedup + density ≥ theta + optional per-mode minimum
  // cardinalities, in canonical order. Equals batchCluster on the same tuple
  // set. Exact mode rebuilds a context from the ingested tuples and fails
  // with a configuration error when keepTuples was disabled.
  std::vector<ClusterResult> postProcess(double theta, DensityMode densityMode,
                                         std::span<const std::size_t> minCardinality = {},
                                         unsigned workers = 1) const;

  // Folds another state in, as if its stream had been ingested here: tables
  // union per key, records of unseen tuples append in the other's order.
  void merge(OnlineState&& other);

 private:
  // Copies the record's cumuli out of the live table in canonical form.
  MultimodalCluster resolve(const Tuple& t) const;

  std::size_t arity_;
  bool keepTuples_;
  CumulusTable table_;
  std::vector<Tuple> records_;
  std::unordered_set<Tuple, TupleHash> seen_;
  std::size_t duplicatesSkipped_ = 0;
};

}  // namespace oac
