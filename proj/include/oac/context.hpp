#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oac/types.hpp"

namespace oac {

// An immutable N-modal (optionally valued) context: per-mode interned entity
// dictionaries plus a deduplicated tuple set. Safe for concurrent reads once
// constructed; construction goes through ContextBuilder or the build helpers.
class PolyContext {
 public:
  PolyContext() = default;

  std::size_t arity() const { return names_.size(); }
  std::size_t modeSize(Mode k) const { return names_[k].size(); }
  std::vector<std::size_t> modeSizes() const;

  const std::string& modeName(Mode k) const { return modeNames_[k]; }
  const std::string& entityName(Mode k, Id id) const { return names_[k][id]; }
  std::optional<Id> entityId(Mode k, std::string_view name) const;

  // Tuples in first-occurrence order.
  const std::vector<Tuple>& tuples() const { return tuples_; }
  std::size_t tupleCount() const { return tuples_.size(); }
  std::size_t duplicatesDropped() const { return duplicatesDropped_; }

  bool contains(const Tuple& t) const { return findIndex(t).has_value(); }
  std::optional<std::uint32_t> findIndex(const Tuple& t) const;

  bool hasValues() const { return valued_; }
  // Valuation of a tuple of I; requires hasValues() and t in I.
  double value(const Tuple& t) const;
  double valueAt(std::uint32_t index) const { return values_[index]; }

  // |I| / prod mode sizes; 0 when any mode is empty.
  double fillDensity() const;

 private:
  friend class ContextBuilder;

  std::vector<std::string> modeNames_;
  std::vector<std::vector<std::string>> names_;                  // id -> name
  std::vector<std::unordered_map<std::string, Id>> ids_;         // name -> id
  std::vector<Tuple> tuples_;
  std::unordered_map<Tuple, std::uint32_t, TupleHash> index_;    // tuple -> position
  std::vector<double> values_;
  bool valued_ = false;
  std::size_t duplicatesDropped_ = 0;
};

// Incremental construction with interning and duplicate handling. Repeated
// tuples are dropped (counted); a repeated tuple with a different value in a
// valued context raises FunctionalityViolation.
class ContextBuilder {
 public:
  explicit ContextBuilder(std::size_t arity, bool valued = false);

  Id intern(Mode k, std::string_view name);

  // rowNumber is used in error messages only (1-based input line/row).
  void addRow(std::span<const std::string> fields, std::size_t rowNumber);
  void addRow(std::span<const std::string> fields, double value, std::size_t rowNumber);
  void addTuple(Tuple t);
  void addTuple(Tuple t, double value);

  void setModeName(Mode k, std::string name);

  PolyContext finish();

 private:
  void addInterned(Tuple t, double value, std::size_t rowNumber);

  PolyContext ctx_;
  bool finished_ = false;
};

// Materializes a context from raw string rows. Every row must have exactly
// `arity` fields; `values`, when non-empty, must be parallel to `rows`.
PolyContext buildContext(std::span<const std::vector<std::string>> rows, std::size_t arity,
                         std::span<const double> values = {});

// Rebuilds a context from already-interned tuples (entity names synthesized
// from the ids). Used where only membership and mode sizes matter, e.g.
// exact-density post-processing over an ingested stream.
PolyContext contextFromTuples(std::size_t arity, std::span<const Tuple> tuples,
                              std::span<const double> values = {});

inline bool containsTuple(const PolyContext& ctx, const Tuple& t) {
  return ctx.contains(t);
}

// Exact box density: |box(cluster) ∩ I| / volume(cluster). Iterates whichever
// is smaller — the box (probing membership) or I (testing component
// membership) — so one call costs O(min(volume, |I|)).
double exactDensity(const PolyContext& ctx, const MultimodalCluster& cluster);

// Density under the selected mode; Generators uses generatorCount / volume.
double clusterDensity(const PolyContext& ctx, const MultimodalCluster& cluster,
                      DensityMode mode);

}  // namespace oac
