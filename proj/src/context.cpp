#include "oac/context.hpp"

#include <cmath>

#include "oac/errors.hpp"

namespace oac {

std::uint64_t volume(const MultimodalCluster& cluster) {
  std::uint64_t v = 1;
  for (const Cumulus& c : cluster.components) {
    const std::uint64_t n = c.members.size();
    if (n == 0) return 0;
    if (v > UINT64_MAX / n) return UINT64_MAX;  // saturate
    v *= n;
  }
  return v;
}

double volumeAsDouble(const MultimodalCluster& cluster) {
  double v = 1.0;
  for (const Cumulus& c : cluster.components) v *= static_cast<double>(c.members.size());
  return v;
}

void canonicalize(std::vector<ClusterResult>& results) {
  std::sort(results.begin(), results.end(), [](const ClusterResult& a, const ClusterResult& b) {
    return componentsLess(a.cluster, b.cluster);
  });
}

bool resultsEqual(std::span<const ClusterResult> a, std::span<const ClusterResult> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!sameComponents(a[i].cluster, b[i].cluster)) return false;
    if (a[i].cluster.generatorCount != b[i].cluster.generatorCount) return false;
    if (a[i].density != b[i].density) return false;
  }
  return true;
}

std::vector<std::size_t> PolyContext::modeSizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(arity());
  for (const auto& dict : names_) sizes.push_back(dict.size());
  return sizes;
}

std::optional<Id> PolyContext::entityId(Mode k, std::string_view name) const {
  const auto& map = ids_[k];
  auto it = map.find(std::string(name));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> PolyContext::findIndex(const Tuple& t) const {
  if (t.arity() != arity()) return std::nullopt;
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double PolyContext::value(const Tuple& t) const {
  if (!valued_) throw ConfigError("context has no valuation");
  auto idx = findIndex(t);
  if (!idx) throw PreconditionError("tuple is not in the relation");
  return values_[*idx];
}

double PolyContext::fillDensity() const {
  double cells = 1.0;
  for (const auto& dict : names_) cells *= static_cast<double>(dict.size());
  if (cells == 0.0) return 0.0;
  return static_cast<double>(tuples_.size()) / cells;
}

ContextBuilder::ContextBuilder(std::size_t arity, bool valued) {
  if (arity < 2) throw ConfigError("context arity must be at least 2");
  ctx_.modeNames_.resize(arity);
  for (std::size_t k = 0; k < arity; ++k) ctx_.modeNames_[k] = "mode" + std::to_string(k);
  ctx_.names_.resize(arity);
  ctx_.ids_.resize(arity);
  ctx_.valued_ = valued;
}

Id ContextBuilder::intern(Mode k, std::string_view name) {
  auto& map = ctx_.ids_[k];
  auto [it, inserted] = map.try_emplace(std::string(name), static_cast<Id>(ctx_.names_[k].size()));
  if (inserted) ctx_.names_[k].push_back(it->first);
  return it->second;
}

void ContextBuilder::setModeName(Mode k, std::string name) {
  ctx_.modeNames_[k] = std::move(name);
}

void ContextBuilder::addInterned(Tuple t, double value, std::size_t rowNumber) {
  auto it = ctx_.index_.find(t);
  if (it != ctx_.index_.end()) {
    if (ctx_.valued_ && ctx_.values_[it->second] != value) {
      throw FunctionalityViolation(
          "row " + std::to_string(rowNumber) + ": tuple repeated with conflicting values " +
          std::to_string(ctx_.values_[it->second]) + " and " + std::to_string(value));
    }
    ++ctx_.duplicatesDropped_;
    return;
  }
  const auto pos = static_cast<std::uint32_t>(ctx_.tuples_.size());
  ctx_.index_.emplace(t, pos);
  ctx_.tuples_.push_back(std::move(t));
  if (ctx_.valued_) ctx_.values_.push_back(value);
}

void ContextBuilder::addRow(std::span<const std::string> fields, std::size_t rowNumber) {
  if (ctx_.valued_) throw ConfigError("valued context requires a value per row");
  addRow(fields, 0.0, rowNumber);
}

void ContextBuilder::addRow(std::span<const std::string> fields, double value,
                            std::size_t rowNumber) {
  const std::size_t n = ctx_.arity();
  if (fields.size() != n) {
    throw FormatError("row " + std::to_string(rowNumber) + ": expected " + std::to_string(n) +
                      " fields, got " + std::to_string(fields.size()));
  }
  Tuple t;
  t.ids.reserve(n);
  for (std::size_t k = 0; k < n; ++k) t.ids.push_back(intern(static_cast<Mode>(k), fields[k]));
  addInterned(std::move(t), value, rowNumber);
}

void ContextBuilder::addTuple(Tuple t) { addInterned(std::move(t), 0.0, ctx_.tuples_.size() + 1); }

void ContextBuilder::addTuple(Tuple t, double value) {
  addInterned(std::move(t), value, ctx_.tuples_.size() + 1);
}

PolyContext ContextBuilder::finish() {
  finished_ = true;
  return std::move(ctx_);
}

PolyContext buildContext(std::span<const std::vector<std::string>> rows, std::size_t arity,
                         std::span<const double> values) {
  const bool valued = !values.empty();
  if (valued && values.size() != rows.size())
    throw FormatError("value column length does not match row count");
  ContextBuilder builder(arity, valued);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (valued)
      builder.addRow(rows[i], values[i], i + 1);
    else
      builder.addRow(rows[i], i + 1);
  }
  return builder.finish();
}

PolyContext contextFromTuples(std::size_t arity, std::span<const Tuple> tuples,
                              std::span<const double> values) {
  ContextBuilder builder(arity, !values.empty());
  // Register entity ids densely up to the largest id seen per mode.
  std::vector<Id> maxId(arity, 0);
  std::vector<bool> seen(arity, false);
  for (const Tuple& t : tuples) {
    for (std::size_t k = 0; k < arity; ++k) {
      maxId[k] = std::max(maxId[k], t.ids[k]);
      seen[k] = true;
    }
  }
  for (std::size_t k = 0; k < arity; ++k) {
    if (!seen[k]) continue;
    for (Id i = 0; i <= maxId[k]; ++i) builder.intern(static_cast<Mode>(k), std::to_string(i));
  }
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (values.empty())
      builder.addTuple(tuples[i]);
    else
      builder.addTuple(tuples[i], values[i]);
  }
  return builder.finish();
}

namespace {

// Counts box ∩ I by walking the Cartesian product of the components.
std::uint64_t countByBoxIteration(const PolyContext& ctx, const MultimodalCluster& cluster) {
  const std::size_t n = cluster.components.size();
  Tuple probe;
  probe.ids.resize(n);
  std::vector<std::size_t> cursor(n, 0);
  for (std::size_t k = 0; k < n; ++k) probe.ids[k] = cluster.components[k].members[0];
  std::uint64_t count = 0;
  while (true) {
    if (ctx.contains(probe)) ++count;
    // odometer increment
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++cursor[k] < cluster.components[k].members.size()) {
        probe.ids[k] = cluster.components[k].members[cursor[k]];
        break;
      }
      cursor[k] = 0;
      probe.ids[k] = cluster.components[k].members[0];
      if (k == 0) return count;
    }
  }
}

// Counts box ∩ I by scanning the relation and testing component membership.
std::uint64_t countByRelationScan(const PolyContext& ctx, const MultimodalCluster& cluster) {
  const std::size_t n = cluster.components.size();
  std::uint64_t count = 0;
  for (const Tuple& t : ctx.tuples()) {
    bool inside = true;
    for (std::size_t k = 0; k < n && inside; ++k)
      inside = cluster.components[k].contains(t.ids[k]);
    if (inside) ++count;
  }
  return count;
}

}  // namespace

double exactDensity(const PolyContext& ctx, const MultimodalCluster& cluster) {
  const std::uint64_t vol = volume(cluster);
  if (vol == 0) throw UndefinedDensityError("cluster has an empty component");
  const std::uint64_t hits = vol <= ctx.tupleCount() ? countByBoxIteration(ctx, cluster)
                                                     : countByRelationScan(ctx, cluster);
  return static_cast<double>(hits) / volumeAsDouble(cluster);
}

double clusterDensity(const PolyContext& ctx, const MultimodalCluster& cluster,
                      DensityMode mode) {
  if (mode == DensityMode::Generators) {
    const std::uint64_t vol = volume(cluster);
    if (vol == 0) throw UndefinedDensityError("cluster has an empty component");
    return static_cast<double>(cluster.generatorCount) / volumeAsDouble(cluster);
  }
  return exactDensity(ctx, cluster);
}

}  // namespace oac
