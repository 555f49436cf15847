#include "oac/operators.hpp"

#include <cmath>
#include <utility>

#include "oac/cluster_set.hpp"
#include "oac/errors.hpp"

namespace oac {

namespace {

// Substitution probe shared by both cumulus flavours: walk every mode-k
// entity, swap it into position k, keep it when the swapped tuple exists and
// the filter accepts its relation index.
template <typename Accept>
Cumulus probeCumulus(const PolyContext& ctx, const Tuple& t, Mode k, Accept&& accept) {
  Cumulus c{k, {}};
  Tuple probe = t;
  const Id n = static_cast<Id>(ctx.modeSize(k));
  c.members.reserve(n);
  for (Id e = 0; e < n; ++e) {
    probe.ids[k] = e;
    const auto idx = ctx.findIndex(probe);
    if (idx && accept(*idx)) c.members.push_back(e);
  }
  return c;
}

void checkCumulusArgs(const PolyContext& ctx, const Tuple& t, Mode k) {
  if (t.arity() != ctx.arity()) {
    throw PreconditionError("cumulus tuple arity does not match the context");
  }
  if (k >= ctx.arity()) {
    throw PreconditionError("cumulus mode index out of range");
  }
  if (!ctx.contains(t)) {
    throw PreconditionError("cumulus is defined only for tuples of the relation");
  }
}

}  // namespace

Cumulus cumulus(const PolyContext& ctx, const Tuple& t, Mode k) {
  checkCumulusArgs(ctx, t, k);
  return probeCumulus(ctx, t, k, [](std::uint32_t) { return true; });
}

Cumulus deltaCumulus(const PolyContext& ctx, const Tuple& t, Mode k, double delta) {
  if (!ctx.hasValues()) {
    throw ConfigError("delta cumulus requires a many-valued context");
  }
  if (delta < 0.0) {
    throw ConfigError("delta must be non-negative");
  }
  checkCumulusArgs(ctx, t, k);
  const double base = ctx.value(t);
  return probeCumulus(ctx, t, k, [&](std::uint32_t idx) {
    return std::abs(ctx.valueAt(idx) - base) <= delta;
  });
}

MultimodalCluster generateCluster(const PolyContext& ctx, const Tuple& t) {
  MultimodalCluster c;
  c.components.reserve(ctx.arity());
  for (Mode k = 0; k < ctx.arity(); ++k) {
    c.components.push_back(cumulus(ctx, t, k));
  }
  c.generatorCount = 1;
  c.generator = t;
  return c;
}

std::vector<ClusterResult> oracleEnumerate(const PolyContext& ctx, double theta,
                                           DensityMode mode) {
  ClusterAccumulator acc;
  for (const Tuple& t : ctx.tuples()) {
    acc.add(generateCluster(ctx, t));
  }
  return finalizeClusters(ctx, acc.take(), theta, mode);
}

}  // namespace oac
