#pragma once

#include <vector>

#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

// cum(t,k): all mode-k entities whose substitution at position k keeps the
// tuple inside the relation. Requires t in I; always contains t.ids[k].
Cumulus cumulus(const PolyContext& ctx, const Tuple& t, Mode k);

// δ-restricted cumulus over a valued context: keeps only entities whose tuple
// value differs from V(t) by at most delta (inclusive).
Cumulus deltaCumulus(const PolyContext& ctx, const Tuple& t, Mode k, double delta);

// The cluster generated by one tuple: one cumulus per mode.
MultimodalCluster generateCluster(const PolyContext& ctx, const Tuple& t);

// Brute-force reference enumeration: generate per tuple, deduplicate
// structurally, filter by the selected density ≥ theta, return canonically
// sorted. Every engine must agree with this; it is the anti-drift anchor.
std::vector<ClusterResult> oracleEnumerate(const PolyContext& ctx, double theta,
                                           DensityMode mode);

}  // namespace oac
