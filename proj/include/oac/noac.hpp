#pragma once

#include <cstdint>
#include <vector>

#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

struct NoacParams {
  double delta = 0.0;
  double rhoMin = 0.0;
  // Empty: no cardinality constraint. One entry: applied to every mode.
  // Otherwise: one entry per mode.
  std::vector<std::size_t> minSup;
  // Permit unvalued contexts by treating every value as equal (the 0/1
  // reduction); without it an unvalued context is a configuration error.
  bool binaryFallback = false;
  unsigned workers = 1;
};

struct NoacResult {
  std::vector<ClusterResult> clusters;
  std::uint64_t candidates = 0;     // one per tuple of I
  std::uint64_t validPreDedup = 0;  // candidates passing validity, before dedup
};

// Validity gate: exact density ≥ rhoMin and every component's cardinality ≥
// its minSup entry. Empty components make density undefined.
bool isValid(const PolyContext& ctx, const MultimodalCluster& cluster, const NoacParams& params);

// δ-operator engine: one candidate cluster per tuple via delta cumuli, the
// validity gate, structural dedup, canonical output. With constant values
// (or the binary fallback) and delta=0 it coincides with the prime-operator
// engines at theta=rhoMin.
NoacResult noacCluster(const PolyContext& ctx, const NoacParams& params);

}  // namespace oac
