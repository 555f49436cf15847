#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oac/mapreduce.hpp"

namespace oac {

// Per-run statistics, printed as `key: value` lines on the diagnostic
// stream. Pipeline-only fields stay absent for the other engines.
struct RunReport {
  std::string engine;
  std::size_t arity = 0;
  std::vector<std::size_t> modeSizes;
  std::size_t tupleCount = 0;
  std::size_t duplicatesDropped = 0;
  double contextDensity = 0.0;
  std::string params;
  std::uint64_t clustersPreDedup = 0;  // generated clusters the output collapses (sum of generator counts)
  std::size_t clusters = 0;
  std::optional<StageTimings> stageTimings;
  std::optional<std::uint64_t> peakIntermediateRecords;
  std::optional<std::string> spillDir;
  double totalMs = 0.0;

  void print(std::ostream& out) const;
};

}  // namespace oac
