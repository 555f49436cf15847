#include "oac/report.hpp"

#include <cstdio>
#include <ostream>

namespace oac {

namespace {

std::string ms(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return std::string(buf);
}

std::string ratio(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return std::string(buf);
}

}  // namespace

void RunReport::print(std::ostream& out) const {
  out << "engine: " << engine << '\n';
  out << "arity: " << arity << '\n';
  out << "mode-sizes:";
  for (std::size_t s : modeSizes) out << ' ' << s;
  out << '\n';
  out << "tuples: " << tupleCount << '\n';
  out << "duplicates-dropped: " << duplicatesDropped << '\n';
  out << "context-density: " << ratio(contextDensity) << '\n';
  if (!params.empty()) out << "params: " << params << '\n';
  out << "clusters-pre-dedup: " << clustersPreDedup << '\n';
  out << "clusters: " << clusters << '\n';
  if (stageTimings) {
    out << "stage1-ms: map=" << ms(stageTimings->map1Ms)
        << " reduce=" << ms(stageTimings->reduce1Ms) << '\n';
    out << "stage2-ms: map=" << ms(stageTimings->map2Ms)
        << " reduce=" << ms(stageTimings->reduce2Ms) << '\n';
    out << "stage3-ms: map=" << ms(stageTimings->map3Ms)
        << " reduce=" << ms(stageTimings->reduce3Ms) << '\n';
  }
  if (peakIntermediateRecords) {
    out << "peak-intermediate-records: " << *peakIntermediateRecords << '\n';
  }
  if (spillDir) {
    out << "spill-dir: " << *spillDir << '\n';
  }
  out << "total-ms: " << ms(totalMs) << '\n';
}

}  // namespace oac
