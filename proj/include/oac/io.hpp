#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oac/context.hpp"
#include "oac/types.hpp"

namespace oac {

// One tuple per line, entity names tab-separated; a trailing numeric column
// carries the valuation when `valued`. Blank lines are skipped; errors name
// the offending line.
PolyContext readTsv(const std::string& path, std::size_t arity, bool valued = false);
PolyContext readTsvStream(std::istream& in, std::size_t arity, bool valued,
                          const std::string& sourceName = "<stream>");

void writeTsv(const PolyContext& ctx, std::ostream& out);
void writeTsvFile(const PolyContext& ctx, const std::string& path);

// Dense cube minus its diagonal: arity 3, |I| = n³ − n.
PolyContext genK1(std::size_t n);

// `blocks` disjoint full cuboids of side s: arity 3, |I| = blocks · s³.
PolyContext genK2(std::size_t s, std::size_t blocks = 3);

// One full cuboid of side s over `arity` modes: |I| = s^arity.
PolyContext genK3(std::size_t s, std::size_t arity = 4);

struct RandomSpec {
  std::size_t arity = 3;
  std::vector<std::size_t> sizes;  // one entry per mode
  double fill = 0.3;               // independent keep-probability per cell
  std::uint64_t seed = 0;
  bool valued = false;
  int valueLevels = 6;  // values drawn uniformly from {0, …, valueLevels−1}
};

PolyContext genRandom(const RandomSpec& spec);

enum class OutputFormat { Display, Machine };

// Display: every cluster as a braced block, one modality per line. Machine:
// one cluster per line — N comma-joined modalities, generator count, density
// (six decimals), tab-separated. Machine lines are the bit-exact testing
// surface, so names containing tabs or commas are rejected there.
void writeClusters(const PolyContext& ctx, std::span<const ClusterResult> clusters,
                   OutputFormat format, std::ostream& out);

struct MachineCluster {
  std::vector<std::vector<std::string>> modalities;
  std::uint64_t generatorCount = 0;
  double density = 0.0;
};

// Reads writeClusters' machine format back; errors name the offending line.
std::vector<MachineCluster> parseMachine(std::istream& in);

// Exactly the machine format's density rendering.
std::string formatDensity(double density);

}  // namespace oac
