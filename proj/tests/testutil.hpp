#pragma once

// Shared fixtures and a deliberately naive reference implementation. The
// reference enumerator below re-derives clusters by scanning the raw tuple
// list and re-counts densities by walking the whole box, sharing no code
// with the engines it checks.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "oac/context.hpp"
#include "oac/io.hpp"
#include "oac/types.hpp"

namespace testutil {

// The running 8-triple example: users u1..u3, items i1..i2, labels l1..l2.
//   l1 slice: u1-i1, u2-i1, u2-i2, u3-i2
//   l2 slice: u1-i1, u2-i1, u2-i2, u3-i1
inline std::vector<std::vector<std::string>> toyRows() {
  return {
      {"u1", "i1", "l1"}, {"u2", "i1", "l1"}, {"u2", "i2", "l1"}, {"u3", "i2", "l1"},
      {"u1", "i1", "l2"}, {"u2", "i1", "l2"}, {"u2", "i2", "l2"}, {"u3", "i1", "l2"},
  };
}

inline oac::PolyContext toyContext() {
  return oac::buildContext(toyRows(), 3);
}

inline oac::PolyContext toyValuedContext(double value = 1.0) {
  auto rows = toyRows();
  std::vector<double> values(rows.size(), value);
  return oac::buildContext(rows, 3, values);
}

inline std::string toyTsv() {
  std::ostringstream out;
  for (const auto& row : toyRows()) out << row[0] << '\t' << row[1] << '\t' << row[2] << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Reference enumerator (independent of the engine code paths).
// ---------------------------------------------------------------------------

struct RefCluster {
  std::vector<std::vector<oac::Id>> components;  // sorted members per mode
  std::uint64_t generatorCount = 0;
  double exactDensity = 0.0;
  double generatorDensity = 0.0;
};

inline bool refComponentsLess(const RefCluster& a, const RefCluster& b) {
  return a.components < b.components;
}

// Brute force: for tuple t and mode k, an entity x belongs to component k iff
// some tuple of I equals t everywhere except position k, where it holds x.
inline std::vector<std::vector<oac::Id>> refComponentsOf(const std::vector<oac::Tuple>& tuples,
                                                         const oac::Tuple& t) {
  const std::size_t arity = t.ids.size();
  std::vector<std::vector<oac::Id>> comps(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    std::set<oac::Id> members;
    for (const oac::Tuple& other : tuples) {
      bool agreesElsewhere = true;
      for (std::size_t j = 0; j < arity; ++j) {
        if (j != k && other.ids[j] != t.ids[j]) {
          agreesElsewhere = false;
          break;
        }
      }
      if (agreesElsewhere) members.insert(other.ids[k]);
    }
    comps[k].assign(members.begin(), members.end());
  }
  return comps;
}

// Counts |box ∩ I| by walking every cell of the box with an odometer.
inline std::uint64_t refBoxHits(const std::set<std::vector<oac::Id>>& relation,
                                const std::vector<std::vector<oac::Id>>& comps) {
  std::vector<std::size_t> at(comps.size(), 0);
  std::uint64_t hits = 0;
  while (true) {
    std::vector<oac::Id> cell(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) cell[k] = comps[k][at[k]];
    if (relation.count(cell) != 0) ++hits;
    std::size_t k = comps.size();
    while (k > 0) {
      --k;
      if (++at[k] < comps[k].size()) break;
      at[k] = 0;
      if (k == 0) return hits;
    }
  }
}

// Full reference enumeration with both density flavours, unfiltered.
inline std::vector<RefCluster> refEnumerate(const oac::PolyContext& ctx) {
  const auto& tuples = ctx.tuples();
  std::set<std::vector<oac::Id>> relation;
  for (const oac::Tuple& t : tuples)
    relation.insert(std::vector<oac::Id>(t.ids.begin(), t.ids.end()));

  std::map<std::vector<std::vector<oac::Id>>, std::uint64_t> tally;
  for (const oac::Tuple& t : tuples) ++tally[refComponentsOf(tuples, t)];

  std::vector<RefCluster> out;
  for (const auto& [comps, count] : tally) {
    RefCluster rc;
    rc.components = comps;
    rc.generatorCount = count;
    std::uint64_t vol = 1;
    for (const auto& comp : comps) vol *= comp.size();
    rc.exactDensity = static_cast<double>(refBoxHits(relation, comps)) / static_cast<double>(vol);
    rc.generatorDensity = static_cast<double>(count) / static_cast<double>(vol);
    out.push_back(std::move(rc));
  }
  std::sort(out.begin(), out.end(), refComponentsLess);
  return out;
}

inline std::vector<RefCluster> refFilter(std::vector<RefCluster> all, double theta,
                                         oac::DensityMode mode) {
  std::vector<RefCluster> kept;
  for (RefCluster& rc : all) {
    const double d =
        mode == oac::DensityMode::Exact ? rc.exactDensity : rc.generatorDensity;
    if (d >= theta) kept.push_back(std::move(rc));
  }
  return kept;
}

// Engine results and reference clusters agree iff components, generator
// counts, and the selected density all match pairwise in canonical order.
inline bool matchesReference(std::span<const oac::ClusterResult> got,
                             const std::vector<RefCluster>& want, oac::DensityMode mode) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto& cluster = got[i].cluster;
    if (cluster.components.size() != want[i].components.size()) return false;
    for (std::size_t k = 0; k < cluster.components.size(); ++k) {
      if (cluster.components[k].members != want[i].components[k]) return false;
    }
    if (cluster.generatorCount != want[i].generatorCount) return false;
    const double wantDensity =
        mode == oac::DensityMode::Exact ? want[i].exactDensity : want[i].generatorDensity;
    if (got[i].density != wantDensity) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Misc helpers.
// ---------------------------------------------------------------------------

inline std::string renderMachine(const oac::PolyContext& ctx,
                                 std::span<const oac::ClusterResult> results) {
  std::ostringstream out;
  oac::writeClusters(ctx, results, oac::OutputFormat::Machine, out);
  return out.str();
}

inline oac::PolyContext smallRandom(std::size_t arity, std::vector<std::size_t> sizes,
                                    double fill, std::uint64_t seed, bool valued = false) {
  oac::RandomSpec spec;
  spec.arity = arity;
  spec.sizes = std::move(sizes);
  spec.fill = fill;
  spec.seed = seed;
  spec.valued = valued;
  return oac::genRandom(spec);
}

}  // namespace testutil
