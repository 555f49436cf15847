// Acceptance gate: one line per criterion, [PASS]/[FAIL] plus a short
// description and the measured wall time. Exit code = number of failures.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oac/batch.hpp"
#include "oac/context.hpp"
#include "oac/io.hpp"
#include "oac/mapreduce.hpp"
#include "oac/noac.hpp"
#include "oac/online.hpp"
#include "testutil.hpp"

using namespace oac;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double medianOf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  if (n % 2 == 1) return samples[n / 2];
  return 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

struct Outcome {
  bool pass = true;
  std::string detail;  // first failure, or extra context for the report line

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void note(const std::string& text) {
    if (pass && detail.empty()) detail = text;
  }
};

std::vector<ClusterResult> runOnline(const PolyContext& ctx, double theta, DensityMode mode) {
  OnlineState state(ctx.arity());
  state.addBatch(ctx.tuples());
  return state.postProcess(theta, mode);
}

std::vector<ClusterResult> runMapReduce(const PolyContext& ctx, double theta, DensityMode mode,
                                        unsigned workers = 1, unsigned partitions = 1) {
  PipelineConfig cfg;
  cfg.theta = theta;
  cfg.densityMode = mode;
  cfg.mapWorkers = workers;
  cfg.reduceWorkers = workers;
  cfg.partitions = partitions;
  return runPipeline(ctx, cfg).clusters;
}

std::vector<ClusterResult> runNoacAsPrime(const PolyContext& ctx, double theta) {
  NoacParams params;
  params.rhoMin = theta;
  params.binaryFallback = !ctx.hasValues();
  return noacCluster(ctx, params).clusters;
}

bool isFullBlock(const ClusterResult& r, std::size_t side, std::size_t block,
                 std::uint64_t generators) {
  if (r.density != 1.0) return false;
  if (r.cluster.generatorCount != generators) return false;
  for (const Cumulus& comp : r.cluster.components) {
    if (comp.members.size() != side) return false;
    for (std::size_t j = 0; j < side; ++j) {
      if (comp.members[j] != block * side + j) return false;
    }
  }
  return true;
}

// --- criterion 1 -----------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  PolyContext ctx = testutil::toyContext();
  PolyContext valued = testutil::toyValuedContext(1.0);

  const std::string goldenDense =
      "u1,u2\ti1\tl1,l2\t1\t1.000000\n"
      "u1,u2,u3\ti1\tl2\t1\t1.000000\n"
      "u2\ti1,i2\tl1,l2\t1\t1.000000\n"
      "u2,u3\ti2\tl1\t1\t1.000000\n";

  for (double theta : {0.0, 1.0}) {
    auto batch = batchCluster(ctx, theta);
    const std::size_t expected = theta == 0.0 ? 8 : 4;
    if (batch.size() != expected) {
      o.fail("batch returned " + std::to_string(batch.size()) + " clusters at theta=" +
             std::to_string(theta));
      return o;
    }
    const std::string reference = testutil::renderMachine(ctx, batch);
    if (theta == 1.0 && reference != goldenDense) {
      o.fail("dense output differs from the four known clusters");
      return o;
    }

    auto compare = [&](const char* name, const std::vector<ClusterResult>& results,
                       const PolyContext& renderCtx) {
      if (testutil::renderMachine(renderCtx, results) != reference) {
        o.fail(std::string(name) + " output is not byte-identical at theta=" +
               std::to_string(theta));
      }
    };
    compare("online", runOnline(ctx, theta, DensityMode::Exact), ctx);
    compare("mapreduce", runMapReduce(ctx, theta, DensityMode::Exact), ctx);
    NoacParams params;
    params.rhoMin = theta;  // constant values, delta = 0
    compare("noac", noacCluster(valued, params).clusters, valued);
  }
  return o;
}

// --- criterion 2 -----------------------------------------------------------

Outcome criterion2() {
  Outcome o;

  auto smallStart = Clock::now();
  PolyContext small = genK3(8);
  auto smallRun = runMapReduce(small, 1.0, DensityMode::Exact, 2, 2);
  const double smallSeconds = secondsSince(smallStart);
  if (small.tupleCount() != 4096) o.fail("side-8 cuboid has the wrong tuple count");
  if (smallRun.size() != 1) o.fail("side-8 cuboid did not collapse to one cluster");
  if (smallSeconds >= 1.0) {
    o.fail("side-8 run took " + std::to_string(smallSeconds) + " s (budget 1 s)");
  }

  PolyContext big = genK3(30);
  if (big.tupleCount() != 810000) o.fail("side-30 cuboid has the wrong tuple count");
  auto run = runMapReduce(big, 1.0, DensityMode::Exact, 2, 4);
  if (run.size() != 1) {
    o.fail("side-30 cuboid yielded " + std::to_string(run.size()) + " clusters");
    return o;
  }
  const ClusterResult& only = run.front();
  if (only.density != 1.0 || only.cluster.generatorCount != 810000) {
    o.fail("the single cluster is not the full cuboid");
    return o;
  }
  for (const Cumulus& comp : only.cluster.components) {
    if (comp.members.size() != 30) {
      o.fail("a component does not span its whole mode");
      return o;
    }
  }
  return o;
}

// --- criterion 3 -----------------------------------------------------------

Outcome criterion3() {
  Outcome o;

  PolyContext small = genK2(3);
  auto reference = testutil::refFilter(testutil::refEnumerate(small), 1.0, DensityMode::Exact);
  auto checkSmall = [&](const char* name, const std::vector<ClusterResult>& results) {
    if (!testutil::matchesReference(results, reference, DensityMode::Exact)) {
      o.fail(std::string(name) + " disagrees with the reference on the side-3 blocks");
    }
  };
  checkSmall("batch", batchCluster(small, 1.0));
  checkSmall("online", runOnline(small, 1.0, DensityMode::Exact));
  checkSmall("mapreduce", runMapReduce(small, 1.0, DensityMode::Exact));
  checkSmall("noac", runNoacAsPrime(small, 1.0));

  PolyContext big = genK2(50);
  if (big.tupleCount() != 375000) o.fail("side-50 blocks have the wrong tuple count");
  for (const char* engine : {"batch", "mapreduce"}) {
    auto results = engine == std::string("batch")
                       ? batchCluster(big, 1.0)
                       : runMapReduce(big, 1.0, DensityMode::Exact, 2, 4);
    if (results.size() != 3) {
      o.fail(std::string(engine) + " found " + std::to_string(results.size()) +
             " dense clusters instead of 3");
      return o;
    }
    for (std::size_t b = 0; b < 3; ++b) {
      if (!isFullBlock(results[b], 50, b, 125000)) {
        o.fail(std::string(engine) + ": cluster " + std::to_string(b) +
               " is not the full block");
        return o;
      }
    }
  }
  return o;
}

// --- criterion 4 -----------------------------------------------------------

Outcome criterion4() {
  Outcome o;

  PolyContext small = genK1(8);
  auto reference = testutil::refFilter(testutil::refEnumerate(small), 0.0, DensityMode::Exact);
  if (!testutil::matchesReference(batchCluster(small, 0.0), reference, DensityMode::Exact)) {
    o.fail("batch disagrees with the reference on the side-8 cube");
  }
  if (!testutil::matchesReference(runOnline(small, 0.0, DensityMode::Exact), reference,
                                  DensityMode::Exact)) {
    o.fail("online disagrees with the reference on the side-8 cube");
  }
  if (!testutil::matchesReference(runMapReduce(small, 0.0, DensityMode::Exact), reference,
                                  DensityMode::Exact)) {
    o.fail("mapreduce disagrees with the reference on the side-8 cube");
  }
  if (!testutil::matchesReference(runNoacAsPrime(small, 0.0), reference, DensityMode::Exact)) {
    o.fail("noac disagrees with the reference on the side-8 cube");
  }
  if (!o.pass) return o;

  PolyContext big = genK1(60);
  if (big.tupleCount() != 215940) {
    o.fail("the side-60 cube has the wrong tuple count");
    return o;
  }

  std::string reference60;
  std::ostringstream timing;
  timing.setf(std::ios::fixed);
  timing.precision(1);
  struct EngineRun {
    const char* name;
    std::function<std::vector<ClusterResult>()> run;
  };
  const EngineRun engines[] = {
      {"batch", [&] { return batchCluster(big, 0.0); }},
      {"online", [&] { return runOnline(big, 0.0, DensityMode::Exact); }},
      {"mapreduce", [&] { return runMapReduce(big, 0.0, DensityMode::Exact, 2, 4); }},
      {"noac", [&] { return runNoacAsPrime(big, 0.0); }},
  };
  for (const EngineRun& engine : engines) {
    auto start = Clock::now();
    auto results = engine.run();
    const double seconds = secondsSince(start);
    timing << (reference60.empty() ? "" : ", ") << engine.name << " " << seconds << "s";
    if (seconds >= 300.0) {
      o.fail(std::string(engine.name) + " exceeded the five-minute budget");
      return o;
    }
    if (results.size() != 181) {  // 1 all-distinct + 3·60 one-pair-equal clusters
      o.fail(std::string(engine.name) + " returned " + std::to_string(results.size()) +
             " clusters on the side-60 cube");
      return o;
    }
    std::string text = testutil::renderMachine(big, results);
    if (reference60.empty()) {
      reference60 = std::move(text);
    } else if (text != reference60) {
      o.fail(std::string(engine.name) + " output differs on the side-60 cube");
      return o;
    }
  }
  o.note(timing.str());
  return o;
}

// --- criterion 5 -----------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  const double thetas[] = {0.0, 0.3, 0.7, 1.0};
  const DensityMode modes[] = {DensityMode::Exact, DensityMode::Generators};
  const unsigned workerChoices[] = {1, 2, 4, 8};
  const unsigned partitionChoices[] = {1, 3, 7, 16};

  std::size_t contexts = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t arity = 2 + i % 3;
    std::vector<std::size_t> sizes(arity);
    for (std::size_t k = 0; k < arity; ++k) sizes[k] = 2 + (i * 7 + k * 3) % 5;  // 2..6
    const double fill = 0.1 + 0.1 * (i % 9);  // 0.1..0.9
    PolyContext ctx = testutil::smallRandom(arity, sizes, fill, 5000 + i);
    ++contexts;

    auto all = testutil::refEnumerate(ctx);
    for (double theta : thetas) {
      for (DensityMode mode : modes) {
        auto want = testutil::refFilter(all, theta, mode);
        auto batch = batchCluster(ctx, theta, mode);
        if (!testutil::matchesReference(batch, want, mode)) {
          o.fail("batch diverged from the reference (seed " + std::to_string(5000 + i) + ")");
          return o;
        }
        if (!resultsEqual(runOnline(ctx, theta, mode), batch)) {
          o.fail("online diverged from batch (seed " + std::to_string(5000 + i) + ")");
          return o;
        }
        if (!resultsEqual(runMapReduce(ctx, theta, mode), batch)) {
          o.fail("mapreduce diverged from batch (seed " + std::to_string(5000 + i) + ")");
          return o;
        }
      }
    }

    // Worker/partition invariance, cycling through the parameter grid so all
    // combinations appear across the 200 contexts.
    const double theta = thetas[i % 4];
    const DensityMode mode = modes[(i / 4) % 2];
    const std::string reference =
        testutil::renderMachine(ctx, runMapReduce(ctx, theta, mode, 1, 1));
    for (unsigned workers : workerChoices) {
      for (unsigned partitions : partitionChoices) {
        auto run = runMapReduce(ctx, theta, mode, workers, partitions);
        if (testutil::renderMachine(ctx, run) != reference) {
          o.fail("pipeline output changed at workers=" + std::to_string(workers) +
                 ", partitions=" + std::to_string(partitions) + " (seed " +
                 std::to_string(5000 + i) + ")");
          return o;
        }
      }
    }
  }
  o.note(std::to_string(contexts) + " contexts, 4 thresholds, 2 density modes, 16 grid points");
  return o;
}

// --- criterion 6 -----------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  PolyContext valued = testutil::toyValuedContext(1.0);

  NoacParams plain;  // delta = 0, no filters
  if (!resultsEqual(noacCluster(valued, plain).clusters, batchCluster(valued, 0.0))) {
    o.fail("delta=0 with constant values does not reduce to the prime engine");
    return o;
  }

  NoacParams width;
  width.minSup = {2};
  auto wide = noacCluster(valued, width).clusters;
  if (wide.size() != 3) {
    o.fail("minSup=2 kept " + std::to_string(wide.size()) + " clusters instead of 3");
    return o;
  }
  for (const auto& r : wide) {
    for (const auto& comp : r.cluster.components) {
      if (comp.size() < 2) {
        o.fail("a kept cluster violates the cardinality floor");
        return o;
      }
    }
  }

  NoacParams both;
  both.rhoMin = 0.7;
  both.minSup = {2};
  auto filtered = noacCluster(valued, both).clusters;
  if (filtered.size() != 2) {
    o.fail("rhoMin=0.7, minSup=2 kept " + std::to_string(filtered.size()) +
           " clusters instead of 2");
    return o;
  }
  for (const auto& r : filtered) {
    if (r.density != 0.75) {
      o.fail("a kept cluster has density " + std::to_string(r.density) + " instead of 0.75");
      return o;
    }
  }
  // The dropped candidate is the full box at 8/12.
  for (const auto& r : filtered) {
    if (r.cluster.components[0].members.size() == 3) {
      o.fail("the sparse full box survived the density floor");
      return o;
    }
  }
  return o;
}

// --- criterion 7 -----------------------------------------------------------

double ingestSeconds(const std::vector<Tuple>& tuples) {
  auto start = Clock::now();
  OnlineState state(3);
  state.addBatch(tuples);
  const double seconds = secondsSince(start);
  if (state.recordCount() != tuples.size()) return -1.0;  // keep the state honest
  return seconds;
}

Outcome criterion7() {
  Outcome o;

  // (a) Ingestion linearity: each step roughly doubles |I|, so the per-step
  // time ratio of a linear pipeline stays near 2.
  const std::size_t sides[] = {30, 38, 48};
  std::vector<std::vector<Tuple>> streams;
  for (std::size_t side : sides) streams.push_back(genK1(side).tuples());
  ingestSeconds(streams[0]);  // warm-up

  std::vector<std::vector<double>> samples(3);
  for (int round = 0; round < 5; ++round) {
    for (std::size_t j = 0; j < 3; ++j) samples[j].push_back(ingestSeconds(streams[j]));
  }
  const double t30 = medianOf(samples[0]);
  const double t38 = medianOf(samples[1]);
  const double t48 = medianOf(samples[2]);
  const double r1 = t38 / t30;
  const double r2 = t48 / t38;
  {
    std::ostringstream detail;
    detail.setf(std::ios::fixed);
    detail.precision(2);
    detail << "ingest ratios " << r1 << " and " << r2 << " (band 1.5..3.0)";
    o.note(detail.str());
    if (r1 < 1.5 || r1 > 3.0 || r2 < 1.5 || r2 > 3.0) {
      o.fail(detail.str() + " — outside the linear-growth band");
      return o;
    }
  }

  // (b) Parallel speedup needs real cores; on narrower machines the check is
  // reported as not applicable.
  const unsigned threads = std::thread::hardware_concurrency();
  if (threads < 4) {
    o.detail += "; speedup check skipped: " + std::to_string(threads) + " hardware thread(s)";
    return o;
  }

  PolyContext cube = genK1(40);
  auto mapreduceSeconds = [&](unsigned workers) {
    std::vector<double> runs;
    for (int i = 0; i < 5; ++i) {
      auto start = Clock::now();
      runMapReduce(cube, 0.0, DensityMode::Exact, workers, workers == 1 ? 1 : 8);
      runs.push_back(secondsSince(start));
    }
    return medianOf(runs);
  };
  const double mapOne = mapreduceSeconds(1);
  const double mapFour = mapreduceSeconds(4);
  if (mapFour > 0.8 * mapOne) {
    o.fail("pipeline speedup is only " + std::to_string(mapOne / mapFour) + "x at 4 workers");
    return o;
  }

  PolyContext bigValued = testutil::smallRandom(3, {60, 60, 60}, 0.47, 424242, /*valued=*/true);
  NoacParams params;
  params.delta = 1.0;
  auto noacSeconds = [&](unsigned workers) {
    std::vector<double> runs;
    for (int i = 0; i < 5; ++i) {
      NoacParams p = params;
      p.workers = workers;
      auto start = Clock::now();
      noacCluster(bigValued, p);
      runs.push_back(secondsSince(start));
    }
    return medianOf(runs);
  };
  const double noacOne = noacSeconds(1);
  const double noacFour = noacSeconds(4);
  if (noacFour > 0.8 * noacOne) {
    o.fail("delta-engine speedup is only " + std::to_string(noacOne / noacFour) +
           "x at 4 workers");
  }
  return o;
}

// --- criterion 8 -----------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  PolyContext ctx = genK2(5);
  const std::uint64_t tuples = ctx.tupleCount();  // 3 · 5³ = 375

  PipelineConfig mem;
  mem.mapWorkers = 2;
  mem.reduceWorkers = 2;
  mem.partitions = 3;
  auto inMemory = runPipeline(ctx, mem);

  if (inMemory.counters.map1Records != 3 * tuples) {
    o.fail("stage 1 emitted " + std::to_string(inMemory.counters.map1Records) +
           " records, expected " + std::to_string(3 * tuples));
    return o;
  }
  if (inMemory.counters.reduce2Groups != tuples) {
    o.fail("only " + std::to_string(inMemory.counters.reduce2Groups) + " of " +
           std::to_string(tuples) + " tuples reached the assembly stage");
    return o;
  }
  if (inMemory.counters.reduce2CumuliSeen != 3 * tuples) {
    o.fail("assembly saw " + std::to_string(inMemory.counters.reduce2CumuliSeen) +
           " cumuli, expected exactly three per tuple");
    return o;
  }

  auto dir = std::filesystem::temp_directory_path() / "oac-acceptance-spill";
  std::filesystem::remove_all(dir);
  PipelineConfig files = mem;
  files.storage = IntermediateStorage::Files;
  files.spillDir = dir.string();
  auto onDisk = runPipeline(ctx, files);
  std::filesystem::remove_all(dir);

  if (testutil::renderMachine(ctx, onDisk.clusters) !=
      testutil::renderMachine(ctx, inMemory.clusters)) {
    o.fail("file-backed and in-memory runs disagree");
    return o;
  }
  if (onDisk.counters.map1Records != inMemory.counters.map1Records ||
      onDisk.counters.reduce2Groups != inMemory.counters.reduce2Groups) {
    o.fail("file-backed counters drifted from the in-memory run");
  }
  return o;
}

struct Criterion {
  int id;
  const char* summary;
  double budgetSeconds;  // 0: no wall budget beyond what the body enforces
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "toy relation: four engines, byte-identical golden output", 1.0, criterion1},
      {2, "full 4-cuboid collapses to a single dense cluster", 300.0, criterion2},
      {3, "three disjoint blocks come back exactly", 300.0, criterion3},
      {4, "cube-minus-diagonal: all engines agree at scale", 0.0, criterion4},
      {5, "randomized equivalence suite against the reference", 0.0, criterion5},
      {6, "delta-engine reduction and validity filters", 0.0, criterion6},
      {7, "scaling: linear ingestion, parallel speedup where measurable", 0.0, criterion7},
      {8, "pipeline conservation and storage-backend equivalence", 0.0, criterion8},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.fail(std::string("unexpected exception: ") + e.what());
    }
    const double seconds = secondsSince(start);
    if (c.budgetSeconds > 0 && seconds >= c.budgetSeconds) {
      outcome.fail("wall time " + std::to_string(seconds) + " s exceeds the budget of " +
                   std::to_string(c.budgetSeconds) + " s");
    }
    std::string line = outcome.pass ? "[PASS]" : "[FAIL]";
    line += " criterion " + std::to_string(c.id) + ": " + c.summary;
    if (!outcome.detail.empty()) line += " — " + outcome.detail;
    char timing[32];
    std::snprintf(timing, sizeof timing, " (%.2f s)", seconds);
    line += timing;
    std::puts(line.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
