#include "oac/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oac/batch.hpp"
#include "oac/errors.hpp"
#include "oac/io.hpp"
#include "oac/mapreduce.hpp"
#include "oac/noac.hpp"
#include "oac/online.hpp"
#include "oac/report.hpp"

namespace oac {

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::string> splitCsv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(',', start);
    out.emplace_back(text, start, pos == std::string::npos ? pos : pos - start);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::size_t> parseSizeList(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const std::string& token : splitCsv(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw ConfigError(std::string("malformed ") + what + " entry '" + token + "'");
    }
    out.push_back(v);
  }
  return out;
}

DensityMode parseDensityMode(const std::string& text) {
  if (text == "exact") return DensityMode::Exact;
  if (text == "generators") return DensityMode::Generators;
  throw ConfigError("density mode must be 'exact' or 'generators'");
}

std::string freshSpillDir() {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  return (std::filesystem::temp_directory_path() /
          ("oac-spill-" + std::to_string(stamp) + "-" + std::to_string(counter++)))
      .string();
}

struct ClusterArgs {
  std::string engine = "batch";
  std::size_t arity = 3;
  double theta = 0.0;
  std::string densityMode = "exact";
  double delta = 0.0;
  double rhoMin = 0.0;
  std::string minsup;
  bool valued = false;
  bool binaryFallback = false;
  unsigned workers = 1;
  unsigned partitions = 0;  // 0: same as --workers
  std::string intermediate = "memory";
  std::string spillDir;
  std::string format = "machine";
  std::string inPath;
  std::string outPath;
};

struct EngineOutcome {
  std::vector<ClusterResult> clusters;
  std::uint64_t preDedup = 0;
  std::optional<StageTimings> timings;
  std::optional<std::uint64_t> peakRecords;
  std::optional<std::string> spillDir;
};

std::uint64_t sumGenerators(std::span<const ClusterResult> clusters) {
  std::uint64_t total = 0;
  for (const ClusterResult& r : clusters) total += r.cluster.generatorCount;
  return total;
}

EngineOutcome runEngine(const PolyContext& ctx, const ClusterArgs& args) {
  const DensityMode mode = parseDensityMode(args.densityMode);
  std::vector<std::size_t> minSup = parseSizeList(args.minsup, "minsup");
  // A single --minsup entry is shorthand for "every mode".
  if (minSup.size() == 1) minSup.assign(ctx.arity(), minSup.front());
  EngineOutcome outcome;

  if (args.engine == "batch" || args.engine == "mapreduce") {
    if (!minSup.empty()) {
      throw ConfigError("--minsup applies to the online and nvalued engines");
    }
  }

  if (args.engine == "batch") {
    outcome.clusters = batchCluster(ctx, args.theta, mode, args.workers);
    outcome.preDedup = sumGenerators(outcome.clusters);
  } else if (args.engine == "online") {
    OnlineState state(ctx.arity());
    state.addBatch(ctx.tuples());
    outcome.clusters = state.postProcess(args.theta, mode, minSup, args.workers);
    outcome.preDedup = sumGenerators(outcome.clusters);
  } else if (args.engine == "mapreduce") {
    PipelineConfig cfg;
    cfg.mapWorkers = args.workers;
    cfg.reduceWorkers = args.workers;
    cfg.partitions = args.partitions == 0 ? std::max(1u, args.workers) : args.partitions;
    cfg.theta = args.theta;
    cfg.densityMode = mode;
    if (args.intermediate == "files") {
      cfg.storage = IntermediateStorage::Files;
      cfg.spillDir = args.spillDir.empty() ? freshSpillDir() : args.spillDir;
      outcome.spillDir = cfg.spillDir;
    } else if (args.intermediate != "memory") {
      throw ConfigError("intermediate storage must be 'memory' or 'files'");
    }
    PipelineRun run = runPipeline(ctx, cfg);
    outcome.clusters = std::move(run.clusters);
    outcome.preDedup = sumGenerators(outcome.clusters);
    outcome.timings = run.timings;
    outcome.peakRecords = run.counters.peakIntermediateRecords;
  } else if (args.engine == "nvalued") {
    NoacParams params;
    params.delta = args.delta;
    params.rhoMin = args.rhoMin;
    params.minSup = minSup;
    params.binaryFallback = args.binaryFallback;
    params.workers = args.workers;
    NoacResult result = noacCluster(ctx, params);
    outcome.clusters = std::move(result.clusters);
    outcome.preDedup = result.validPreDedup;
  } else {
    throw ConfigError("unknown engine '" + args.engine + "'");
  }
  return outcome;
}

std::string renderParams(const ClusterArgs& args) {
  std::ostringstream out;
  if (args.engine == "nvalued") {
    out << "delta=" << args.delta << " rho-min=" << args.rhoMin;
    out << " minsup=" << (args.minsup.empty() ? "0" : args.minsup);
  } else {
    out << "theta=" << args.theta << " density-mode=" << args.densityMode;
  }
  out << " workers=" << args.workers;
  if (args.engine == "mapreduce") {
    out << " partitions=" << (args.partitions == 0 ? std::max(1u, args.workers) : args.partitions)
        << " intermediate=" << args.intermediate;
  }
  return out.str();
}

int cmdCluster(const ClusterArgs& args, std::ostream& out, std::ostream& err) {
  const PolyContext ctx = readTsv(args.inPath, args.arity, args.valued);
  const auto start = Clock::now();
  EngineOutcome outcome = runEngine(ctx, args);
  const double totalMs = msSince(start);

  RunReport report;
  report.engine = args.engine;
  report.arity = ctx.arity();
  report.modeSizes = ctx.modeSizes();
  report.tupleCount = ctx.tupleCount();
  report.duplicatesDropped = ctx.duplicatesDropped();
  report.contextDensity = ctx.fillDensity();
  report.params = renderParams(args);
  report.clustersPreDedup = outcome.preDedup;
  report.clusters = outcome.clusters.size();
  report.stageTimings = outcome.timings;
  report.peakIntermediateRecords = outcome.peakRecords;
  report.spillDir = outcome.spillDir;
  report.totalMs = totalMs;
  report.print(err);

  const OutputFormat format =
      args.format == "display" ? OutputFormat::Display : OutputFormat::Machine;
  if (args.outPath.empty()) {
    writeClusters(ctx, outcome.clusters, format, out);
  } else {
    std::ofstream file(args.outPath, std::ios::binary | std::ios::trunc);
    if (!file) {
      throw IoError("cannot open output file: " + args.outPath);
    }
    writeClusters(ctx, outcome.clusters, format, file);
    file.flush();
    if (!file) {
      throw IoError("write failure on " + args.outPath);
    }
  }
  return 0;
}

struct GenArgs {
  std::string kind;
  std::size_t size = 10;
  std::size_t blocks = 3;
  std::size_t arity = 0;  // 0: k3 defaults to 4, random to 3
  std::string sizes;
  double fill = 0.3;
  std::uint64_t seed = 0;
  bool valued = false;
  std::string outPath;
};

PolyContext generate(const GenArgs& args) {
  if (args.kind == "k1") return genK1(args.size);
  if (args.kind == "k2") return genK2(args.size, args.blocks);
  if (args.kind == "k3") return genK3(args.size, args.arity == 0 ? 4 : args.arity);
  if (args.kind == "random") {
    RandomSpec spec;
    spec.arity = args.arity == 0 ? 3 : args.arity;
    spec.sizes = parseSizeList(args.sizes, "sizes");
    if (spec.sizes.empty()) spec.sizes.assign(spec.arity, args.size);
    spec.fill = args.fill;
    spec.seed = args.seed;
    spec.valued = args.valued;
    return genRandom(spec);
  }
  throw ConfigError("unknown generator '" + args.kind + "'");
}

int cmdGen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  const PolyContext ctx = generate(args);
  if (args.outPath.empty()) {
    writeTsv(ctx, out);
  } else {
    writeTsvFile(ctx, args.outPath);
  }
  err << "generated: " << ctx.tupleCount() << " tuples, mode sizes";
  for (std::size_t s : ctx.modeSizes()) err << ' ' << s;
  err << '\n';
  return 0;
}

struct BenchArgs {
  std::string engines = "batch";
  GenArgs gen;
  double theta = 0.0;
  std::string densityMode = "exact";
  unsigned workers = 1;
  unsigned partitions = 0;
  unsigned repeat = 5;
};

int cmdBench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  if (args.repeat < 1) {
    throw ConfigError("--repeat must be at least 1");
  }
  const PolyContext ctx = generate(args.gen);
  err << "bench input: " << ctx.tupleCount() << " tuples\n";
  for (const std::string& engine : splitCsv(args.engines)) {
    ClusterArgs run;
    run.engine = engine;
    run.theta = args.theta;
    run.densityMode = args.densityMode;
    run.workers = args.workers;
    run.partitions = args.partitions;
    if (engine == "nvalued") {
      run.rhoMin = args.theta;
      run.binaryFallback = !ctx.hasValues();
    }
    std::vector<double> timesMs;
    std::size_t clusterCount = 0;
    timesMs.reserve(args.repeat);
    for (unsigned i = 0; i < args.repeat; ++i) {
      const auto start = Clock::now();
      EngineOutcome outcome = runEngine(ctx, run);
      timesMs.push_back(msSince(start));
      clusterCount = outcome.clusters.size();
    }
    std::sort(timesMs.begin(), timesMs.end());
    const std::size_t mid = timesMs.size() / 2;
    const double median = timesMs.size() % 2 == 1
                              ? timesMs[mid]
                              : (timesMs[mid - 1] + timesMs[mid]) / 2.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", median);
    out << engine << "\tmedian-ms=" << buf << "\truns=" << args.repeat
        << "\tclusters=" << clusterCount << '\n';
  }
  return 0;
}

std::vector<std::string> readMachineLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open machine output: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  {
    std::istringstream check(content);
    parseMachine(check);  // format validation; throws with line numbers
  }
  std::vector<std::string> lines;
  std::istringstream stream(content);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

int cmdDiff(const std::string& pathA, const std::string& pathB, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> a = readMachineLines(pathA);
  std::vector<std::string> b = readMachineLines(pathB);
  std::multiset<std::string> setA(a.begin(), a.end());
  std::multiset<std::string> setB(b.begin(), b.end());
  if (setA == setB) {
    out << "match: " << setA.size() << " clusters\n";
    return 0;
  }
  std::vector<std::string> onlyA;
  std::vector<std::string> onlyB;
  std::set_difference(setA.begin(), setA.end(), setB.begin(), setB.end(),
                      std::back_inserter(onlyA));
  std::set_difference(setB.begin(), setB.end(), setA.begin(), setA.end(),
                      std::back_inserter(onlyB));
  out << "mismatch: " << onlyA.size() << " clusters only in " << pathA << ", " << onlyB.size()
      << " only in " << pathB << '\n';
  const std::size_t kShow = 20;
  for (std::size_t i = 0; i < onlyA.size() && i < kShow; ++i) out << "-" << onlyA[i] << '\n';
  for (std::size_t i = 0; i < onlyB.size() && i < kShow; ++i) out << "+" << onlyB[i] << '\n';
  (void)err;
  return 1;
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal cluster generation over N-ary relations"};
  app.require_subcommand(1);

  ClusterArgs clusterArgs;
  CLI::App* cluster = app.add_subcommand("cluster", "Cluster a TSV relation");
  cluster->add_option("--engine", clusterArgs.engine, "Engine to run")
      ->check(CLI::IsMember({"batch", "online", "mapreduce", "nvalued"}));
  cluster->add_option("--arity", clusterArgs.arity, "Tuple arity of the input")
      ->check(CLI::Range(std::size_t{2}, std::size_t{64}));
  cluster->add_option("--theta", clusterArgs.theta, "Density threshold");
  cluster->add_option("--density-mode", clusterArgs.densityMode, "Density definition")
      ->check(CLI::IsMember({"exact", "generators"}));
  cluster->add_option("--delta", clusterArgs.delta, "Value tolerance (nvalued engine)");
  cluster->add_option("--rho-min", clusterArgs.rhoMin, "Minimum density (nvalued engine)");
  cluster->add_option("--minsup", clusterArgs.minsup,
                      "Per-mode minimum component size, one value or comma-separated");
  cluster->add_flag("--valued", clusterArgs.valued, "Input carries a numeric value column");
  cluster->add_flag("--binary-fallback", clusterArgs.binaryFallback,
                    "Let the nvalued engine treat unvalued input as constant-valued");
  cluster->add_option("--workers", clusterArgs.workers, "Worker threads")
      ->check(CLI::Range(1u, 256u));
  cluster->add_option("--partitions", clusterArgs.partitions,
                      "Shuffle partitions (default: same as --workers)");
  cluster->add_option("--intermediate", clusterArgs.intermediate, "Intermediate record storage")
      ->check(CLI::IsMember({"memory", "files"}));
  cluster->add_option("--spill-dir", clusterArgs.spillDir,
                      "Directory for stage files (default: a fresh temp directory)");
  cluster->add_option("--format", clusterArgs.format, "Cluster output format")
      ->check(CLI::IsMember({"machine", "display"}));
  cluster->add_option("--in", clusterArgs.inPath, "Input TSV path")->required();
  cluster->add_option("--out", clusterArgs.outPath, "Cluster output path (default: stdout)");

  GenArgs genArgs;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic relation");
  gen->add_option("kind", genArgs.kind, "Generator: k1, k2, k3, or random")
      ->required()
      ->check(CLI::IsMember({"k1", "k2", "k3", "random"}));
  gen->add_option("--size", genArgs.size, "Per-mode size");
  gen->add_option("--blocks", genArgs.blocks, "Block count (k2)");
  gen->add_option("--arity", genArgs.arity, "Arity (k3, random)");
  gen->add_option("--sizes", genArgs.sizes, "Comma-separated mode sizes (random)");
  gen->add_option("--fill", genArgs.fill, "Fill probability (random)");
  gen->add_option("--seed", genArgs.seed, "Random seed (random)");
  gen->add_flag("--valued", genArgs.valued, "Attach random integer values (random)");
  gen->add_option("--out", genArgs.outPath, "Output TSV path (default: stdout)");

  BenchArgs benchArgs;
  CLI::App* bench = app.add_subcommand("bench", "Time engines on a generated relation");
  bench->add_option("--engines", benchArgs.engines, "Comma-separated engine list");
  bench->add_option("--gen", benchArgs.gen.kind, "Generator: k1, k2, k3, or random")
      ->required()
      ->check(CLI::IsMember({"k1", "k2", "k3", "random"}));
  bench->add_option("--size", benchArgs.gen.size, "Per-mode size");
  bench->add_option("--blocks", benchArgs.gen.blocks, "Block count (k2)");
  bench->add_option("--arity", benchArgs.gen.arity, "Arity (k3, random)");
  bench->add_option("--sizes", benchArgs.gen.sizes, "Comma-separated mode sizes (random)");
  bench->add_option("--fill", benchArgs.gen.fill, "Fill probability (random)");
  bench->add_option("--seed", benchArgs.gen.seed, "Random seed (random)");
  bench->add_flag("--valued", benchArgs.gen.valued, "Attach random integer values (random)");
  bench->add_option("--theta", benchArgs.theta, "Density threshold");
  bench->add_option("--density-mode", benchArgs.densityMode, "Density definition")
      ->check(CLI::IsMember({"exact", "generators"}));
  bench->add_option("--workers", benchArgs.workers, "Worker threads")->check(CLI::Range(1u, 256u));
  bench->add_option("--partitions", benchArgs.partitions, "Shuffle partitions");
  bench->add_option("--repeat", benchArgs.repeat, "Runs per engine (median reported)");

  std::string diffA;
  std::string diffB;
  CLI::App* diff = app.add_subcommand("diff", "Compare two machine-format outputs as sets");
  diff->add_option("first", diffA, "First machine output")->required();
  diff->add_option("second", diffB, "Second machine output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (app.got_subcommand(cluster)) return cmdCluster(clusterArgs, out, err);
    if (app.got_subcommand(gen)) return cmdGen(genArgs, out, err);
    if (app.got_subcommand(bench)) return cmdBench(benchArgs, out, err);
    if (app.got_subcommand(diff)) return cmdDiff(diffA, diffB, out, err);
    err << "usage error: missing subcommand\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace oac
