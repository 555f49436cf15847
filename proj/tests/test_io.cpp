#include "doctest.h"

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oac/batch.hpp"
#include "oac/errors.hpp"
#include "oac/io.hpp"
#include "testutil.hpp"

using namespace oac;

TEST_CASE("tab-separated input builds the expected context") {
  std::istringstream in(testutil::toyTsv());
  PolyContext ctx = readTsvStream(in, 3, false, "toy");
  CHECK(ctx.modeSizes() == std::vector<std::size_t>{3, 2, 2});
  CHECK(ctx.tupleCount() == 8);
  CHECK(ctx.fillDensity() == doctest::Approx(8.0 / 12.0));
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
  std::istringstream in("a\tb\tc\r\n\n\nx\ty\tz\r\n");
  PolyContext ctx = readTsvStream(in, 3, false);
  CHECK(ctx.tupleCount() == 2);
  CHECK(ctx.entityName(0, 1) == "x");
}

TEST_CASE("field-count violations name the offending line") {
  std::istringstream in("a\tb\tc\na\tb\n");
  try {
    readTsvStream(in, 3, false, "input.tsv");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("input.tsv:2") != std::string::npos);
  }
}

TEST_CASE("empty entity fields are rejected") {
  std::istringstream in("a\t\tc\n");
  CHECK_THROWS_AS(readTsvStream(in, 3, false), FormatError);
}

TEST_CASE("a trailing numeric column carries the valuation") {
  std::istringstream in("g1\tm1\tb1\t2.5\ng2\tm1\tb1\t-0.5\n");
  PolyContext ctx = readTsvStream(in, 3, true);
  REQUIRE(ctx.tupleCount() == 2);
  CHECK(ctx.hasValues());
  CHECK(ctx.value(ctx.tuples()[0]) == 2.5);
  CHECK(ctx.value(ctx.tuples()[1]) == -0.5);

  std::istringstream bad("g1\tm1\tb1\ttwo\n");
  CHECK_THROWS_AS(readTsvStream(bad, 3, true), FormatError);
  std::istringstream halfNumeric("g1\tm1\tb1\t2.5x\n");
  CHECK_THROWS_AS(readTsvStream(halfNumeric, 3, true), FormatError);
}

TEST_CASE("missing input files raise an I/O error") {
  CHECK_THROWS_AS(readTsv("/nonexistent/path/data.tsv", 3), IoError);
}

TEST_CASE("written contexts read back verbatim") {
  PolyContext ctx = testutil::smallRandom(3, {5, 4, 3}, 0.5, 31, /*valued=*/true);
  std::ostringstream out;
  writeTsv(ctx, out);
  std::istringstream in(out.str());
  PolyContext back = readTsvStream(in, 3, true);

  CHECK(back.modeSizes() == ctx.modeSizes());
  CHECK(back.tupleCount() == ctx.tupleCount());
  for (const Tuple& t : ctx.tuples()) {
    REQUIRE(back.contains(t));
    CHECK(back.value(t) == ctx.value(t));
  }
  CHECK(testutil::renderMachine(back, batchCluster(back, 0.0)) ==
        testutil::renderMachine(ctx, batchCluster(ctx, 0.0)));
}

TEST_CASE("the cube-minus-diagonal generator hits its closed-form size") {
  CHECK(genK1(1).tupleCount() == 0);
  CHECK(genK1(2).tupleCount() == 6);
  CHECK(genK1(5).tupleCount() == 120);
  CHECK(genK1(10).tupleCount() == 990);

  PolyContext ctx = genK1(4);
  CHECK(ctx.modeSizes() == std::vector<std::size_t>{4, 4, 4});
  // The diagonal is absent, everything else is present.
  CHECK(!ctx.contains(Tuple{2, 2, 2}));
  CHECK(ctx.contains(Tuple{2, 2, 1}));
  // 1 all-distinct cluster plus 3n one-pair-equal clusters.
  CHECK(batchCluster(ctx, 0.0).size() == 1 + 3 * 4);
}

TEST_CASE("the block generator builds disjoint full cuboids") {
  CHECK(genK2(1).tupleCount() == 3);
  CHECK(genK2(2, 5).tupleCount() == 40);
  CHECK(genK2(10).tupleCount() == 3000);

  auto singletons = batchCluster(genK2(1), 0.0);
  CHECK(singletons.size() == 3);
  for (const auto& r : singletons) {
    CHECK(r.density == 1.0);
    for (const auto& comp : r.cluster.components) CHECK(comp.size() == 1);
  }
}

TEST_CASE("the full-cuboid generator is dense by construction") {
  CHECK(genK3(1).tupleCount() == 1);
  CHECK(genK3(2, 3).tupleCount() == 8);
  CHECK(genK3(8).tupleCount() == 4096);
  CHECK(genK3(3, 5).tupleCount() == 243);

  PolyContext tiny = genK3(1);
  auto clusters = batchCluster(tiny, 0.0);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].density == 1.0);
}

TEST_CASE("generator entity names are stable mode-letter labels") {
  PolyContext ctx = genK2(2);
  CHECK(ctx.entityName(0, 0) == "a1");
  CHECK(ctx.entityName(1, 3) == "b4");
  CHECK(ctx.entityName(2, 5) == "c6");
}

TEST_CASE("generator sizes are validated") {
  CHECK_THROWS_AS(genK1(0), ConfigError);
  CHECK_THROWS_AS(genK2(0), ConfigError);
  CHECK_THROWS_AS(genK3(0), ConfigError);
  CHECK_THROWS_AS(genK3(2, 1), ConfigError);
}

TEST_CASE("random contexts are reproducible from their seed") {
  RandomSpec spec;
  spec.sizes = {6, 6, 6};
  spec.fill = 0.4;
  spec.seed = 1234;
  PolyContext a = genRandom(spec);
  PolyContext b = genRandom(spec);
  CHECK(a.tupleCount() == b.tupleCount());
  CHECK(a.tuples() == b.tuples());

  spec.seed = 1235;
  PolyContext c = genRandom(spec);
  CHECK(a.tuples() != c.tuples());

  spec.valued = true;
  PolyContext valued = genRandom(spec);
  CHECK(valued.hasValues());
  for (const Tuple& t : valued.tuples()) {
    CHECK(valued.value(t) >= 0.0);
    CHECK(valued.value(t) <= 5.0);
  }
}

TEST_CASE("random fill ratio lands near its expectation") {
  RandomSpec spec;
  spec.sizes = {10, 10, 10};
  spec.fill = 0.3;
  spec.seed = 99;
  PolyContext ctx = genRandom(spec);
  CHECK(ctx.fillDensity() == doctest::Approx(0.3).epsilon(0.25));
  CHECK_THROWS_AS(genRandom(RandomSpec{3, {4, 4}, 0.5, 0, false, 6}), ConfigError);
}

TEST_CASE("the machine format is the exact golden rendering of the toy run") {
  PolyContext ctx = testutil::toyContext();
  const std::string golden =
      "u1,u2\ti1\tl1,l2\t1\t1.000000\n"
      "u1,u2\ti1,i2\tl1,l2\t1\t0.750000\n"
      "u1,u2,u3\ti1\tl1,l2\t1\t0.833333\n"
      "u1,u2,u3\ti1\tl2\t1\t1.000000\n"
      "u1,u2,u3\ti1,i2\tl1,l2\t1\t0.666667\n"
      "u2\ti1,i2\tl1,l2\t1\t1.000000\n"
      "u2,u3\ti1,i2\tl1,l2\t1\t0.750000\n"
      "u2,u3\ti2\tl1\t1\t1.000000\n";
  CHECK(testutil::renderMachine(ctx, batchCluster(ctx, 0.0)) == golden);
}

TEST_CASE("the display format wraps each cluster in braced modality lines") {
  PolyContext ctx = testutil::toyContext();
  auto dense = batchCluster(ctx, 1.0);
  std::ostringstream out;
  writeClusters(ctx, dense, OutputFormat::Display, out);
  const std::string text = out.str();
  CHECK(text.find("{\n{u2}\n{i1, i2}\n{l1, l2}\n}\n") != std::string::npos);
  CHECK(text.find("{\n{u1, u2}\n{i1}\n{l1, l2}\n}\n") != std::string::npos);
}

TEST_CASE("machine output parses back to the written clusters") {
  PolyContext ctx = testutil::smallRandom(3, {5, 5, 5}, 0.4, 47);
  auto results = batchCluster(ctx, 0.0);
  std::istringstream in(testutil::renderMachine(ctx, results));
  auto parsed = parseMachine(in);
  REQUIRE(parsed.size() == results.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].generatorCount == results[i].cluster.generatorCount);
    CHECK(parsed[i].density == doctest::Approx(results[i].density).epsilon(1e-6));
    REQUIRE(parsed[i].modalities.size() == 3);
    for (Mode k = 0; k < 3; ++k) {
      REQUIRE(parsed[i].modalities[k].size() == results[i].cluster.components[k].size());
      for (std::size_t j = 0; j < parsed[i].modalities[k].size(); ++j) {
        CHECK(parsed[i].modalities[k][j] ==
              ctx.entityName(k, results[i].cluster.components[k].members[j]));
      }
    }
  }
}

TEST_CASE("malformed machine lines are rejected with their line number") {
  std::istringstream tooFew("u1\ti1\n");
  CHECK_THROWS_AS(parseMachine(tooFew), FormatError);
  std::istringstream badCount("u1\ti1\tl1\tmany\t1.000000\n");
  CHECK_THROWS_AS(parseMachine(badCount), FormatError);
  std::istringstream badDensity("u1\ti1\tl1\t1\tdense\n");
  CHECK_THROWS_AS(parseMachine(badDensity), FormatError);

  std::istringstream second("u1\ti1\tl1\t1\t1.000000\nu1\ti1\n");
  try {
    parseMachine(second);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("machine output refuses entity names that break the grammar") {
  std::vector<std::vector<std::string>> rows{{"a,b", "x", "y"}};
  PolyContext ctx = buildContext(rows, 3);
  auto results = batchCluster(ctx, 0.0);
  std::ostringstream out;
  CHECK_THROWS_AS(writeClusters(ctx, results, OutputFormat::Machine, out), FormatError);
}

TEST_CASE("density rendering is fixed at six decimals") {
  CHECK(formatDensity(1.0) == "1.000000");
  CHECK(formatDensity(0.5) == "0.500000");
  CHECK(formatDensity(2.0 / 3.0) == "0.666667");
  CHECK(formatDensity(5.0 / 6.0) == "0.833333");
  CHECK(formatDensity(0.0) == "0.000000");
}

TEST_CASE("a catalog-shaped file ingests with the expected shape") {
  // 3,818 distinct (movie, actor, genre)-shaped rows spread over 250, 795,
  // and 22 names; the residue construction keeps every row distinct.
  std::ostringstream data;
  for (int i = 0; i < 3818; ++i) {
    data << "m" << (i % 250) << '\t' << "p" << (i % 795) << '\t' << "g" << (i % 22) << '\n';
  }
  std::istringstream in(data.str());
  PolyContext ctx = readTsvStream(in, 3, false, "catalog");
  CHECK(ctx.tupleCount() == 3818);
  CHECK(ctx.duplicatesDropped() == 0);
  CHECK(ctx.modeSizes() == std::vector<std::size_t>{250, 795, 22});
  CHECK(ctx.fillDensity() == doctest::Approx(0.00087).epsilon(0.01));
}
