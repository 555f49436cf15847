#include "oac/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "oac/errors.hpp"

namespace oac {

namespace {

std::vector<std::string> splitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    fields.emplace_back(line, start, pos == std::string::npos ? pos : pos - start);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

double parseValueField(const std::string& field, const std::string& sourceName,
                       std::size_t lineNo) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + field.size() || field.empty() || errno == ERANGE) {
    throw FormatError(sourceName + ":" + std::to_string(lineNo) + ": malformed value field '" +
                      field + "'");
  }
  return v;
}

// Mode-letter entity naming ('a1', 'b3', …) keeps generated files and golden
// outputs stable and human-readable.
std::string entityLabel(Mode k, std::size_t index1Based) {
  return std::string(1, static_cast<char>('a' + k)) + std::to_string(index1Based);
}

void internAll(ContextBuilder& builder, std::size_t arity, std::size_t perMode) {
  for (Mode k = 0; k < arity; ++k) {
    for (std::size_t i = 1; i <= perMode; ++i) builder.intern(k, entityLabel(k, i));
  }
}

std::string formatValue(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw IoError("cannot format numeric value");
  }
  return std::string(buf, ptr);
}

}  // namespace

PolyContext readTsvStream(std::istream& in, std::size_t arity, bool valued,
                          const std::string& sourceName) {
  const std::size_t expectedFields = arity + (valued ? 1 : 0);
  ContextBuilder builder(arity, valued);
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = splitTabs(line);
    if (fields.size() != expectedFields) {
      throw FormatError(sourceName + ":" + std::to_string(lineNo) + ": expected " +
                        std::to_string(expectedFields) + " tab-separated fields, got " +
                        std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (fields[i].empty()) {
        throw FormatError(sourceName + ":" + std::to_string(lineNo) + ": empty entity field " +
                          std::to_string(i + 1));
      }
    }
    if (valued) {
      const double v = parseValueField(fields.back(), sourceName, lineNo);
      builder.addRow(std::span<const std::string>(fields.data(), arity), v, lineNo);
    } else {
      builder.addRow(std::span<const std::string>(fields.data(), arity), lineNo);
    }
  }
  if (in.bad()) {
    throw IoError("read failure on " + sourceName);
  }
  return builder.finish();
}

PolyContext readTsv(const std::string& path, std::size_t arity, bool valued) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open input file: " + path);
  }
  return readTsvStream(in, arity, valued, path);
}

void writeTsv(const PolyContext& ctx, std::ostream& out) {
  const auto& tuples = ctx.tuples();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const Tuple& t = tuples[i];
    for (Mode k = 0; k < ctx.arity(); ++k) {
      if (k) out << '\t';
      out << ctx.entityName(k, t.ids[k]);
    }
    if (ctx.hasValues()) {
      out << '\t' << formatValue(ctx.valueAt(static_cast<std::uint32_t>(i)));
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("write failure while emitting tuples");
  }
}

void writeTsvFile(const PolyContext& ctx, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open output file: " + path);
  }
  writeTsv(ctx, out);
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

PolyContext genK1(std::size_t n) {
  if (n < 1) {
    throw ConfigError("generator size must be at least 1");
  }
  ContextBuilder builder(3);
  internAll(builder, 3, n);
  for (Id g = 0; g < n; ++g) {
    for (Id m = 0; m < n; ++m) {
      for (Id b = 0; b < n; ++b) {
        if (g == m && m == b) continue;
        builder.addTuple(Tuple{g, m, b});
      }
    }
  }
  return builder.finish();
}

PolyContext genK2(std::size_t s, std::size_t blocks) {
  if (s < 1 || blocks < 1) {
    throw ConfigError("generator size and block count must be at least 1");
  }
  ContextBuilder builder(3);
  internAll(builder, 3, s * blocks);
  for (std::size_t j = 0; j < blocks; ++j) {
    const Id base = static_cast<Id>(j * s);
    for (Id g = 0; g < s; ++g) {
      for (Id m = 0; m < s; ++m) {
        for (Id b = 0; b < s; ++b) {
          builder.addTuple(Tuple{base + g, base + m, base + b});
        }
      }
    }
  }
  return builder.finish();
}

PolyContext genK3(std::size_t s, std::size_t arity) {
  if (s < 1) {
    throw ConfigError("generator size must be at least 1");
  }
  if (arity < 2) {
    throw ConfigError("generator arity must be at least 2");
  }
  ContextBuilder builder(arity);
  internAll(builder, arity, s);
  Tuple t;
  t.ids.assign(arity, 0);
  while (true) {
    builder.addTuple(t);
    // Odometer over the cuboid, last mode fastest.
    std::size_t k = arity;
    while (k > 0) {
      --k;
      if (++t.ids[k] < s) break;
      t.ids[k] = 0;
      if (k == 0) return builder.finish();
    }
  }
}

PolyContext genRandom(const RandomSpec& spec) {
  if (spec.arity < 2) {
    throw ConfigError("random context arity must be at least 2");
  }
  if (spec.sizes.size() != spec.arity) {
    throw ConfigError("random context needs one mode size per mode");
  }
  for (std::size_t size : spec.sizes) {
    if (size < 1) throw ConfigError("random context mode sizes must be at least 1");
  }
  if (spec.fill < 0.0 || spec.fill > 1.0) {
    throw ConfigError("fill ratio must lie in [0,1]");
  }
  if (spec.valued && spec.valueLevels < 1) {
    throw ConfigError("value level count must be at least 1");
  }

  ContextBuilder builder(spec.arity, spec.valued);
  for (Mode k = 0; k < spec.arity; ++k) {
    for (std::size_t i = 1; i <= spec.sizes[k]; ++i) builder.intern(k, entityLabel(k, i));
  }
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution keep(spec.fill);
  std::uniform_int_distribution<int> value(0, spec.valueLevels - 1);

  Tuple t;
  t.ids.assign(spec.arity, 0);
  while (true) {
    if (keep(rng)) {
      if (spec.valued) {
        builder.addTuple(t, static_cast<double>(value(rng)));
      } else {
        builder.addTuple(t);
      }
    } else if (spec.valued) {
      value(rng);  // keep the stream position independent of the draw
    }
    std::size_t k = spec.arity;
    while (k > 0) {
      --k;
      if (++t.ids[k] < spec.sizes[k]) break;
      t.ids[k] = 0;
      if (k == 0) return builder.finish();
    }
  }
}

std::string formatDensity(double density) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", density);
  return std::string(buf);
}

void writeClusters(const PolyContext& ctx, std::span<const ClusterResult> clusters,
                   OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Machine) {
    for (Mode k = 0; k < ctx.arity(); ++k) {
      for (std::size_t id = 0; id < ctx.modeSize(k); ++id) {
        const std::string& name = ctx.entityName(k, static_cast<Id>(id));
        if (name.find_first_of("\t\n\r,") != std::string::npos) {
          throw FormatError("entity name '" + name +
                            "' contains a machine-format delimiter; use the display format");
        }
      }
    }
  }
  for (const ClusterResult& result : clusters) {
    const MultimodalCluster& cluster = result.cluster;
    if (format == OutputFormat::Display) {
      out << "{\n";
      for (const Cumulus& c : cluster.components) {
        out << '{';
        for (std::size_t i = 0; i < c.members.size(); ++i) {
          if (i) out << ", ";
          out << ctx.entityName(c.mode, c.members[i]);
        }
        out << "}\n";
      }
      out << "}\n";
    } else {
      for (const Cumulus& c : cluster.components) {
        for (std::size_t i = 0; i < c.members.size(); ++i) {
          if (i) out << ',';
          out << ctx.entityName(c.mode, c.members[i]);
        }
        out << '\t';
      }
      out << cluster.generatorCount << '\t' << formatDensity(result.density) << '\n';
    }
  }
  if (!out) {
    throw IoError("write failure while emitting clusters");
  }
}

std::vector<MachineCluster> parseMachine(std::istream& in) {
  std::vector<MachineCluster> clusters;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = splitTabs(line);
    if (fields.size() < 4) {
      throw FormatError("line " + std::to_string(lineNo) +
                        ": machine record needs at least two modalities, a generator count, "
                        "and a density");
    }
    MachineCluster cluster;
    for (std::size_t i = 0; i + 2 < fields.size(); ++i) {
      std::vector<std::string> names;
      const std::string& field = fields[i];
      std::size_t start = 0;
      while (true) {
        const std::size_t pos = field.find(',', start);
        names.emplace_back(field, start, pos == std::string::npos ? pos : pos - start);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      for (const std::string& name : names) {
        if (name.empty()) {
          throw FormatError("line " + std::to_string(lineNo) + ": empty entity name");
        }
      }
      cluster.modalities.push_back(std::move(names));
    }
    const std::string& countField = fields[fields.size() - 2];
    const auto [ptr, ec] = std::from_chars(
        countField.data(), countField.data() + countField.size(), cluster.generatorCount);
    if (ec != std::errc{} || ptr != countField.data() + countField.size()) {
      throw FormatError("line " + std::to_string(lineNo) + ": malformed generator count '" +
                        countField + "'");
    }
    cluster.density = parseValueField(fields.back(), "machine input", lineNo);
    clusters.push_back(std::move(cluster));
  }
  if (in.bad()) {
    throw IoError("read failure while parsing machine output");
  }
  return clusters;
}

}  // namespace oac
