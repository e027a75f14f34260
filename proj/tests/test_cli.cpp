#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctximp/cli.hpp"
#include "ctximp/dataset.hpp"
#include "ctximp/rng.hpp"

namespace fs = std::filesystem;
using ctximp::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ctximp_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, '\t');) cells.push_back(cell);
  return cells;
}

std::string header_line(const std::string& report) {
  for (const auto& line : lines_of(report)) {
    if (!line.starts_with("#")) return line;
  }
  return {};
}

}  // namespace

TEST(Cli, OracleProblemOne) {
  const auto r = call({"oracle", "--generate", "problem1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# flags: --generate problem1\n"), std::string::npos);
  EXPECT_NE(r.out.find("X_2\t0.1250000000\t0.5000000000\t0.3750000000\t-0.3750000000"), std::string::npos);
  EXPECT_NE(r.out.find("# theorem_zero_abs: pass"), std::string::npos);
}

TEST(Cli, OracleCheckDefinitionsOnExampleOne) {
  const auto r = call({"oracle", "--generate", "example1", "--check-definitions"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto header = split_tabs(header_line(r.out));
  std::vector<std::string> x1;
  for (const auto& line : lines_of(r.out)) {
    if (line.starts_with("X_1\t")) x1 = split_tabs(line);
  }
  ASSERT_EQ(x1.size(), header.size());
  const auto value = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return x1[i];
    }
    return std::string("missing");
  };
  EXPECT_EQ(value("def1"), "true");
  EXPECT_EQ(value("cond4"), "false");
  EXPECT_EQ(value("label[0]"), "mixed");
}

TEST(Cli, GenerateWritesCsv) {
  const auto r = call({"generate", "problem2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines_of(r.out).size(), 321u);
  EXPECT_EQ(lines_of(call({"generate", "--generate", "example1"}).out).size(), 17u);
  const auto path = scratch("p1.csv");
  ASSERT_EQ(call({"generate", "problem1", "--out", path.string()}).code, 0);
  EXPECT_EQ(lines_of(slurp(path)).size(), 17u);
  EXPECT_EQ(call({"generate", "problem7"}).code, 2);
}

TEST(Cli, ImportanceWithOneTreeIsWellFormed) {
  const auto r = call({"importance", "--generate", "problem1", "--trees", "1", "--baselines"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  const auto header = split_tabs(header_line(r.out));
  std::size_t rows = 0;
  for (const auto& line : lines) {
    if (line.starts_with("X_")) {
      EXPECT_EQ(split_tabs(line).size(), header.size());
      ++rows;
    }
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_NE(r.out.find("# n_trees: 1\n"), std::string::npos);
}

TEST(Cli, ImportanceTextFormat) {
  const auto r = call({"importance", "--generate", "problem1", "--trees", "5", "--format", "text"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("variable: X_1\n"), std::string::npos);
}

TEST(Cli, PermtestSinglePermutation) {
  const auto r = call({"permtest", "--generate", "problem1", "--trees", "20", "--permutations", "1", "--perm-trees",
                       "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto header = split_tabs(header_line(r.out));
  for (const auto& line : lines_of(r.out)) {
    if (!line.starts_with("X_")) continue;
    const auto cells = split_tabs(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i].starts_with("p_")) EXPECT_TRUE(cells[i] == "0.5000000000" || cells[i] == "1.0000000000");
    }
  }
}

TEST(Cli, ByteIdenticalAcrossRunsAndJobs) {
  const std::vector<std::string> base{"permtest", "--generate", "problem2", "--trees", "40",
                                      "--permutations", "10", "--perm-trees", "10", "--seed", "3", "--baselines"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  const auto a = scratch("det_a.tsv"), b = scratch("det_b.tsv"), c = scratch("det_c.tsv");
  ASSERT_EQ(call(with({"--out", a.string()})).code, 0);
  ASSERT_EQ(call(with({"--out", b.string()})).code, 0);
  ASSERT_EQ(call(with({"--out", c.string(), "--jobs", "4"})).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), slurp(c));
  EXPECT_NE(call(with({"--seed", "4"})).out, slurp(a));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call({"importance", "--generate", "problem1", "--bogus"}).code, 2);
  EXPECT_EQ(call({"importance", "--generate", "problem1", "--trees", "0"}).code, 2);
  EXPECT_EQ(call({"importance", "--generate", "problem1", "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(call({"importance"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"importance", "--input", "/no/such/file.csv", "--target", "y"}).code, 3);
  EXPECT_EQ(call({"importance", "--generate", "problem1", "--context", "Y"}).code, 3);
  EXPECT_EQ(call({"permtest", "--generate", "problem1", "--level", "1"}).code, 2);

  // 21 binary inputs trip the enumeration guard.
  const auto wide = scratch("wide.csv");
  {
    std::ofstream out(wide);
    for (int i = 0; i < 21; ++i) out << "x" << i << ',';
    out << "y\n";
    for (int r = 0; r < 4; ++r) {
      for (int i = 0; i < 21; ++i) out << ((r >> (i % 2)) & 1) << ',';
      out << r % 2 << '\n';
    }
  }
  const auto guard = call({"oracle", "--input", wide.string(), "--target", "y"});
  EXPECT_EQ(guard.code, 4);
  EXPECT_NE(guard.err.find("guard"), std::string::npos);
}

TEST(Cli, FailedRunWritesNothing) {
  const auto path = scratch("never.tsv");
  fs::remove(path);
  EXPECT_NE(call({"importance", "--generate", "problem1", "--context", "Y", "--out", path.string()}).code, 0);
  EXPECT_NE(call({"importance", "--generate", "nope", "--out", path.string()}).code, 0);
  EXPECT_FALSE(fs::exists(path));
}

TEST(Cli, HelpDocumentsFlags) {
  const auto r = call({"permtest", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const auto* flag : {"--input", "--generate", "--target", "--context", "--trees", "--permutations",
                           "--perm-trees", "--seed", "--impurity", "--epsilon", "--out", "--format", "--jobs",
                           "--baselines", "--reuse-forest", "--level"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_EQ(call({"--version"}).code, 0);
}

TEST(Cli, TumorStyleSchema) {
  // Same layout as a 17-variable clinical table with sex as context.
  const std::vector<std::string> names{"age",  "histologic-type", "degree-of-diffe", "bone",    "bone-marrow",
                                       "lung", "pleura",          "peritoneum",      "liver",   "brain",
                                       "skin", "neck",            "supraclavicular", "axillar", "mediastinum",
                                       "abdominal"};
  const auto path = scratch("tumor_like.csv");
  {
    ctximp::Stream rng = ctximp::RngSpec{1}.stream("tumor", 0);
    std::ofstream out(path);
    out << "sex";
    for (const auto& n : names) out << ',' << n;
    out << ",class\n";
    for (int r = 0; r < 132; ++r) {
      out << ctximp::uniform_below(rng, 2);
      for (std::size_t i = 0; i < names.size(); ++i) out << ',' << ctximp::uniform_below(rng, i < 3 ? 3 : 2);
      out << ',' << ctximp::uniform_below(rng, 22) << '\n';
    }
  }
  const auto r = call({"permtest", "--input", path.string(), "--target", "class", "--context", "sex", "--trees",
                       "20", "--permutations", "9", "--perm-trees", "5", "--baselines"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto header = split_tabs(header_line(r.out));
  for (const auto* col : {"imp", "baseline[0]", "baseline[1]", "abs[0]", "p_abs[0]", "abs[1]", "p_abs[1]",
                          "signed[0]", "p_signed[0]", "signed[1]", "p_signed[1]"}) {
    EXPECT_NE(std::find(header.begin(), header.end(), col), header.end()) << col;
  }
  std::size_t rows = 0;
  for (const auto& line : lines_of(r.out)) rows += !line.starts_with("#") && line != header_line(r.out);
  EXPECT_EQ(rows, names.size());
}

TEST(Cli, PairwiseWritesMatrices) {
  const auto csv = scratch("net.csv");
  {
    ctximp::Stream rng = ctximp::RngSpec{2}.stream("net", 0);
    std::ofstream out(csv);
    out << "ctx,g1,g2,g3\n";
    for (int r = 0; r < 40; ++r) {
      const double a = ctximp::uniform_unit(rng), b = ctximp::uniform_unit(rng);
      out << (r % 2) << ',' << a << ',' << b << ',' << (r % 2 == 0 ? a : b) << '\n';
    }
  }
  const auto dir = scratch("net_out");
  fs::remove_all(dir);
  const auto r = call({"pairwise", "--input", csv.string(), "--context", "ctx", "--out", dir.string(), "--trees", "20",
                       "--permutations", "9", "--perm-trees", "5", "--q-bins", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto* ctx : {"context_0", "context_1"}) {
    for (const auto* file : {"matrix_absscore.tsv", "matrix_signed.tsv", "matrix_pvalue.tsv", "matrix_significant.tsv",
                             "cells.tsv"}) {
      EXPECT_TRUE(fs::exists(dir / ctx / file)) << ctx << '/' << file;
    }
    EXPECT_EQ(lines_of(slurp(dir / ctx / "matrix_pvalue.tsv")).size(), 4u);
  }
  const auto summary = slurp(dir / "summary.tsv");
  EXPECT_NE(summary.find("# q_bins: 3\n"), std::string::npos);
  EXPECT_NE(summary.find("# level: 0.05\n"), std::string::npos);

  const auto base_dir = scratch("net_base");
  EXPECT_EQ(call({"pairwise", "--input", csv.string(), "--context", "ctx", "--out", base_dir.string(), "--trees",
                  "10", "--permutations", "5", "--perm-trees", "5", "--method", "baseline"})
                .code,
            0);
  EXPECT_EQ(call({"pairwise", "--input", csv.string(), "--context", "nope", "--out", base_dir.string()}).code, 3);
}
