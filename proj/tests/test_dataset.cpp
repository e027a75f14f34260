#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/errors.hpp"

namespace fs = std::filesystem;
using namespace ctximp;

namespace {

fs::path scratch_file(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "ctximp_test_dataset";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << text;
  return path;
}

std::uint32_t code(const Dataset& ds, std::string_view column, std::size_t row) {
  return ds.column(ds.index_of(column)).codes[row];
}

}  // namespace

TEST(Column, CategoricalCodesFollowFirstAppearance) {
  const std::vector<std::string> cells{"b", "a", "b", "c"};
  const Column col = make_categorical("x", cells);
  EXPECT_EQ(col.labels, (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(col.codes, (std::vector<std::uint32_t>{0, 1, 0, 2}));
  EXPECT_EQ(col.cell_text(3), "c");
}

TEST(Column, DeclaredLabelsFixOrderAndRejectUnknown) {
  const std::vector<std::string> cells{"b", "a"};
  const Column col = make_categorical("x", cells, std::vector<std::string>{"a", "b", "z"});
  EXPECT_EQ(col.codes, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(col.arity(), 3u);
  const std::vector<std::string> bad{"q"};
  EXPECT_THROW(make_categorical("x", bad, std::vector<std::string>{"a"}), DataError);
}

TEST(Table, RejectsInconsistentColumns) {
  EXPECT_THROW(Table(std::vector<Column>{}), DataError);
  EXPECT_THROW(Table({make_categorical("a", {0, 1}, {"0", "1"}), make_categorical("a", {0, 1}, {"0", "1"})}),
               DataError);
  EXPECT_THROW(Table({make_categorical("a", {0, 1}, {"0", "1"}), make_categorical("b", {0}, {"0"})}), DataError);
  EXPECT_THROW(Table({make_categorical("a", {0, 2}, {"0", "1"})}), DataError);
}

TEST(Dataset, DesignationChecks) {
  Table table({make_categorical("a", {0, 1}, {"0", "1"}), make_numeric("y", {0.5, 1.5}),
               make_numeric("z", {1.0, 2.0})});
  EXPECT_THROW(Dataset(table, "y", std::string_view("y")), DataError);
  EXPECT_THROW(Dataset(table, "a", std::nullopt), DataError);  // numeric non-target column
  EXPECT_THROW(Dataset(table, "y", std::string_view("z")), DataError);
  EXPECT_THROW(Dataset(table, "missing", std::nullopt), DataError);
  Table ok({make_categorical("c", {0, 1}, {"0", "1"}), make_categorical("a", {1, 1}, {"0", "1"}),
            make_numeric("y", {0.5, 1.5})});
  const Dataset ds(ok, "y", std::string_view("c"));
  EXPECT_EQ(ds.target_kind(), ColumnKind::numeric);
  EXPECT_EQ(ds.input_columns(), (std::vector<std::size_t>{1}));
  EXPECT_EQ(ds.context_arity(), 2u);
}

TEST(LoadCsv, ReadsCategoricalAndNumericTarget) {
  const auto path = scratch_file("basic.csv", "sex,age,class\nm,young,1.5\nf,old,2\nm,old,3\n");
  std::vector<ColumnSchema> schema{{"sex", ColumnKind::categorical, std::nullopt},
                                   {"age", ColumnKind::categorical, std::nullopt},
                                   {"class", ColumnKind::numeric, std::nullopt}};
  const Dataset ds = load_csv(path, schema, "class", std::string_view("sex"));
  EXPECT_EQ(ds.n_samples(), 3u);
  EXPECT_EQ(ds.context_arity(), 2u);
  EXPECT_DOUBLE_EQ(ds.target_column().values[0], 1.5);
  EXPECT_EQ(ds.column(1).labels, (std::vector<std::string>{"young", "old"}));
}

TEST(LoadCsv, SingleRowGivesArityOne) {
  const auto path = scratch_file("one.csv", "x,y\na,b\n");
  const Dataset ds = load_csv(path, {}, "y", std::nullopt);
  EXPECT_EQ(ds.n_samples(), 1u);
  EXPECT_EQ(ds.column(0).arity(), 1u);
  EXPECT_EQ(ds.column(1).arity(), 1u);
}

TEST(LoadCsv, ErrorCases) {
  EXPECT_THROW(load_csv("/nonexistent/file.csv", {}, "y", std::nullopt), DataError);
  EXPECT_THROW(load_csv(scratch_file("ragged.csv", "x,y\n1,2\n3\n"), {}, "y", std::nullopt), DataError);
  EXPECT_THROW(load_csv(scratch_file("missing.csv", "x,y\n1,\n"), {}, "y", std::nullopt), DataError);
  EXPECT_THROW(load_csv(scratch_file("empty.csv", "x,y\n"), {}, "y", std::nullopt), DataError);

  const auto good = scratch_file("good.csv", "c,x,y\n0,1,2.5\n1,0,abc\n");
  std::vector<ColumnSchema> numeric_y{{"c", ColumnKind::categorical, std::nullopt},
                                      {"x", ColumnKind::categorical, std::nullopt},
                                      {"y", ColumnKind::numeric, std::nullopt}};
  EXPECT_THROW(load_csv(good, numeric_y, "y", std::string_view("c")), DataError);  // unparsable number

  std::vector<ColumnSchema> wrong_header{{"c", ColumnKind::categorical, std::nullopt},
                                         {"q", ColumnKind::categorical, std::nullopt},
                                         {"y", ColumnKind::categorical, std::nullopt}};
  EXPECT_THROW(load_csv(good, wrong_header, "y", std::nullopt), DataError);

  std::vector<ColumnSchema> numeric_context{{"c", ColumnKind::numeric, std::nullopt},
                                            {"x", ColumnKind::categorical, std::nullopt},
                                            {"y", ColumnKind::categorical, std::nullopt}};
  EXPECT_THROW(load_csv(good, numeric_context, "y", std::string_view("c")), DataError);

  std::vector<ColumnSchema> declared{{"c", ColumnKind::categorical, std::vector<std::string>{"0"}},
                                     {"x", ColumnKind::categorical, std::nullopt},
                                     {"y", ColumnKind::categorical, std::nullopt}};
  EXPECT_THROW(load_csv(good, declared, "y", std::nullopt), DataError);  // unknown label "1"
}

TEST(SaveCsv, RoundTripReproducesGenerators) {
  for (const auto* name : {"example1", "problem1", "problem2"}) {
    const Dataset original = generate(name);
    const auto path = fs::temp_directory_path() / "ctximp_test_dataset" / (std::string(name) + ".csv");
    fs::create_directories(path.parent_path());
    save_csv(original, path);
    const auto schema = schema_of(original.table());
    const Dataset reloaded = load_csv(path, schema, original.target_column().name,
                                      std::string_view(original.context_column().name));
    EXPECT_EQ(reloaded, original) << name;
  }
}

TEST(Generators, Example1) {
  const Dataset ds = generate_example1();
  ASSERT_EQ(ds.n_samples(), 16u);
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    const auto x1 = code(ds, "X_1", r), x2 = code(ds, "X_2", r), xc = code(ds, "X_c", r), y = code(ds, "Y", r);
    if (x2 == xc) {
      EXPECT_EQ(y, x1);
    } else {
      EXPECT_TRUE(y == 2 || y == 3);
    }
  }
}

TEST(Generators, Problem1MatchesRule) {
  const Dataset ds = generate_problem1();
  ASSERT_EQ(ds.n_samples(), 16u);
  std::set<std::vector<std::uint32_t>> rows;
  std::size_t y_two = 0;
  std::size_t context_zero = 0;
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    std::vector<std::uint32_t> row;
    for (const auto& col : ds.columns()) row.push_back(col.codes[r]);
    rows.insert(row);
    const auto xc = code(ds, "X_c", r), x1 = code(ds, "X_1", r), y = code(ds, "Y", r);
    const auto expected = x1 == 0 ? 2u : (xc == 0 ? code(ds, "X_2", r) : code(ds, "X_3", r));
    EXPECT_EQ(y, expected);
    y_two += (x1 == 0);
    context_zero += (xc == 0);
  }
  EXPECT_EQ(rows.size(), 16u);
  EXPECT_EQ(y_two, 8u);
  EXPECT_EQ(context_zero, 8u);
}

TEST(Generators, Problem2Layout) {
  const Dataset ds = generate_problem2();
  ASSERT_EQ(ds.n_samples(), 320u);
  EXPECT_EQ(ds.rows_in_context(0).size(), 160u);
  EXPECT_EQ(ds.rows_in_context(1).size(), 160u);
  std::set<std::vector<std::uint32_t>> context_one;
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    const auto digit = code(ds, "Y", r);
    const auto segments = seven_segment(digit);
    const std::size_t fixed = code(ds, "X_c", r) == 0 ? 7 : 4;
    for (std::size_t s = 0; s < fixed; ++s) {
      EXPECT_EQ(code(ds, "X_" + std::to_string(s + 1), r), segments[s]);
    }
    if (code(ds, "X_c", r) == 1) {
      std::vector<std::uint32_t> row;
      for (const auto& col : ds.columns()) row.push_back(col.codes[r]);
      context_one.insert(row);
    }
  }
  EXPECT_EQ(context_one.size(), 160u);
}

TEST(Generators, SevenSegmentDigits) {
  // Segment counts of the standard display: 6 2 5 5 4 5 6 3 7 6.
  const std::vector<int> lit{6, 2, 5, 5, 4, 5, 6, 3, 7, 6};
  for (unsigned d = 0; d < 10; ++d) {
    int count = 0;
    for (auto s : seven_segment(d)) count += s;
    EXPECT_EQ(count, lit[d]) << d;
  }
  EXPECT_THROW(seven_segment(10), ConfigError);
}

TEST(Generators, UnknownName) { EXPECT_THROW(generate("problem9"), ConfigError); }

TEST(Dataset, SelectRowsKeepsLabels) {
  const Dataset ds = generate_problem1();
  const auto rows = ds.rows_in_context(1);
  const Dataset slice = ds.select_rows(rows);
  EXPECT_EQ(slice.n_samples(), 8u);
  EXPECT_EQ(slice.context_arity(), 2u);
  for (std::size_t r = 0; r < slice.n_samples(); ++r) EXPECT_EQ(slice.context_column().codes[r], 1u);
}
