#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/errors.hpp"
#include "ctximp/importance.hpp"
#include "ctximp/pairwise.hpp"

using namespace ctximp;

namespace {

/// Six numeric variables and a binary context. In context 0, V0 follows
/// V4 + V5; in context 1 it is noise. Everything else is independent.
Table coupled_network(std::uint64_t seed, std::size_t n = 200) {
  Stream rng = RngSpec{seed}.stream("network", 0);
  std::vector<std::uint32_t> ctx(n);
  std::vector<std::vector<double>> v(6, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    ctx[i] = static_cast<std::uint32_t>(i % 2);
    for (std::size_t k = 1; k < 6; ++k) v[k][i] = uniform_unit(rng);
    const double noise = 0.1 * uniform_unit(rng);
    v[0][i] = (ctx[i] == 0 ? v[4][i] + v[5][i] : uniform_unit(rng)) + noise;
  }
  std::vector<Column> cols{make_categorical("ctx", ctx, {"a", "b"})};
  for (std::size_t k = 0; k < 6; ++k) cols.push_back(make_numeric("V" + std::to_string(k), v[k]));
  return Table(std::move(cols));
}

PairwiseOptions small_options() {
  PairwiseOptions o;
  o.n_trees = 100;
  o.n_permutations = 99;
  o.null_trees = 50;
  return o;
}

}  // namespace

TEST(QuantileBins, RanksAndTies) {
  const std::vector<double> values{5.0, 1.0, 3.0, 2.0, 4.0};
  EXPECT_EQ(quantile_bins(values, 5), (std::vector<std::uint32_t>{4, 0, 2, 1, 3}));
  const std::vector<double> ties{1.0, 1.0, 1.0, 2.0, 2.0, 3.0};
  // ranks 0..5 map to bins 0,0,1,1,2,2; equal values share their first bin.
  EXPECT_EQ(quantile_bins(ties, 3), (std::vector<std::uint32_t>{0, 0, 0, 1, 1, 2}));
  const std::vector<double> constant(7, 0.5);
  EXPECT_EQ(quantile_bins(constant, 4), std::vector<std::uint32_t>(7, 0));
  EXPECT_THROW(quantile_bins(values, 1), ConfigError);
}

TEST(QuantileBins, BalancedWithoutTies) {
  std::vector<double> values(100);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::sin(static_cast<double>(i) * 1.7);
  const auto bins = quantile_bins(values, 5);
  for (std::uint32_t b = 0; b < 5; ++b) EXPECT_EQ(std::count(bins.begin(), bins.end(), b), 20);
}

TEST(Pairwise, TargetDatasetDiscretizesInputsOnly) {
  const Table t = coupled_network(1, 50);
  const Dataset ds = target_dataset(t, 0, 1, 4);
  EXPECT_EQ(ds.target_kind(), ColumnKind::numeric);
  EXPECT_EQ(ds.column(2).arity(), 4u);
  EXPECT_EQ(ds.column(2).labels.front(), "q0");
  EXPECT_EQ(ds.input_columns().size(), 5u);
}

TEST(Pairwise, FindsContextSpecificCoupling) {
  const auto matrices = pairwise_analysis(coupled_network(3), 0, small_options(), RngSpec{0});
  ASSERT_EQ(matrices.size(), 2u);
  const auto& m0 = matrices[0];
  EXPECT_EQ(m0.context_label, "a");
  EXPECT_TRUE(m0.at(0, 4)->significant);  // V4 as input for V0
  EXPECT_TRUE(m0.at(0, 5)->significant);  // V5
  EXPECT_FALSE(m0.at(0, 0).has_value());
  for (const auto& matrix : matrices) {
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        const auto& cell = matrix.at(i, j);
        ASSERT_EQ(cell.has_value(), i != j);
        if (!cell) continue;
        EXPECT_EQ(cell->significant, cell->p_value < 0.05);
        EXPECT_TRUE(std::isfinite(cell->abs));
        EXPECT_LE(std::abs(cell->signed_score), cell->abs + 1e-12);
      }
    }
  }
}

TEST(Pairwise, EntropyOnCategoricalTableMatchesDirectImportance) {
  const Dataset p2 = generate_problem2();
  const Table& table = p2.table();
  const std::size_t context = *p2.context();
  PairwiseOptions o;
  o.n_trees = 30;
  o.n_permutations = 5;
  const RngSpec rng{11};
  const auto matrices = pairwise_analysis(table, context, o, rng);
  std::size_t row = 0;
  for (std::size_t target = 0; target < table.n_columns(); ++target) {
    if (target == context) continue;
    const Dataset ds(table, target, context);
    const Forest forest = build_forest(ds, ds.input_columns(), 30, rng.derive("target", target), ImpurityKind::entropy);
    const ForestScores scores = forest_scores(forest, ds);
    const auto inputs = ds.input_columns();
    for (std::size_t v = 0; v < inputs.size(); ++v) {
      const std::size_t col = inputs[v] > context ? inputs[v] - 1 : inputs[v];
      for (std::uint32_t c = 0; c < 2; ++c) {
        EXPECT_NEAR(matrices[c].at(row, col)->abs, scores.abs[c][v], 1e-12);
        EXPECT_NEAR(matrices[c].at(row, col)->signed_score, scores.signed_scores[c][v], 1e-12);
      }
    }
    ++row;
  }
}

TEST(Pairwise, DeterministicAndSelectsContext) {
  const Table t = coupled_network(5, 80);
  auto o = small_options();
  o.n_permutations = 19;
  const auto a = pairwise_analysis(t, 0, o, RngSpec{9});
  o.jobs = 3;
  const auto b = pairwise_analysis(t, 0, o, RngSpec{9});
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(format_cells_long(a[c]), format_cells_long(b[c]));
  }
  const auto one = pairwise_analysis(t, 0, 1, o, RngSpec{9});
  EXPECT_EQ(format_cells_long(one), format_cells_long(a[1]));
  EXPECT_THROW(pairwise_analysis(t, 0, 2, o, RngSpec{9}), DataError);
}

TEST(Pairwise, BaselineFindsSubsetOfStrongCells) {
  auto o = small_options();
  o.n_permutations = 49;
  o.n_trees = 60;
  o.null_trees = 30;
  const Table t = coupled_network(3);
  const auto base = baseline_pairwise(t, 0, o, RngSpec{0});
  ASSERT_EQ(base.size(), 2u);
  for (const auto& matrix : base) {
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        const auto& cell = matrix.at(i, j);
        if (!cell) continue;
        EXPECT_DOUBLE_EQ(cell->abs, std::abs(cell->signed_score));
        EXPECT_GT(cell->p_value, 0.0);
      }
    }
  }
  // Independent pairs rarely come out significant.
  std::size_t noise_hits = 0, noise_cells = 0;
  for (std::size_t i = 1; i < 6; ++i) {
    for (std::size_t j = 1; j < 6; ++j) {
      if (i == j) continue;
      ++noise_cells;
      noise_hits += base[0].at(i, j)->significant;
    }
  }
  EXPECT_LE(noise_hits, noise_cells / 4);
}

TEST(Pairwise, Errors) {
  const Table t = coupled_network(1, 30);
  auto o = small_options();
  o.n_permutations = 3;
  EXPECT_THROW(pairwise_analysis(t, 1, o, RngSpec{0}), DataError);  // numeric context
  const Table tiny({make_categorical("c", {0, 1}, {"0", "1"}), make_numeric("a", {1.0, 2.0})});
  EXPECT_THROW(pairwise_analysis(tiny, 0, o, RngSpec{0}), DataError);
  o.level = 1.0;
  EXPECT_THROW(pairwise_analysis(t, 0, o, RngSpec{0}), ConfigError);
  o.level = 0.05;
  o.q_bins = 1;
  EXPECT_THROW(pairwise_analysis(t, 0, o, RngSpec{0}), ConfigError);
}

TEST(Pairwise, MatrixFormatting) {
  InteractionMatrix m;
  m.genes = {"g1", "g2"};
  m.context_label = "x";
  m.cells = {std::nullopt, InteractionCell{0.5, -0.25, 0.01, true}, InteractionCell{0.0, 0.0, 1.0, false},
             std::nullopt};
  EXPECT_EQ(format_matrix(m, MatrixField::significant), "target\\input\tg1\tg2\ng1\tNA\t1\ng2\t0\tNA\n");
  EXPECT_EQ(format_matrix(m, MatrixField::signed_score),
            "target\\input\tg1\tg2\ng1\tNA\t-0.2500000000\ng2\t0.0000000000\tNA\n");
  EXPECT_EQ(m.significant_count(), 1u);
  const auto long_form = format_cells_long(m);
  EXPECT_NE(long_form.find("g1\tg2\tx\t0.5000000000\t-0.2500000000\t0.0100000000\t1\n"), std::string::npos);
}
