#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/errors.hpp"
#include "ctximp/forest.hpp"

using namespace ctximp;

namespace {

void check_tree(const Tree& tree, const Dataset& ds, std::span<const std::size_t> inputs) {
  const auto& nodes = tree.nodes();
  ASSERT_FALSE(nodes.empty());
  EXPECT_EQ(tree.root().size(), ds.n_samples());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& node = nodes[i];
    const auto subset = tree.subset(node);
    const auto used = tree.used_variables(i);
    if (node.is_leaf()) {
      EXPECT_TRUE(std::is_sorted(subset.begin(), subset.end()));
      const bool exhausted = used.size() == inputs.size();
      EXPECT_TRUE(subset.empty() || is_pure(ds, subset) || exhausted) << "leaf " << i << " could split";
      continue;
    }
    const auto var = *node.split_variable;
    EXPECT_TRUE(std::find(inputs.begin(), inputs.end(), var) != inputs.end());
    EXPECT_TRUE(std::find(used.begin(), used.end(), var) == used.end()) << "variable reused on a path";
    EXPECT_FALSE(is_pure(ds, subset));
    const Column& col = ds.column(var);
    ASSERT_EQ(node.n_children, col.arity());
    std::size_t total = 0;
    std::uint32_t code = 0;
    for (const TreeNode& child : tree.children(node)) {
      EXPECT_EQ(child.depth, node.depth + 1);
      for (const auto row : tree.subset(child)) EXPECT_EQ(col.codes[row], code);
      total += child.size();
      ++code;
    }
    EXPECT_EQ(total, subset.size());
    // children partition the parent slice in code order
    EXPECT_EQ(tree.children(node).front().begin, node.begin);
    EXPECT_EQ(tree.children(node).back().end, node.end);
  }
}

}  // namespace

TEST(Tree, StructuralInvariantsOnBenchmarks) {
  for (const auto* name : {"example1", "problem1", "problem2"}) {
    const Dataset ds = generate(name);
    const auto inputs = ds.input_columns();
    Stream rng = RngSpec{1}.tree_stream(0);
    for (int t = 0; t < 50; ++t) {
      const Tree tree = build_tree(ds, inputs, rng);
      check_tree(tree, ds, inputs);
      EXPECT_LE(tree.depth(), inputs.size());
    }
  }
}

TEST(Tree, ContextIsNeverAnInput) {
  const Dataset ds = generate_problem1();
  const auto inputs = ds.input_columns();
  EXPECT_EQ(std::count(inputs.begin(), inputs.end(), *ds.context()), 0);
  const Forest forest = build_forest(ds, inputs, 200, RngSpec{4}, ImpurityKind::entropy);
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) EXPECT_NE(*node.split_variable, *ds.context());
    }
  }
}

TEST(Tree, RootSplitIsUniform) {
  const Dataset ds = generate_problem1();
  const Forest forest = build_forest(ds, ds.input_columns(), 10000, RngSpec{0}, ImpurityKind::entropy);
  std::map<std::uint32_t, int> counts;
  for (const auto& tree : forest.trees) ++counts[*tree.root().split_variable];
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [var, count] : counts) EXPECT_NEAR(count / 10000.0, 1.0 / 3.0, 0.02) << var;
}

TEST(Tree, InputValidation) {
  const Dataset ds = generate_problem1();
  Stream rng = RngSpec{0}.tree_stream(0);
  const std::vector<std::size_t> none;
  EXPECT_THROW(build_tree(ds, none, rng), DataError);
  const std::vector<std::size_t> with_target{1, ds.target()};
  EXPECT_THROW(build_tree(ds, with_target, rng), DataError);
  const std::vector<std::size_t> with_context{1, *ds.context()};
  EXPECT_THROW(build_tree(ds, with_context, rng), DataError);
  const std::vector<std::size_t> duplicate{1, 1};
  EXPECT_THROW(build_tree(ds, duplicate, rng), DataError);
  EXPECT_THROW(build_forest(ds, ds.input_columns(), 0, RngSpec{0}, ImpurityKind::entropy), ConfigError);
}

TEST(Tree, SingleRowIsOneLeaf) {
  const Dataset ds(Table({make_categorical("x", {0}, {"a"}), make_categorical("y", {0}, {"b"})}), "y", std::nullopt);
  Stream rng = RngSpec{0}.tree_stream(0);
  const Tree tree = build_tree(ds, ds.input_columns(), rng);
  EXPECT_EQ(tree.nodes().size(), 1u);
  EXPECT_TRUE(tree.root().is_leaf());
}

TEST(Forest, DeterministicAcrossJobCounts) {
  const Dataset ds = generate_problem2();
  const auto inputs = ds.input_columns();
  const Forest one = build_forest(ds, inputs, 64, RngSpec{99}, ImpurityKind::entropy, 1);
  const Forest four = build_forest(ds, inputs, 64, RngSpec{99}, ImpurityKind::entropy, 4);
  const Forest again = build_forest(ds, inputs, 64, RngSpec{99}, ImpurityKind::entropy, 1);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, again);
  const Forest other = build_forest(ds, inputs, 64, RngSpec{100}, ImpurityKind::entropy, 1);
  EXPECT_NE(one, other);
}

TEST(Forest, PrefixOfLargerForestIsSmallerForest) {
  const Dataset ds = generate_problem1();
  const Forest small = build_forest(ds, ds.input_columns(), 10, RngSpec{7}, ImpurityKind::entropy);
  const Forest large = build_forest(ds, ds.input_columns(), 30, RngSpec{7}, ImpurityKind::entropy);
  for (std::size_t t = 0; t < 10; ++t) EXPECT_EQ(small.trees[t], large.trees[t]);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 3, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 2,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
