#include "ctximp/forest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp {

std::vector<std::uint32_t> Tree::used_variables(std::size_t node_index) const {
  std::vector<std::uint32_t> used;
  auto index = nodes_.at(node_index).parent;
  while (index != TreeNode::kNoParent) {
    used.push_back(*nodes_[index].split_variable);
    index = nodes_[index].parent;
  }
  std::reverse(used.begin(), used.end());
  return used;
}

std::size_t Tree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max<std::size_t>(d, n.depth);
  return d;
}

namespace {

void check_inputs(const Dataset& dataset, std::span<const std::size_t> inputs) {
  if (inputs.empty()) throw DataError("no input columns");
  std::vector<bool> seen(dataset.columns().size(), false);
  for (const auto column : inputs) {
    if (column >= dataset.columns().size()) throw DataError("input column index out of range");
    if (column == dataset.target()) throw DataError("the target cannot be an input");
    if (dataset.context() && column == *dataset.context()) {
      throw DataError("the context column cannot be an input");
    }
    if (!dataset.column(column).is_categorical()) {
      throw DataError(fmt::format("input '{}' is not categorical", dataset.column(column).name));
    }
    if (seen[column]) throw DataError(fmt::format("input '{}' listed twice", dataset.column(column).name));
    seen[column] = true;
  }
}

struct Grower {
  const Dataset& dataset;
  std::span<const std::size_t> inputs;
  Stream& rng;
  std::vector<TreeNode>& nodes;
  std::vector<std::uint32_t>& rows;
  std::vector<bool> used;
  std::vector<std::uint32_t> scratch;

  void grow(std::uint32_t index) {
    const TreeNode node = nodes[index];
    const RowSpan subset = RowSpan(rows).subspan(node.begin, node.size());
    if (subset.empty() || node.depth >= inputs.size() || is_pure(dataset, subset)) return;

    std::size_t available = inputs.size() - node.depth;
    auto pick = static_cast<std::size_t>(uniform_below(rng, available));
    std::size_t position = 0;
    for (; position < inputs.size(); ++position) {
      if (used[position]) continue;
      if (pick == 0) break;
      --pick;
    }
    const auto column_index = static_cast<std::uint32_t>(inputs[position]);
    const Column& column = dataset.column(column_index);
    const auto arity = static_cast<std::uint32_t>(column.arity());

    // Stable counting sort of the node's rows by split code keeps every child
    // slice ascending.
    std::vector<std::uint32_t> offsets(arity + 1, 0);
    for (const auto r : subset) ++offsets[column.codes[r] + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    scratch.resize(subset.size());
    {
      std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
      for (const auto r : subset) scratch[cursor[column.codes[r]]++] = r;
    }
    std::copy(scratch.begin(), scratch.end(), rows.begin() + node.begin);

    const auto first_child = static_cast<std::uint32_t>(nodes.size());
    nodes[index].split_variable = column_index;
    nodes[index].first_child = first_child;
    nodes[index].n_children = arity;
    for (std::uint32_t code = 0; code < arity; ++code) {
      TreeNode child;
      child.parent = index;
      child.begin = node.begin + offsets[code];
      child.end = node.begin + offsets[code + 1];
      child.depth = static_cast<std::uint16_t>(node.depth + 1);
      nodes.push_back(child);
    }
    used[position] = true;
    for (std::uint32_t code = 0; code < arity; ++code) grow(first_child + code);
    used[position] = false;
  }
};

}  // namespace

Tree build_tree(const Dataset& dataset, std::span<const std::size_t> inputs, Stream& rng) {
  check_inputs(dataset, inputs);
  Tree tree;
  tree.rows_.resize(dataset.n_samples());
  std::iota(tree.rows_.begin(), tree.rows_.end(), 0U);
  TreeNode root;
  root.begin = 0;
  root.end = static_cast<std::uint32_t>(dataset.n_samples());
  tree.nodes_.push_back(root);
  Grower grower{dataset, inputs, rng, tree.nodes_, tree.rows_, std::vector<bool>(inputs.size(), false), {}};
  grower.grow(0);
  tree.nodes_.shrink_to_fit();
  return tree;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, jobs), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

Forest build_forest(const Dataset& dataset, std::span<const std::size_t> inputs, std::size_t n_trees,
                    const RngSpec& rng, ImpurityKind kind, unsigned jobs) {
  if (n_trees < 1) throw ConfigError("a forest needs at least one tree");
  check_impurity(dataset, kind);
  check_inputs(dataset, inputs);
  Forest forest;
  forest.seed = rng.seed;
  forest.input_columns.assign(inputs.begin(), inputs.end());
  forest.impurity_kind = kind;
  forest.n_samples = dataset.n_samples();
  forest.trees.resize(n_trees);
  parallel_for(n_trees, jobs, [&](std::size_t i) {
    Stream stream = rng.tree_stream(i);
    forest.trees[i] = build_tree(dataset, inputs, stream);
  });
  return forest;
}

}  // namespace ctximp
