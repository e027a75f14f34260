#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/impurity.hpp"
#include "ctximp/rng.hpp"

namespace ctximp {

/// One node of a multiway tree. Children of an internal node are stored
/// contiguously in the owning Tree, one per code of the split column, so an
/// absent code yields an empty leaf.
struct TreeNode {
  static constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

  std::optional<std::uint32_t> split_variable;  ///< column index; empty for leaves
  std::uint32_t first_child = 0;
  std::uint32_t n_children = 0;
  std::uint32_t parent = kNoParent;
  std::uint32_t begin = 0;  ///< range into Tree::rows
  std::uint32_t end = 0;
  std::uint16_t depth = 0;

  [[nodiscard]] bool is_leaf() const { return !split_variable.has_value(); }
  [[nodiscard]] std::uint32_t size() const { return end - begin; }

  bool operator==(const TreeNode&) const = default;
};

/// A fully developed tree. Each node's sample subset is a contiguous slice of
/// `rows`; an internal node's slice is the concatenation of its children's,
/// and leaf slices are in ascending row order.
class Tree {
 public:
  [[nodiscard]] const std::vector<TreeNode>& nodes() const { return nodes_; }
  [[nodiscard]] const TreeNode& node(std::size_t index) const { return nodes_.at(index); }
  [[nodiscard]] const TreeNode& root() const { return nodes_.front(); }
  [[nodiscard]] RowSpan subset(const TreeNode& node) const {
    return RowSpan(rows_).subspan(node.begin, node.end - node.begin);
  }
  [[nodiscard]] std::span<const TreeNode> children(const TreeNode& node) const {
    return std::span<const TreeNode>(nodes_).subspan(node.first_child, node.n_children);
  }
  /// Split columns on the path from the root to `node`, excluding `node`.
  [[nodiscard]] std::vector<std::uint32_t> used_variables(std::size_t node_index) const;
  [[nodiscard]] std::size_t depth() const;

  bool operator==(const Tree&) const = default;

 private:
  friend Tree build_tree(const Dataset&, std::span<const std::size_t>, Stream&);
  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> rows_;
};

/// Grows a totally randomized tree: at every node that is not pure, not
/// empty, and has an unused input left, the split column is drawn uniformly
/// from the unused inputs and the node splits on all of its codes.
Tree build_tree(const Dataset& dataset, std::span<const std::size_t> inputs, Stream& rng);

struct Forest {
  std::vector<Tree> trees;
  std::uint64_t seed = 0;
  std::vector<std::size_t> input_columns;
  ImpurityKind impurity_kind = ImpurityKind::entropy;
  std::size_t n_samples = 0;

  [[nodiscard]] std::size_t n_trees() const { return trees.size(); }
  bool operator==(const Forest&) const = default;
};

/// Tree i is grown from rng.tree_stream(i); `jobs` worker threads do not
/// change the result.
Forest build_forest(const Dataset& dataset, std::span<const std::size_t> inputs, std::size_t n_trees,
                    const RngSpec& rng, ImpurityKind kind, unsigned jobs = 1);

/// Runs body(i) for i in [0, count) over `jobs` threads. Exceptions are
/// rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace ctximp
