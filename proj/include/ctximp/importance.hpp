#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/forest.hpp"
#include "ctximp/impurity.hpp"

namespace ctximp {

/// Per-variable scores, indexed like Forest::input_columns.
using Scores = std::vector<double>;

/// Calls fn(tree_index, node, p(t), split) for every internal node, tree by
/// tree in depth-first order. `split` carries G(Y;X|t) and, when a context is
/// designated, its per-context-value decomposition.
using SplitVisitor =
    std::function<void(std::size_t tree, const TreeNode& node, double weight, const ContextSplit& split)>;
void for_each_split(const Forest& forest, const Dataset& dataset, const SplitVisitor& fn);

/// Mean decrease impurity: (1/N_T) sum_T sum_{t splits on X} p(t) G(Y;X|t).
Scores mdi(const Forest& forest, const Dataset& dataset);
/// Node-level |G(Y;X|t) - G(Y;X|t,X_c=c)| version of mdi.
Scores contextual_abs(const Forest& forest, const Dataset& dataset, std::uint32_t context_value);
/// Node-level G(Y;X|t) - G(Y;X|t,X_c=c) version of mdi.
Scores contextual_signed(const Forest& forest, const Dataset& dataset, std::uint32_t context_value);
/// Node-level G(Y;X|t) - sum_c p(c|t) G(Y;X|t,X_c=c) version of mdi.
Scores contextual_global(const Forest& forest, const Dataset& dataset);
/// mdi of a fresh forest grown on the rows with X_c = c only.
Scores per_context_baseline(const Dataset& dataset, std::uint32_t context_value, std::size_t n_trees,
                            const RngSpec& rng, ImpurityKind kind, unsigned jobs = 1);

/// All forest-derived scores from one traversal. abs/signed are indexed
/// [context value][variable].
struct ForestScores {
  Scores imp;
  std::vector<Scores> abs;
  std::vector<Scores> signed_scores;
  Scores global_context;
};
ForestScores forest_scores(const Forest& forest, const Dataset& dataset, unsigned jobs = 1);

enum class ContextLabel { independent, complementary, redundant, irrelevant_in_context, mixed };
std::string_view to_string(ContextLabel label);

struct ContextCell {
  double abs = 0.0;
  double signed_score = 0.0;
  std::optional<double> baseline;  ///< Imp(X|X_c=c) from a per-context forest
  std::optional<double> p_abs;
  std::optional<double> p_signed;
  ContextLabel label = ContextLabel::independent;
  std::optional<std::size_t> rank;  ///< 1 = most complementary among dependent inputs
};

struct VariableReport {
  std::size_t column = 0;
  std::string name;
  double imp = 0.0;
  std::vector<ContextCell> contexts;  ///< by context code; empty without context
  double global_context = 0.0;
};

struct ImportanceReport {
  std::vector<VariableReport> variables;
  std::string target_name;
  std::optional<std::string> context_name;
  std::vector<std::string> context_labels;
  // metadata
  std::size_t n_trees = 0;
  std::uint64_t seed = 0;
  ImpurityKind impurity = ImpurityKind::entropy;
  double epsilon = 0.0;
  std::optional<std::size_t> n_permutations;
  double significance_level = 0.05;

  [[nodiscard]] bool has_context() const { return context_name.has_value(); }
};

/// Report skeleton from forest scores (labels unset, epsilon 0).
ImportanceReport make_report(const Forest& forest, const Dataset& dataset, const ForestScores& scores);

/// Labels every (variable, context value) cell at tolerance `epsilon`:
///  - context-independent everywhere if abs <= epsilon for every c;
///  - otherwise, per c: context-independent if abs <= epsilon there,
///    complementary / redundant when |signed| >= abs - epsilon (by sign),
///    irrelevant-in-context for a redundant cell whose abs, signed and Imp
///    agree within epsilon, and mixed for the rest.
/// Dependent inputs are ranked per c by ascending signed score.
void characterize(ImportanceReport& report, double epsilon);

struct OutputMetadata {
  std::string version;
  std::string command;
  std::string flags;
};

/// Tab-separated table, one row per variable. Column order: imp; per context
/// value abs, signed, [baseline], [p_abs, p_signed, sig]; imp_Xc; labels;
/// ranks. '#' lines carry the metadata.
std::string format_report_tsv(const ImportanceReport& report, const OutputMetadata& meta);
/// One "key: value" record per variable under the same metadata header.
std::string format_report_text(const ImportanceReport& report, const OutputMetadata& meta);

/// Fixed 10-decimal rendering used by every report, with -0 printed as 0.
std::string format_score(double value);

}  // namespace ctximp
