#include "ctximp/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp {

namespace {

void check_match(const Forest& forest, const Dataset& dataset) {
  if (forest.n_samples != dataset.n_samples()) {
    throw DataError(fmt::format("forest was grown on {} samples, dataset has {}", forest.n_samples,
                                dataset.n_samples()));
  }
  for (const auto column : forest.input_columns) {
    if (column >= dataset.columns().size() || !dataset.column(column).is_categorical() ||
        column == dataset.target() || (dataset.context() && column == *dataset.context())) {
      throw DataError("forest inputs do not match the dataset");
    }
  }
}

std::vector<std::size_t> position_lookup(const Forest& forest, std::size_t n_columns) {
  std::vector<std::size_t> lookup(n_columns, 0);
  for (std::size_t i = 0; i < forest.input_columns.size(); ++i) lookup[forest.input_columns[i]] = i;
  return lookup;
}

void visit_tree(const Tree& tree, std::size_t tree_index, const Dataset& dataset, ImpurityKind kind,
                const SplitVisitor& fn) {
  const double n = static_cast<double>(dataset.n_samples());
  const bool with_context = dataset.context().has_value();
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    const auto rows = tree.subset(node);
    ContextSplit split;
    if (with_context) {
      split = context_split(dataset, rows, *node.split_variable, kind);
    } else {
      split.decrease = impurity_decrease(dataset, rows, *node.split_variable, kind);
    }
    fn(tree_index, node, static_cast<double>(rows.size()) / n, split);
  }
}

void check_context_value(const Dataset& dataset, std::uint32_t value) {
  if (value >= dataset.context_arity()) {
    throw DataError(fmt::format("unknown context code {} (arity {})", value, dataset.context_arity()));
  }
}

}  // namespace

void for_each_split(const Forest& forest, const Dataset& dataset, const SplitVisitor& fn) {
  check_match(forest, dataset);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    visit_tree(forest.trees[t], t, dataset, forest.impurity_kind, fn);
  }
}

ForestScores forest_scores(const Forest& forest, const Dataset& dataset, unsigned jobs) {
  check_match(forest, dataset);
  const std::size_t p = forest.input_columns.size();
  const std::size_t n_c = dataset.context() ? dataset.context_arity() : 0;
  const auto lookup = position_lookup(forest, dataset.columns().size());

  // Per-tree partial sums, reduced in tree order so the result does not
  // depend on the number of workers.
  const std::size_t stride = p * (2 + 2 * n_c);
  std::vector<double> partial(forest.trees.size() * stride, 0.0);
  parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
    double* out = partial.data() + t * stride;
    visit_tree(forest.trees[t], t, dataset, forest.impurity_kind,
               [&](std::size_t, const TreeNode& node, double weight, const ContextSplit& split) {
                 const std::size_t v = lookup[*node.split_variable];
                 out[v] += weight * split.decrease;
                 if (n_c == 0) return;
                 out[p + v] += weight * (split.decrease - split.averaged_context_decrease());
                 for (std::size_t c = 0; c < n_c; ++c) {
                   const double diff = split.decrease - split.context_decrease[c];
                   out[2 * p + c * p + v] += weight * std::abs(diff);
                   out[2 * p + n_c * p + c * p + v] += weight * diff;
                 }
               });
  });

  std::vector<double> total(stride, 0.0);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    for (std::size_t k = 0; k < stride; ++k) total[k] += partial[t * stride + k];
  }
  const double n_trees = static_cast<double>(forest.trees.size());
  for (auto& x : total) x /= n_trees;

  ForestScores scores;
  scores.imp.assign(total.begin(), total.begin() + static_cast<std::ptrdiff_t>(p));
  if (n_c > 0) {
    scores.global_context.assign(total.begin() + static_cast<std::ptrdiff_t>(p),
                                 total.begin() + static_cast<std::ptrdiff_t>(2 * p));
    for (std::size_t c = 0; c < n_c; ++c) {
      const auto abs_begin = total.begin() + static_cast<std::ptrdiff_t>(2 * p + c * p);
      const auto signed_begin = total.begin() + static_cast<std::ptrdiff_t>(2 * p + n_c * p + c * p);
      scores.abs.emplace_back(abs_begin, abs_begin + static_cast<std::ptrdiff_t>(p));
      scores.signed_scores.emplace_back(signed_begin, signed_begin + static_cast<std::ptrdiff_t>(p));
    }
  } else {
    scores.global_context.assign(p, 0.0);
  }
  return scores;
}

Scores mdi(const Forest& forest, const Dataset& dataset) {
  // Plain MDI ignores any context designation.
  check_match(forest, dataset);
  const auto lookup = position_lookup(forest, dataset.columns().size());
  Scores imp(forest.input_columns.size(), 0.0);
  const double n = static_cast<double>(dataset.n_samples());
  // Same per-tree grouping of the sums as forest_scores.
  Scores partial(imp.size());
  for (const auto& tree : forest.trees) {
    std::fill(partial.begin(), partial.end(), 0.0);
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) continue;
      const auto rows = tree.subset(node);
      partial[lookup[*node.split_variable]] +=
          static_cast<double>(rows.size()) / n *
          impurity_decrease(dataset, rows, *node.split_variable, forest.impurity_kind);
    }
    for (std::size_t v = 0; v < imp.size(); ++v) imp[v] += partial[v];
  }
  for (auto& x : imp) x /= static_cast<double>(forest.trees.size());
  return imp;
}

Scores contextual_abs(const Forest& forest, const Dataset& dataset, std::uint32_t context_value) {
  check_context_value(dataset, context_value);
  return forest_scores(forest, dataset).abs[context_value];
}

Scores contextual_signed(const Forest& forest, const Dataset& dataset, std::uint32_t context_value) {
  check_context_value(dataset, context_value);
  return forest_scores(forest, dataset).signed_scores[context_value];
}

Scores contextual_global(const Forest& forest, const Dataset& dataset) {
  (void)dataset.context_column();
  return forest_scores(forest, dataset).global_context;
}

Scores per_context_baseline(const Dataset& dataset, std::uint32_t context_value, std::size_t n_trees,
                            const RngSpec& rng, ImpurityKind kind, unsigned jobs) {
  check_context_value(dataset, context_value);
  const auto rows = dataset.rows_in_context(context_value);
  if (rows.empty()) {
    throw DataError(fmt::format("no samples with {} = {}", dataset.context_column().name,
                                dataset.context_column().labels[context_value]));
  }
  const Dataset slice = dataset.select_rows(rows);
  const auto inputs = slice.input_columns();
  const Forest forest = build_forest(slice, inputs, n_trees, rng, kind, jobs);
  return mdi(forest, slice);
}

std::string_view to_string(ContextLabel label) {
  switch (label) {
    case ContextLabel::independent: return "context-independent";
    case ContextLabel::complementary: return "context-complementary";
    case ContextLabel::redundant: return "context-redundant";
    case ContextLabel::irrelevant_in_context: return "irrelevant-in-context";
    case ContextLabel::mixed: return "mixed";
  }
  return "?";
}

ImportanceReport make_report(const Forest& forest, const Dataset& dataset, const ForestScores& scores) {
  ImportanceReport report;
  report.target_name = dataset.target_column().name;
  report.n_trees = forest.n_trees();
  report.seed = forest.seed;
  report.impurity = forest.impurity_kind;
  const std::size_t n_c = scores.abs.size();
  if (dataset.context()) {
    report.context_name = dataset.context_column().name;
    report.context_labels = dataset.context_column().labels;
  }
  for (std::size_t v = 0; v < forest.input_columns.size(); ++v) {
    VariableReport var;
    var.column = forest.input_columns[v];
    var.name = dataset.column(var.column).name;
    var.imp = scores.imp[v];
    var.global_context = scores.global_context[v];
    for (std::size_t c = 0; c < n_c; ++c) {
      ContextCell cell;
      cell.abs = scores.abs[c][v];
      cell.signed_score = scores.signed_scores[c][v];
      var.contexts.push_back(cell);
    }
    report.variables.push_back(std::move(var));
  }
  return report;
}

void characterize(ImportanceReport& report, double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigError("characterization tolerance must be >= 0");
  report.epsilon = epsilon;
  std::vector<bool> dependent(report.variables.size(), false);
  for (std::size_t v = 0; v < report.variables.size(); ++v) {
    auto& var = report.variables[v];
    dependent[v] = std::any_of(var.contexts.begin(), var.contexts.end(),
                               [&](const ContextCell& cell) { return cell.abs > epsilon; });
    for (auto& cell : var.contexts) {
      cell.rank.reset();
      if (!dependent[v] || cell.abs <= epsilon) {
        cell.label = ContextLabel::independent;
      } else if (std::abs(cell.signed_score) >= cell.abs - epsilon) {
        if (cell.signed_score < 0.0) {
          cell.label = ContextLabel::complementary;
        } else if (std::abs(cell.abs - cell.signed_score) <= epsilon &&
                   std::abs(cell.signed_score - var.imp) <= epsilon) {
          cell.label = ContextLabel::irrelevant_in_context;
        } else {
          cell.label = ContextLabel::redundant;
        }
      } else {
        cell.label = ContextLabel::mixed;
      }
    }
  }
  const std::size_t n_c = report.context_labels.size();
  for (std::size_t c = 0; c < n_c; ++c) {
    std::vector<std::size_t> order;
    for (std::size_t v = 0; v < report.variables.size(); ++v) {
      if (dependent[v]) order.push_back(v);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return report.variables[a].contexts[c].signed_score < report.variables[b].contexts[c].signed_score;
    });
    for (std::size_t r = 0; r < order.size(); ++r) report.variables[order[r]].contexts[c].rank = r + 1;
  }
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_score(double value) {
  auto text = fmt::format("{:.10f}", value);
  if (text.find_first_not_of("-0.") == std::string::npos && text.front() == '-') text.erase(0, 1);
  return text;
}

namespace {

std::string metadata_header(const ImportanceReport& report, const OutputMetadata& meta) {
  std::string out;
  out += fmt::format("# ctximp {}\n", meta.version);
  out += fmt::format("# command: {}\n", meta.command);
  if (!meta.flags.empty()) out += fmt::format("# flags: {}\n", meta.flags);
  out += fmt::format("# target: {}\n", report.target_name);
  out += fmt::format("# context: {}\n", report.context_name.value_or("-"));
  out += fmt::format("# n_trees: {}\n", report.n_trees);
  out += fmt::format("# seed: {}\n", report.seed);
  out += fmt::format("# impurity: {}\n", to_string(report.impurity));
  out += fmt::format("# epsilon: {:.6g}\n", report.epsilon);
  if (report.n_permutations) {
    out += fmt::format("# n_permutations: {}\n", *report.n_permutations);
    out += fmt::format("# significance_level: {}\n", report.significance_level);
  }
  return out;
}

bool has_baselines(const ImportanceReport& report) {
  for (const auto& var : report.variables) {
    for (const auto& cell : var.contexts) {
      if (cell.baseline) return true;
    }
  }
  return false;
}

bool has_pvalues(const ImportanceReport& report) {
  for (const auto& var : report.variables) {
    for (const auto& cell : var.contexts) {
      if (cell.p_abs) return true;
    }
  }
  return false;
}

std::string optional_score(const std::optional<double>& value) { return value ? format_score(*value) : "NA"; }

}  // namespace

std::string format_report_tsv(const ImportanceReport& report, const OutputMetadata& meta) {
  const bool baselines = has_baselines(report);
  const bool pvalues = has_pvalues(report);
  std::string out = metadata_header(report, meta);
  out += "variable\timp";
  if (report.has_context()) {
    for (const auto& label : report.context_labels) {
      out += fmt::format("\tabs[{0}]\tsigned[{0}]", label);
      if (baselines) out += fmt::format("\tbaseline[{}]", label);
      if (pvalues) out += fmt::format("\tp_abs[{0}]\tp_signed[{0}]\tsig[{0}]", label);
    }
    out += "\timp_Xc";
    for (const auto& label : report.context_labels) out += fmt::format("\tlabel[{}]", label);
    for (const auto& label : report.context_labels) out += fmt::format("\trank[{}]", label);
  }
  out += '\n';
  for (const auto& var : report.variables) {
    out += var.name + '\t' + format_score(var.imp);
    if (report.has_context()) {
      for (const auto& cell : var.contexts) {
        out += '\t' + format_score(cell.abs) + '\t' + format_score(cell.signed_score);
        if (baselines) out += '\t' + optional_score(cell.baseline);
        if (pvalues) {
          out += '\t' + optional_score(cell.p_abs) + '\t' + optional_score(cell.p_signed);
          out += cell.p_abs && *cell.p_abs < report.significance_level ? "\t*" : "\t.";
        }
      }
      out += '\t' + format_score(var.global_context);
      for (const auto& cell : var.contexts) out += fmt::format("\t{}", to_string(cell.label));
      for (const auto& cell : var.contexts) out += cell.rank ? fmt::format("\t{}", *cell.rank) : "\t-";
    }
    out += '\n';
  }
  return out;
}

std::string format_report_text(const ImportanceReport& report, const OutputMetadata& meta) {
  std::string out = metadata_header(report, meta);
  for (const auto& var : report.variables) {
    out += fmt::format("\nvariable: {}\n", var.name);
    out += fmt::format("  imp: {}\n", format_score(var.imp));
    for (std::size_t c = 0; c < var.contexts.size(); ++c) {
      const auto& cell = var.contexts[c];
      const auto& label = report.context_labels[c];
      out += fmt::format("  abs[{}]: {}\n", label, format_score(cell.abs));
      out += fmt::format("  signed[{}]: {}\n", label, format_score(cell.signed_score));
      if (cell.baseline) out += fmt::format("  baseline[{}]: {}\n", label, format_score(*cell.baseline));
      if (cell.p_abs) out += fmt::format("  p_abs[{}]: {}\n", label, format_score(*cell.p_abs));
      if (cell.p_signed) out += fmt::format("  p_signed[{}]: {}\n", label, format_score(*cell.p_signed));
    }
    if (report.has_context()) {
      out += fmt::format("  imp_Xc: {}\n", format_score(var.global_context));
      for (std::size_t c = 0; c < var.contexts.size(); ++c) {
        const auto& cell = var.contexts[c];
        out += fmt::format("  label[{}]: {}\n", report.context_labels[c], to_string(cell.label));
        if (cell.rank) out += fmt::format("  rank[{}]: {}\n", report.context_labels[c], *cell.rank);
      }
    }
  }
  return out;
}

}  // namespace ctximp
