#include "ctximp/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctximp/errors.hpp"
#include "ctximp/importance.hpp"

namespace ctximp {

std::size_t InteractionMatrix::significant_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const auto& cell) { return cell && cell->significant; }));
}

std::vector<std::uint32_t> quantile_bins(std::span<const double> values, std::size_t q) {
  if (q < 2) throw ConfigError("quantile discretization needs at least 2 bins");
  const std::size_t n = values.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<std::uint32_t> bins(n, 0);
  std::uint32_t tie_bin = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const auto row = order[rank];
    if (rank == 0 || values[row] != values[order[rank - 1]]) {
      tie_bin = static_cast<std::uint32_t>(rank * q / n);
    }
    bins[row] = tie_bin;
  }
  return bins;
}

Dataset target_dataset(const Table& table, std::size_t context, std::size_t target, std::size_t q_bins) {
  std::vector<std::string> bin_labels;
  for (std::size_t b = 0; b < q_bins; ++b) bin_labels.push_back(fmt::format("q{}", b));
  std::vector<Column> columns;
  for (std::size_t i = 0; i < table.n_columns(); ++i) {
    const Column& source = table.column(i);
    if (i == target || i == context || source.is_categorical()) {
      columns.push_back(source);
    } else {
      columns.push_back(make_categorical(source.name, quantile_bins(source.values, q_bins), bin_labels));
    }
  }
  return Dataset(Table(std::move(columns)), target, context);
}

namespace {

void check_table(const Table& table, std::size_t context, const PairwiseOptions& options) {
  if (context >= table.n_columns()) throw DataError("context column index out of range");
  if (!table.column(context).is_categorical()) {
    throw DataError(fmt::format("context column '{}' must be categorical", table.column(context).name));
  }
  if (table.n_columns() < 3) throw DataError("pairwise mode needs at least 2 non-context columns");
  if (!(options.level > 0.0 && options.level < 1.0)) throw ConfigError("significance level must be in (0, 1)");
  if (options.n_trees < 1 || options.n_permutations < 1) throw ConfigError("tree and permutation counts must be >= 1");
}

std::vector<std::size_t> gene_columns(const Table& table, std::size_t context) {
  std::vector<std::size_t> genes;
  for (std::size_t i = 0; i < table.n_columns(); ++i) {
    if (i != context) genes.push_back(i);
  }
  return genes;
}

std::vector<InteractionMatrix> empty_matrices(const Table& table, std::size_t context,
                                              const std::vector<std::size_t>& genes, double level) {
  std::vector<InteractionMatrix> matrices;
  const Column& ctx = table.column(context);
  for (std::uint32_t c = 0; c < ctx.arity(); ++c) {
    InteractionMatrix m;
    for (const auto g : genes) m.genes.push_back(table.column(g).name);
    m.context_value = c;
    m.context_label = ctx.labels[c];
    m.level = level;
    m.cells.assign(genes.size() * genes.size(), std::nullopt);
    matrices.push_back(std::move(m));
  }
  return matrices;
}

std::size_t gene_position(const std::vector<std::size_t>& genes, std::size_t column) {
  return static_cast<std::size_t>(std::find(genes.begin(), genes.end(), column) - genes.begin());
}

InteractionMatrix pick(std::vector<InteractionMatrix> all, std::uint32_t context_value) {
  if (context_value >= all.size()) throw DataError(fmt::format("unknown context code {}", context_value));
  return std::move(all[context_value]);
}

/// Imp - Imp(.|X_c=c) for every context value from a whole-data forest and
/// one forest per context slice. Indexed [c][variable].
std::vector<Scores> two_forest_differences(const Dataset& dataset, std::size_t n_trees, const RngSpec& rng,
                                           ImpurityKind kind) {
  const auto inputs = dataset.input_columns();
  const Scores imp = mdi(build_forest(dataset, inputs, n_trees, rng, kind), dataset);
  std::vector<Scores> diffs;
  for (std::uint32_t c = 0; c < dataset.context_arity(); ++c) {
    Scores diff(inputs.size(), 0.0);
    if (!dataset.rows_in_context(c).empty()) {
      const Scores base = per_context_baseline(dataset, c, n_trees, rng.derive("baseline", c), kind);
      for (std::size_t v = 0; v < inputs.size(); ++v) diff[v] = imp[v] - base[v];
    }
    diffs.push_back(std::move(diff));
  }
  return diffs;
}

}  // namespace

std::vector<InteractionMatrix> pairwise_analysis(const Table& table, std::size_t context,
                                                 const PairwiseOptions& options, const RngSpec& rng) {
  check_table(table, context, options);
  const auto genes = gene_columns(table, context);
  auto matrices = empty_matrices(table, context, genes, options.level);
  for (std::size_t i = 0; i < genes.size(); ++i) {
    const Dataset dataset = target_dataset(table, context, genes[i], options.q_bins);
    const auto kind = default_impurity(dataset);
    const RngSpec target_rng = rng.derive("target", genes[i]);
    const auto inputs = dataset.input_columns();
    const Forest forest = build_forest(dataset, inputs, options.n_trees, target_rng, kind, options.jobs);
    PermutationOptions perm;
    perm.n_permutations = options.n_permutations;
    perm.n_trees = options.n_trees;
    perm.null_trees = options.null_trees;
    perm.mode = options.mode;
    perm.jobs = options.jobs;
    const auto result = permutation_pvalues(dataset, forest, perm, target_rng);
    for (std::size_t v = 0; v < inputs.size(); ++v) {
      const std::size_t j = gene_position(genes, inputs[v]);
      for (std::size_t c = 0; c < matrices.size(); ++c) {
        const auto& cell = result.cells[v][c];
        matrices[c].cells[i * genes.size() + j] =
            InteractionCell{cell.observed_abs, cell.observed_signed, cell.p_abs, cell.p_abs < options.level};
      }
    }
  }
  return matrices;
}

InteractionMatrix pairwise_analysis(const Table& table, std::size_t context, std::uint32_t context_value,
                                    const PairwiseOptions& options, const RngSpec& rng) {
  return pick(pairwise_analysis(table, context, options, rng), context_value);
}

std::vector<InteractionMatrix> baseline_pairwise(const Table& table, std::size_t context,
                                                 const PairwiseOptions& options, const RngSpec& rng) {
  check_table(table, context, options);
  const auto genes = gene_columns(table, context);
  auto matrices = empty_matrices(table, context, genes, options.level);
  const std::size_t null_trees = options.null_trees.value_or(options.n_trees);
  for (std::size_t i = 0; i < genes.size(); ++i) {
    const Dataset dataset = target_dataset(table, context, genes[i], options.q_bins);
    const auto kind = default_impurity(dataset);
    const RngSpec target_rng = rng.derive("target", genes[i]);
    const auto inputs = dataset.input_columns();
    const std::size_t n_c = dataset.context_arity();
    const auto observed = two_forest_differences(dataset, options.n_trees, target_rng, kind);

    // null[r][c * p + v] = |difference| under a permuted context.
    const std::size_t width = n_c * inputs.size();
    std::vector<double> null(options.n_permutations * width);
    parallel_for(options.n_permutations, options.jobs, [&](std::size_t r) {
      std::vector<std::uint32_t> codes = dataset.context_column().codes;
      Stream perm_stream = target_rng.stream("perm", r);
      shuffle(std::span<std::uint32_t>(codes), perm_stream);
      const Dataset permuted = dataset.with_codes(*dataset.context(), std::move(codes));
      const auto diffs = two_forest_differences(permuted, null_trees, target_rng.derive("forest", r), kind);
      for (std::size_t c = 0; c < n_c; ++c) {
        for (std::size_t v = 0; v < inputs.size(); ++v) null[r * width + c * inputs.size() + v] = std::abs(diffs[c][v]);
      }
    });
    std::vector<double> column(options.n_permutations);
    for (std::size_t c = 0; c < n_c; ++c) {
      for (std::size_t v = 0; v < inputs.size(); ++v) {
        for (std::size_t r = 0; r < options.n_permutations; ++r) column[r] = null[r * width + c * inputs.size() + v];
        const double diff = observed[c][v];
        const double p = add_one_pvalue(std::abs(diff), column);
        const std::size_t j = gene_position(genes, inputs[v]);
        matrices[c].cells[i * genes.size() + j] = InteractionCell{std::abs(diff), diff, p, p < options.level};
      }
    }
  }
  return matrices;
}

InteractionMatrix baseline_pairwise(const Table& table, std::size_t context, std::uint32_t context_value,
                                    const PairwiseOptions& options, const RngSpec& rng) {
  return pick(baseline_pairwise(table, context, options, rng), context_value);
}

std::string format_matrix(const InteractionMatrix& matrix, MatrixField field) {
  std::string out = "target\\input";
  for (const auto& g : matrix.genes) out += '\t' + g;
  out += '\n';
  const std::size_t n = matrix.genes.size();
  for (std::size_t i = 0; i < n; ++i) {
    out += matrix.genes[i];
    for (std::size_t j = 0; j < n; ++j) {
      const auto& cell = matrix.at(i, j);
      if (!cell) {
        out += "\tNA";
        continue;
      }
      switch (field) {
        case MatrixField::abs: out += '\t' + format_score(cell->abs); break;
        case MatrixField::signed_score: out += '\t' + format_score(cell->signed_score); break;
        case MatrixField::p_value: out += '\t' + format_score(cell->p_value); break;
        case MatrixField::significant: out += cell->significant ? "\t1" : "\t0"; break;
      }
    }
    out += '\n';
  }
  return out;
}

std::string format_cells_long(const InteractionMatrix& matrix) {
  std::string out = "target\tinput\tcontext\tabs\tsigned\tp_value\tsignificant\n";
  const std::size_t n = matrix.genes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& cell = matrix.at(i, j);
      if (!cell) continue;
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", matrix.genes[i], matrix.genes[j], matrix.context_label,
                         format_score(cell->abs), format_score(cell->signed_score), format_score(cell->p_value),
                         cell->significant ? 1 : 0);
    }
  }
  return out;
}

}  // namespace ctximp
