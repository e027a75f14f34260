#include "ctximp/permtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp {

double add_one_pvalue(double observed, std::span<const double> null_scores) {
  // Scores that differ from the observed one by rounding only count as ties.
  const double floor = observed - kTieTolerance * std::max(1.0, std::abs(observed));
  const auto exceed = std::count_if(null_scores.begin(), null_scores.end(), [&](double s) { return s >= floor; });
  return static_cast<double>(exceed + 1) / static_cast<double>(null_scores.size() + 1);
}

PermutationResult permutation_pvalues(const Dataset& dataset, std::span<const std::size_t> inputs,
                                      const PermutationOptions& options, const RngSpec& rng, ImpurityKind kind) {
  if (!dataset.context()) throw DataError("permutation test needs a context column");
  if (options.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  const Forest observed = build_forest(dataset, inputs, options.n_trees, rng, kind, options.jobs);
  return permutation_pvalues(dataset, observed, options, rng);
}

PermutationResult permutation_pvalues(const Dataset& dataset, const Forest& observed,
                                      const PermutationOptions& options, const RngSpec& rng) {
  if (!dataset.context()) throw DataError("permutation test needs a context column");
  if (options.n_permutations < 1) throw ConfigError("n_permutations must be >= 1");
  const std::size_t null_trees = options.null_trees.value_or(observed.n_trees());
  if (null_trees < 1) throw ConfigError("null forests need at least one tree");

  const std::size_t p = observed.input_columns.size();
  const std::size_t n_c = dataset.context_arity();
  const std::size_t context_column = *dataset.context();
  const ForestScores obs = forest_scores(observed, dataset, options.jobs);

  // Replicate scores laid out [r][c * p + v].
  const std::size_t width = n_c * p;
  std::vector<double> null_abs(options.n_permutations * width);
  std::vector<double> null_signed(options.n_permutations * width);
  const auto& original_codes = dataset.context_column().codes;

  parallel_for(options.n_permutations, options.jobs, [&](std::size_t r) {
    std::vector<std::uint32_t> codes = original_codes;
    Stream perm_stream = rng.stream("perm", r);
    shuffle(std::span<std::uint32_t>(codes), perm_stream);
    const Dataset permuted = dataset.with_codes(context_column, std::move(codes));
    ForestScores scores;
    if (options.mode == NullMode::rebuild) {
      const Forest forest = build_forest(permuted, observed.input_columns, null_trees, rng.derive("forest", r),
                                         observed.impurity_kind, 1);
      scores = forest_scores(forest, permuted, 1);
    } else {
      scores = forest_scores(observed, permuted, 1);
    }
    for (std::size_t c = 0; c < n_c; ++c) {
      for (std::size_t v = 0; v < p; ++v) {
        null_abs[r * width + c * p + v] = scores.abs[c][v];
        null_signed[r * width + c * p + v] = std::abs(scores.signed_scores[c][v]);
      }
    }
  });

  PermutationResult result;
  result.inputs = observed.input_columns;
  result.n_contexts = n_c;
  result.n_permutations = options.n_permutations;
  result.seed = rng.seed;
  result.cells.assign(p, std::vector<PermutationCell>(n_c));
  std::vector<double> column_abs(options.n_permutations), column_signed(options.n_permutations);
  for (std::size_t c = 0; c < n_c; ++c) {
    for (std::size_t v = 0; v < p; ++v) {
      for (std::size_t r = 0; r < options.n_permutations; ++r) {
        column_abs[r] = null_abs[r * width + c * p + v];
        column_signed[r] = null_signed[r * width + c * p + v];
      }
      auto& cell = result.cells[v][c];
      cell.observed_abs = obs.abs[c][v];
      cell.observed_signed = obs.signed_scores[c][v];
      cell.p_abs = add_one_pvalue(cell.observed_abs, column_abs);
      cell.p_signed = add_one_pvalue(std::abs(cell.observed_signed), column_signed);
    }
  }
  if (options.keep_null_scores) {
    for (std::size_t r = 0; r < options.n_permutations; ++r) {
      const auto begin = static_cast<std::ptrdiff_t>(r * width);
      result.null_abs.emplace_back(null_abs.begin() + begin, null_abs.begin() + begin + static_cast<std::ptrdiff_t>(width));
      result.null_signed.emplace_back(null_signed.begin() + begin,
                                      null_signed.begin() + begin + static_cast<std::ptrdiff_t>(width));
    }
  }
  return result;
}

double null_abs_quantile(const PermutationResult& result, double q) {
  std::vector<double> all;
  for (const auto& row : result.null_abs) all.insert(all.end(), row.begin(), row.end());
  if (all.empty()) throw DataError("no retained null scores");
  std::sort(all.begin(), all.end());
  const double position = q * static_cast<double>(all.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(position));
  const auto hi = std::min(lo + 1, all.size() - 1);
  return all[lo] + (position - static_cast<double>(lo)) * (all[hi] - all[lo]);
}

void attach_pvalues(ImportanceReport& report, const PermutationResult& result) {
  if (report.variables.size() != result.cells.size()) throw DataError("report and permutation result disagree");
  for (std::size_t v = 0; v < report.variables.size(); ++v) {
    auto& var = report.variables[v];
    if (var.column != result.inputs[v] || var.contexts.size() != result.n_contexts) {
      throw DataError("report and permutation result disagree");
    }
    for (std::size_t c = 0; c < result.n_contexts; ++c) {
      var.contexts[c].p_abs = result.cells[v][c].p_abs;
      var.contexts[c].p_signed = result.cells[v][c].p_signed;
    }
  }
  report.n_permutations = result.n_permutations;
}

}  // namespace ctximp
