#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/forest.hpp"
#include "ctximp/importance.hpp"
#include "ctximp/rng.hpp"

namespace ctximp {

/// How each null replicate obtains its forest.
enum class NullMode {
  rebuild,          ///< grow a fresh forest per replicate from stream ("forest", r)
  reuse_structure,  ///< rescore the observed forest with the permuted context
};

struct PermutationOptions {
  std::size_t n_permutations = 1000;
  std::size_t n_trees = 1000;
  /// Trees per replicate forest; defaults to n_trees.
  std::optional<std::size_t> null_trees;
  NullMode mode = NullMode::rebuild;
  bool keep_null_scores = false;
  unsigned jobs = 1;
};

struct PermutationCell {
  double observed_abs = 0.0;
  double p_abs = 1.0;
  double observed_signed = 0.0;
  double p_signed = 1.0;  ///< two-sided, on |signed|
};

struct PermutationResult {
  std::vector<std::size_t> inputs;
  std::size_t n_contexts = 0;
  /// [variable position][context value]
  std::vector<std::vector<PermutationCell>> cells;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  /// Optional [replicate][context * p + variable] null scores.
  std::vector<std::vector<double>> null_abs;
  std::vector<std::vector<double>> null_signed;
};

/// Relative slack under which a null score ties with the observed one.
inline constexpr double kTieTolerance = 1e-12;

/// Add-one p-value: (#{null >= observed} + 1) / (n + 1), ties included.
double add_one_pvalue(double observed, std::span<const double> null_scores);

/// Context-permutation p-values for the abs (and, two-sided, signed)
/// contextual scores. Replicate r shuffles the context column with stream
/// ("perm", r); forests for replicates come from rng.derive("forest", r).
PermutationResult permutation_pvalues(const Dataset& dataset, std::span<const std::size_t> inputs,
                                      const PermutationOptions& options, const RngSpec& rng, ImpurityKind kind);
/// Same, scoring the observed statistic on an already grown forest.
PermutationResult permutation_pvalues(const Dataset& dataset, const Forest& observed,
                                      const PermutationOptions& options, const RngSpec& rng);

/// Quantile (linear interpolation) of all retained null abs scores.
double null_abs_quantile(const PermutationResult& result, double q);

/// Copies p-values into a report built from the same forest inputs.
void attach_pvalues(ImportanceReport& report, const PermutationResult& result);

}  // namespace ctximp
