#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/permtest.hpp"
#include "ctximp/rng.hpp"

namespace ctximp {

struct PairwiseOptions {
  std::size_t n_trees = 1000;
  std::size_t n_permutations = 1000;
  std::optional<std::size_t> null_trees;
  std::size_t q_bins = 5;
  double level = 0.05;
  NullMode mode = NullMode::rebuild;
  unsigned jobs = 1;
};

struct InteractionCell {
  double abs = 0.0;           ///< abs score, or |Imp - Imp(.|c)| for the baseline
  double signed_score = 0.0;  ///< signed score, or Imp - Imp(.|c) for the baseline
  double p_value = 1.0;
  bool significant = false;
};

/// Cell (i, j) scores input j when variable i is the target. No diagonal.
struct InteractionMatrix {
  std::vector<std::string> genes;
  std::uint32_t context_value = 0;
  std::string context_label;
  double level = 0.05;
  std::vector<std::optional<InteractionCell>> cells;  ///< row-major genes x genes

  [[nodiscard]] const std::optional<InteractionCell>& at(std::size_t target, std::size_t input) const {
    return cells.at(target * genes.size() + input);
  }
  [[nodiscard]] std::size_t significant_count() const;
};

/// Quantile bins 0..q-1 by rank (stable in value, then row). Equal values
/// share the bin of the first of them.
std::vector<std::uint32_t> quantile_bins(std::span<const double> values, std::size_t q);

/// Dataset for one network target: `target` as Y (kept numeric if numeric),
/// numeric inputs discretized into q bins, categorical columns as they are.
Dataset target_dataset(const Table& table, std::size_t context, std::size_t target, std::size_t q_bins);

/// Runs the contextual analysis with each non-context column as the target
/// in turn. Target i uses rng.derive("target", i). Returns one matrix per
/// context value.
std::vector<InteractionMatrix> pairwise_analysis(const Table& table, std::size_t context,
                                                 const PairwiseOptions& options, const RngSpec& rng);
InteractionMatrix pairwise_analysis(const Table& table, std::size_t context, std::uint32_t context_value,
                                    const PairwiseOptions& options, const RngSpec& rng);

/// Two-forest variant scoring Imp - Imp(.|X_c=c), with the absolute
/// difference as the permutation statistic.
std::vector<InteractionMatrix> baseline_pairwise(const Table& table, std::size_t context,
                                                 const PairwiseOptions& options, const RngSpec& rng);
InteractionMatrix baseline_pairwise(const Table& table, std::size_t context, std::uint32_t context_value,
                                    const PairwiseOptions& options, const RngSpec& rng);

enum class MatrixField { abs, signed_score, p_value, significant };
/// Square TSV with a "target\input" corner cell; diagonal printed as NA.
std::string format_matrix(const InteractionMatrix& matrix, MatrixField field);
/// Long format: one line per off-diagonal cell.
std::string format_cells_long(const InteractionMatrix& matrix);

}  // namespace ctximp
