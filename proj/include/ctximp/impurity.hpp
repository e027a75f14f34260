#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ctximp/dataset.hpp"

namespace ctximp {

enum class ImpurityKind { entropy, variance };

std::string_view to_string(ImpurityKind kind);
/// "entropy" or "variance"; ConfigError otherwise.
ImpurityKind parse_impurity(std::string_view text);
/// Entropy for a categorical target, variance for a numeric one.
ImpurityKind default_impurity(const Dataset& dataset);
/// Throws DataError when `kind` does not fit the target column.
void check_impurity(const Dataset& dataset, ImpurityKind kind);

using RowSpan = std::span<const std::uint32_t>;

/// Strictly increasing row indices into a dataset. May be empty.
class SampleSubset {
 public:
  SampleSubset() = default;
  /// Validates ordering and bounds against `n_samples`.
  SampleSubset(std::vector<std::uint32_t> rows, std::size_t n_samples);
  static SampleSubset all(std::size_t n_samples);

  [[nodiscard]] RowSpan rows() const { return rows_; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] bool empty() const { return rows_.empty(); }
  operator RowSpan() const { return rows_; }  // NOLINT(google-explicit-constructor)

 private:
  std::vector<std::uint32_t> rows_;
};

/// Target impurity over `rows`: entropy in bits of the empirical class
/// distribution, or population (1/n) variance. Empty rows give 0.
double impurity(const Dataset& dataset, RowSpan rows, ImpurityKind kind);

/// G(Y;X|t) = i(t) - sum_x p(t_x) i(t_x) for the multiway split of `rows` on
/// categorical column `variable`. For entropy this is the plug-in mutual
/// information I(Y;X|t). Clamped at zero against rounding.
double impurity_decrease(const Dataset& dataset, RowSpan rows, std::size_t variable, ImpurityKind kind);

/// impurity_decrease restricted to rows with context code `context_value`
/// (0 when none match). Without a value, the context-averaged decrease
/// sum_c p(c|t) G(Y;X|t,X_c=c).
double conditional_impurity_decrease(const Dataset& dataset, RowSpan rows, std::size_t variable,
                                     std::optional<std::uint32_t> context_value, ImpurityKind kind);

/// Everything the contextual scores need at one split node.
struct ContextSplit {
  double decrease = 0.0;                 ///< G(Y;X|t)
  std::vector<double> context_weight;    ///< p(X_c=c | t)
  std::vector<double> context_decrease;  ///< G(Y;X|t,X_c=c), 0 for empty slices

  /// sum_c p(c|t) G(Y;X|t,X_c=c)
  [[nodiscard]] double averaged_context_decrease() const;
};

ContextSplit context_split(const Dataset& dataset, RowSpan rows, std::size_t variable, ImpurityKind kind);

/// True when the target takes a single value (numeric: variance <= 1e-12).
bool is_pure(const Dataset& dataset, RowSpan rows);

}  // namespace ctximp
