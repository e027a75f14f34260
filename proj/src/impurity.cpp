#include "ctximp/impurity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp {

namespace {

constexpr double kPureVariance = 1e-12;

// 0 log 0 := 0
double entropy_of_counts(std::span<const std::uint32_t> counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double variance_of(const std::vector<double>& values, RowSpan rows) {
  if (rows.empty()) return 0.0;
  double mean = 0.0;
  for (const auto r : rows) mean += values[r];
  mean /= static_cast<double>(rows.size());
  double ss = 0.0;
  for (const auto r : rows) {
    const double d = values[r] - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(rows.size());
}

double entropy_decrease(const Dataset& dataset, RowSpan rows, const Column& split) {
  const Column& target = dataset.target_column();
  const std::size_t n_classes = target.arity();
  const std::size_t n_values = split.arity();
  thread_local std::vector<std::uint32_t> joint;
  thread_local std::vector<std::uint32_t> marginal;
  thread_local std::vector<std::uint32_t> child_size;
  joint.assign(n_classes * n_values, 0);
  marginal.assign(n_classes, 0);
  child_size.assign(n_values, 0);
  for (const auto r : rows) {
    const auto y = target.codes[r];
    const auto x = split.codes[r];
    ++joint[x * n_classes + y];
    ++marginal[y];
    ++child_size[x];
  }
  const double n = static_cast<double>(rows.size());
  double children = 0.0;
  for (std::size_t x = 0; x < n_values; ++x) {
    if (child_size[x] == 0) continue;
    children += static_cast<double>(child_size[x]) / n *
                entropy_of_counts(std::span(joint).subspan(x * n_classes, n_classes), child_size[x]);
  }
  return entropy_of_counts(marginal, rows.size()) - children;
}

double variance_decrease(const Dataset& dataset, RowSpan rows, const Column& split) {
  const auto& values = dataset.target_column().values;
  const std::size_t n_values = split.arity();
  thread_local std::vector<std::vector<std::uint32_t>> groups;
  groups.resize(std::max(groups.size(), n_values));
  for (std::size_t x = 0; x < n_values; ++x) groups[x].clear();
  for (const auto r : rows) groups[split.codes[r]].push_back(r);
  const double n = static_cast<double>(rows.size());
  double children = 0.0;
  for (std::size_t x = 0; x < n_values; ++x) {
    if (groups[x].empty()) continue;
    children += static_cast<double>(groups[x].size()) / n * variance_of(values, groups[x]);
  }
  return variance_of(values, rows) - children;
}

}  // namespace

std::string_view to_string(ImpurityKind kind) {
  return kind == ImpurityKind::entropy ? "entropy" : "variance";
}

ImpurityKind parse_impurity(std::string_view text) {
  if (text == "entropy") return ImpurityKind::entropy;
  if (text == "variance") return ImpurityKind::variance;
  throw ConfigError(fmt::format("unknown impurity '{}' (expected entropy or variance)", text));
}

ImpurityKind default_impurity(const Dataset& dataset) {
  return dataset.target_kind() == ColumnKind::categorical ? ImpurityKind::entropy : ImpurityKind::variance;
}

void check_impurity(const Dataset& dataset, ImpurityKind kind) {
  if (kind != default_impurity(dataset)) {
    throw DataError(fmt::format("{} impurity needs a {} target, '{}' is {}", to_string(kind),
                                kind == ImpurityKind::entropy ? "categorical" : "numeric",
                                dataset.target_column().name, to_string(dataset.target_kind())));
  }
}

SampleSubset::SampleSubset(std::vector<std::uint32_t> rows, std::size_t n_samples) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i] >= n_samples) throw DataError(fmt::format("row {} out of range", rows_[i]));
    if (i > 0 && rows_[i] <= rows_[i - 1]) throw DataError("subset rows must be strictly increasing");
  }
}

SampleSubset SampleSubset::all(std::size_t n_samples) {
  std::vector<std::uint32_t> rows(n_samples);
  std::iota(rows.begin(), rows.end(), 0U);
  return SampleSubset(std::move(rows), n_samples);
}

double impurity(const Dataset& dataset, RowSpan rows, ImpurityKind kind) {
  check_impurity(dataset, kind);
  if (kind == ImpurityKind::variance) return variance_of(dataset.target_column().values, rows);
  std::vector<std::uint32_t> counts(dataset.target_column().arity(), 0);
  for (const auto r : rows) ++counts[dataset.target_column().codes[r]];
  return entropy_of_counts(counts, rows.size());
}

double impurity_decrease(const Dataset& dataset, RowSpan rows, std::size_t variable, ImpurityKind kind) {
  check_impurity(dataset, kind);
  if (rows.empty()) throw DataError("impurity decrease of an empty subset");
  if (variable == dataset.target()) throw DataError("cannot split on the target column");
  const Column& split = dataset.column(variable);
  if (!split.is_categorical()) throw DataError(fmt::format("split column '{}' is not categorical", split.name));
  const double g = kind == ImpurityKind::entropy ? entropy_decrease(dataset, rows, split)
                                                 : variance_decrease(dataset, rows, split);
  return std::max(0.0, g);
}

double ContextSplit::averaged_context_decrease() const {
  double total = 0.0;
  for (std::size_t c = 0; c < context_weight.size(); ++c) total += context_weight[c] * context_decrease[c];
  return total;
}

ContextSplit context_split(const Dataset& dataset, RowSpan rows, std::size_t variable, ImpurityKind kind) {
  const Column& context = dataset.context_column();
  ContextSplit out;
  out.decrease = impurity_decrease(dataset, rows, variable, kind);
  const std::size_t n_contexts = context.arity();
  out.context_weight.assign(n_contexts, 0.0);
  out.context_decrease.assign(n_contexts, 0.0);
  thread_local std::vector<std::vector<std::uint32_t>> slices;
  slices.resize(std::max(slices.size(), n_contexts));
  for (std::size_t c = 0; c < n_contexts; ++c) slices[c].clear();
  for (const auto r : rows) slices[context.codes[r]].push_back(r);
  const double n = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < n_contexts; ++c) {
    if (slices[c].empty()) continue;
    out.context_weight[c] = static_cast<double>(slices[c].size()) / n;
    // Copy: impurity_decrease may reuse thread-local scratch of its own.
    const std::vector<std::uint32_t> slice = slices[c];
    out.context_decrease[c] = impurity_decrease(dataset, slice, variable, kind);
  }
  return out;
}

double conditional_impurity_decrease(const Dataset& dataset, RowSpan rows, std::size_t variable,
                                     std::optional<std::uint32_t> context_value, ImpurityKind kind) {
  if (!dataset.context()) throw DataError("no context column designated");
  if (rows.empty()) throw DataError("conditional impurity decrease of an empty subset");
  if (context_value && *context_value >= dataset.context_arity()) {
    throw DataError(fmt::format("context value {} out of range", *context_value));
  }
  const auto split = context_split(dataset, rows, variable, kind);
  if (context_value) return split.context_decrease[*context_value];
  return split.averaged_context_decrease();
}

bool is_pure(const Dataset& dataset, RowSpan rows) {
  if (rows.size() <= 1) return true;
  const Column& target = dataset.target_column();
  if (target.is_categorical()) {
    const auto first = target.codes[rows.front()];
    return std::all_of(rows.begin(), rows.end(), [&](auto r) { return target.codes[r] == first; });
  }
  return variance_of(target.values, rows) <= kPureVariance;
}

}  // namespace ctximp
