#include "ctximp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp::oracle {

// ---------------------------------------------------------------------------
// JointDistribution

namespace {

void check_guards(const std::vector<std::string>& names, std::span<const std::uint32_t> arities,
                  std::size_t n_inputs) {
  if (n_inputs > kMaxInputs) {
    throw GuardError(fmt::format("{} inputs exceed the {}-input enumeration guard", n_inputs, kMaxInputs));
  }
  std::uint64_t cells = 1;
  for (std::size_t i = 0; i < arities.size(); ++i) {
    if (arities[i] == 0) throw DataError(fmt::format("variable '{}' has arity 0", names[i]));
    cells *= arities[i];
    if (cells > kMaxCells) {
      throw GuardError(fmt::format("arity product exceeds the 2^24 cell guard at variable '{}'", names[i]));
    }
  }
}

}  // namespace

JointDistribution::JointDistribution(std::vector<std::string> names, std::vector<std::uint32_t> arities,
                                     std::size_t n_inputs, bool has_context,
                                     const std::vector<std::pair<std::vector<std::uint32_t>, double>>& points,
                                     double sum_tolerance)
    : names_(std::move(names)), arities_(std::move(arities)), n_inputs_(n_inputs), has_context_(has_context) {
  const std::size_t n_vars = n_inputs_ + 1 + (has_context_ ? 1 : 0);
  if (names_.size() != n_vars || arities_.size() != n_vars) {
    throw DataError(fmt::format("distribution needs {} variable names and arities", n_vars));
  }
  if (n_inputs_ == 0) throw DataError("distribution has no inputs");
  check_guards(names_, arities_, n_inputs_);
  std::map<std::vector<std::uint32_t>, double> merged;
  double total = 0.0;
  for (const auto& [assignment, p] : points) {
    if (assignment.size() != n_vars) throw DataError("support point has the wrong number of values");
    for (std::size_t i = 0; i < n_vars; ++i) {
      if (assignment[i] >= arities_[i]) {
        throw DataError(fmt::format("value {} out of range for '{}'", assignment[i], names_[i]));
      }
    }
    if (!(p >= 0.0) || !std::isfinite(p)) throw DataError("probabilities must be finite and nonnegative");
    total += p;
    if (p > 0.0) merged[assignment] += p;
  }
  if (std::abs(total - 1.0) > sum_tolerance) {
    throw DataError(fmt::format("probabilities sum to {:.17g}, not 1", total));
  }
  for (const auto& [assignment, p] : merged) {
    values_.insert(values_.end(), assignment.begin(), assignment.end());
    probs_.push_back(p);
  }
}

std::size_t JointDistribution::context() const {
  if (!has_context_) throw DataError("distribution has no context variable");
  return n_inputs_ + 1;
}

double JointDistribution::probability_of(std::span<const std::uint32_t> assignment) const {
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (std::equal(assignment.begin(), assignment.end(), point(i).begin(), point(i).end())) return probs_[i];
  }
  return 0.0;
}

double JointDistribution::context_probability(std::uint32_t value) const {
  const auto c = context();
  double p = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (point(i)[c] == value) p += probs_[i];
  }
  return p;
}

JointDistribution JointDistribution::condition_on_context(std::uint32_t value) const {
  const auto c = context();
  const double pc = context_probability(value);
  if (pc <= 0.0) throw DataError(fmt::format("context value {} has probability zero", value));
  std::vector<std::pair<std::vector<std::uint32_t>, double>> points;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const auto pt = point(i);
    if (pt[c] != value) continue;
    points.emplace_back(std::vector<std::uint32_t>(pt.begin(), pt.begin() + static_cast<std::ptrdiff_t>(c)),
                        probs_[i] / pc);
  }
  std::vector<std::string> names(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(c));
  std::vector<std::uint32_t> arities(arities_.begin(), arities_.begin() + static_cast<std::ptrdiff_t>(c));
  return JointDistribution(std::move(names), std::move(arities), n_inputs_, false, points, 1e-9);
}

JointDistribution from_dataset(const Dataset& dataset) {
  const auto inputs = dataset.input_columns();
  std::vector<std::size_t> order = inputs;
  order.push_back(dataset.target());
  if (dataset.context()) order.push_back(*dataset.context());
  std::vector<std::string> names;
  std::vector<std::uint32_t> arities;
  for (const auto index : order) {
    const Column& column = dataset.column(index);
    if (!column.is_categorical()) {
      throw DataError(fmt::format("exact evaluation needs categorical columns; '{}' is numeric", column.name));
    }
    names.push_back(column.name);
    arities.push_back(static_cast<std::uint32_t>(column.arity()));
  }
  check_guards(names, arities, inputs.size());
  std::map<std::vector<std::uint32_t>, std::size_t> counts;
  std::vector<std::uint32_t> assignment(order.size());
  for (std::size_t row = 0; row < dataset.n_samples(); ++row) {
    for (std::size_t v = 0; v < order.size(); ++v) assignment[v] = dataset.column(order[v]).codes[row];
    ++counts[assignment];
  }
  std::vector<std::pair<std::vector<std::uint32_t>, double>> points;
  const double n = static_cast<double>(dataset.n_samples());
  for (const auto& [point, count] : counts) points.emplace_back(point, static_cast<double>(count) / n);
  return JointDistribution(std::move(names), std::move(arities), inputs.size(), dataset.context().has_value(),
                           points, 1e-9);
}

// ---------------------------------------------------------------------------
// Information helpers

namespace {

double entropy_of(std::span<const double> weights, double total) {
  double h = 0.0;
  for (const auto w : weights) {
    if (w <= 0.0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return h;
}

/// I(Y;A) for an unnormalized table laid out [a][y].
double mi_from_table(std::span<const double> table, std::size_t n_a, std::size_t n_y) {
  double total = 0.0;
  for (const auto w : table) total += w;
  if (total <= 0.0) return 0.0;
  std::vector<double> y_marginal(n_y, 0.0);
  double conditional = 0.0;
  for (std::size_t a = 0; a < n_a; ++a) {
    const auto row = table.subspan(a * n_y, n_y);
    double row_total = 0.0;
    for (std::size_t y = 0; y < n_y; ++y) {
      row_total += row[y];
      y_marginal[y] += row[y];
    }
    if (row_total > 0.0) conditional += row_total / total * entropy_of(row, row_total);
  }
  return std::max(0.0, entropy_of(y_marginal, total) - conditional);
}

/// Per-assignment statistics of one conditioning set B for variable A.
struct Slice {
  std::uint64_t b_index = 0;
  double p = 0.0;                     // P(B=b)
  double info = 0.0;                  // I(Y;A|B=b)
  std::vector<double> p_context;      // P(B=b, X_c=c)
  std::vector<double> info_context;   // I(Y;A|B=b,X_c=c), 0 for empty slices
};

std::vector<Slice> slices(const JointDistribution& dist, std::size_t a, std::span<const std::size_t> given,
                          bool split_context) {
  const std::size_t n_a = dist.arity(a);
  const std::size_t n_y = dist.arity(dist.target());
  const std::size_t n_c = split_context ? dist.arity(dist.context()) : 1;
  std::uint64_t n_b = 1;
  for (const auto v : given) n_b *= dist.arity(v);
  const std::size_t cell = n_a * n_y;
  std::vector<double> table(static_cast<std::size_t>(n_b) * n_c * cell, 0.0);
  const std::size_t c_var = split_context ? dist.context() : 0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const auto pt = dist.point(i);
    std::uint64_t b = 0;
    for (auto it = given.rbegin(); it != given.rend(); ++it) b = b * dist.arity(*it) + pt[*it];
    const std::size_t c = split_context ? pt[c_var] : 0;
    table[(static_cast<std::size_t>(b) * n_c + c) * cell + pt[a] * n_y + pt[dist.target()]] += dist.probability(i);
  }
  std::vector<Slice> out;
  std::vector<double> merged(cell);
  for (std::uint64_t b = 0; b < n_b; ++b) {
    std::fill(merged.begin(), merged.end(), 0.0);
    Slice slice;
    slice.b_index = b;
    slice.p_context.assign(n_c, 0.0);
    slice.info_context.assign(n_c, 0.0);
    for (std::size_t c = 0; c < n_c; ++c) {
      const auto part = std::span<const double>(table).subspan((static_cast<std::size_t>(b) * n_c + c) * cell, cell);
      double pc = 0.0;
      for (std::size_t k = 0; k < cell; ++k) {
        pc += part[k];
        merged[k] += part[k];
      }
      slice.p_context[c] = pc;
      if (pc > 0.0) slice.info_context[c] = mi_from_table(part, n_a, n_y);
    }
    for (const auto pc : slice.p_context) slice.p += pc;
    if (slice.p <= 0.0) continue;
    slice.info = mi_from_table(merged, n_a, n_y);
    out.push_back(std::move(slice));
  }
  return out;
}

void check_input(const JointDistribution& dist, std::size_t m) {
  if (m >= dist.n_inputs()) throw DataError(fmt::format("input index {} out of range", m));
  if (dist.n_inputs() > kMaxInputs) {
    throw GuardError(fmt::format("{} inputs exceed the enumeration guard of {}", dist.n_inputs(), kMaxInputs));
  }
}

/// Calls fn(k, B) for every subset B of the inputs other than m.
void for_each_subset(const JointDistribution& dist, std::size_t m,
                     const std::function<void(std::size_t, std::span<const std::size_t>)>& fn) {
  check_input(dist, m);
  std::vector<std::size_t> others;
  for (std::size_t v = 0; v < dist.n_inputs(); ++v) {
    if (v != m) others.push_back(v);
  }
  std::vector<std::size_t> subset;
  const std::uint64_t n_masks = std::uint64_t{1} << others.size();
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    subset.clear();
    for (std::size_t j = 0; j < others.size(); ++j) {
      if (mask & (std::uint64_t{1} << j)) subset.push_back(others[j]);
    }
    fn(subset.size(), subset);
  }
}

std::string describe(const JointDistribution& dist, std::span<const std::size_t> given, std::uint64_t b_index) {
  if (given.empty()) return "B={}";
  std::string out = "B={";
  for (std::size_t i = 0; i < given.size(); ++i) {
    const auto a = dist.arity(given[i]);
    out += fmt::format("{}{}={}", i ? "," : "", dist.names()[given[i]], b_index % a);
    b_index /= a;
  }
  return out + "}";
}

}  // namespace

std::optional<double> cond_mi(const JointDistribution& dist, std::size_t m, const Assignment& b,
                              std::optional<std::uint32_t> context_value) {
  if (m >= dist.n_inputs()) throw DataError(fmt::format("input index {} out of range", m));
  for (const auto& [variable, value] : b) {
    if (variable >= dist.n_inputs() || variable == m) throw DataError("conditioning variable must be another input");
    if (value >= dist.arity(variable)) throw DataError("conditioning value out of range");
  }
  const std::size_t n_m = dist.arity(m);
  const std::size_t n_y = dist.arity(dist.target());
  std::vector<double> joint(n_m * n_y, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const auto pt = dist.point(i);
    const bool match = std::all_of(b.begin(), b.end(), [&](const auto& kv) { return pt[kv.first] == kv.second; }) &&
                       (!context_value || pt[dist.context()] == *context_value);
    if (!match) continue;
    joint[pt[m] * n_y + pt[dist.target()]] += dist.probability(i);
    total += dist.probability(i);
  }
  if (total <= 0.0) return std::nullopt;
  // sum p(x,y) log p(x,y) / (p(x) p(y))
  std::vector<double> px(n_m, 0.0), py(n_y, 0.0);
  for (std::size_t x = 0; x < n_m; ++x) {
    for (std::size_t y = 0; y < n_y; ++y) {
      px[x] += joint[x * n_y + y] / total;
      py[y] += joint[x * n_y + y] / total;
    }
  }
  double info = 0.0;
  for (std::size_t x = 0; x < n_m; ++x) {
    for (std::size_t y = 0; y < n_y; ++y) {
      const double pxy = joint[x * n_y + y] / total;
      if (pxy > 0.0) info += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  }
  return std::max(0.0, info);
}

double joint_mutual_information(const JointDistribution& dist) {
  const std::size_t n_y = dist.arity(dist.target());
  std::map<std::vector<std::uint32_t>, std::vector<double>> by_inputs;
  std::vector<double> y_marginal(n_y, 0.0);
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const auto pt = dist.point(i);
    std::vector<std::uint32_t> key(pt.begin(), pt.begin() + static_cast<std::ptrdiff_t>(dist.n_inputs()));
    auto& row = by_inputs[key];
    row.resize(n_y, 0.0);
    row[pt[dist.target()]] += dist.probability(i);
    y_marginal[pt[dist.target()]] += dist.probability(i);
  }
  double conditional = 0.0;
  for (const auto& [key, row] : by_inputs) {
    double total = 0.0;
    for (const auto w : row) total += w;
    conditional += total * entropy_of(row, total);
  }
  return entropy_of(y_marginal, 1.0) - conditional;
}

double subset_weight(std::size_t p, std::size_t k) {
  if (k >= p) throw DataError("subset size must be below the number of inputs");
  // C(p,k) computed in floating point; exact for the guarded range.
  double binom = 1.0;
  for (std::size_t i = 1; i <= k; ++i) binom = binom * static_cast<double>(p - k + i) / static_cast<double>(i);
  return 1.0 / (binom * static_cast<double>(p - k));
}

double asymptotic_mdi(const JointDistribution& dist, std::size_t m) {
  const std::size_t p = dist.n_inputs();
  double total = 0.0;
  for_each_subset(dist, m, [&](std::size_t k, std::span<const std::size_t> given) {
    double info = 0.0;
    for (const auto& s : slices(dist, m, given, false)) info += s.p * s.info;
    total += subset_weight(p, k) * info;
  });
  return total;
}

ContextualScores asymptotic_contextual(const JointDistribution& dist, std::size_t m, std::uint32_t context_value) {
  const auto c_var = dist.context();
  if (context_value >= dist.arity(c_var)) throw DataError(fmt::format("context value {} out of range", context_value));
  const double pc = dist.context_probability(context_value);
  if (pc <= 0.0) throw DataError(fmt::format("context value {} has probability zero", context_value));

  const std::size_t p = dist.n_inputs();
  ContextualScores out;
  for_each_subset(dist, m, [&](std::size_t k, std::span<const std::size_t> given) {
    const double w = subset_weight(p, k);
    double signed_sum = 0.0, abs_sum = 0.0, unconditioned = 0.0, in_context = 0.0, global = 0.0;
    for (const auto& s : slices(dist, m, given, true)) {
      const double conditioned = s.info_context[context_value];  // 0 when P(b,c)=0
      signed_sum += s.p * (s.info - conditioned);
      abs_sum += s.p * std::abs(s.info - conditioned);
      unconditioned += s.p * s.info;
      in_context += s.p_context[context_value] / pc * conditioned;
      double averaged = 0.0;
      for (std::size_t c = 0; c < s.p_context.size(); ++c) averaged += s.p_context[c] / s.p * s.info_context[c];
      global += s.p * (s.info - averaged);
    }
    out.signed_score += w * signed_sum;
    out.abs += w * abs_sum;
    out.difference += w * (unconditioned - in_context);
    out.global_context += w * global;
  });
  out.baseline = asymptotic_mdi(dist.condition_on_context(context_value), m);
  return out;
}

bool is_relevant(const JointDistribution& dist, std::size_t m) {
  bool relevant = false;
  for_each_subset(dist, m, [&](std::size_t, std::span<const std::size_t> given) {
    if (relevant) return;
    double info = 0.0;
    for (const auto& s : slices(dist, m, given, false)) info += s.p * s.info;
    relevant = info > kInfoTolerance;
  });
  return relevant;
}

Condition condition_from_number(int number) {
  switch (number) {
    case 1: return Condition::definition;
    case 3: return Condition::pairwise;
    case 4: return Condition::marginal_b;
    case 5: return Condition::averaged_context;
    case 6: return Condition::averaged_both;
    default: throw ConfigError(fmt::format("unknown context-dependence condition {} (expected 1, 3, 4, 5 or 6)", number));
  }
}

bool is_context_dependent(const JointDistribution& dist, std::size_t m, Condition condition) {
  const auto c_var = dist.context();
  const std::size_t n_c = dist.arity(c_var);
  std::vector<double> pc(n_c);
  for (std::uint32_t c = 0; c < n_c; ++c) pc[c] = dist.context_probability(c);
  const auto differ = [](double a, double b) { return std::abs(a - b) > kInfoTolerance; };

  bool found = false;
  for_each_subset(dist, m, [&](std::size_t, std::span<const std::size_t> given) {
    if (found) return;
    const auto all = slices(dist, m, given, true);
    switch (condition) {
      case Condition::definition:
        for (const auto& s : all) {
          for (std::size_t c = 0; c < n_c; ++c) {
            if (s.p_context[c] > 0.0 && differ(s.info_context[c], s.info)) found = true;
          }
        }
        break;
      case Condition::pairwise:
        for (const auto& s : all) {
          for (std::size_t c1 = 0; c1 < n_c; ++c1) {
            for (std::size_t c2 = c1 + 1; c2 < n_c; ++c2) {
              if (s.p_context[c1] > 0.0 && s.p_context[c2] > 0.0 && differ(s.info_context[c1], s.info_context[c2])) {
                found = true;
              }
            }
          }
        }
        break;
      case Condition::marginal_b: {
        double unconditioned = 0.0;
        for (const auto& s : all) unconditioned += s.p * s.info;
        for (std::size_t c = 0; c < n_c; ++c) {
          if (pc[c] <= 0.0) continue;
          double in_context = 0.0;
          for (const auto& s : all) in_context += s.p_context[c] / pc[c] * s.info_context[c];
          if (differ(in_context, unconditioned)) found = true;
        }
        break;
      }
      case Condition::averaged_context:
        for (const auto& s : all) {
          double averaged = 0.0;
          for (std::size_t c = 0; c < n_c; ++c) averaged += s.p_context[c] / s.p * s.info_context[c];
          if (differ(averaged, s.info)) found = true;
        }
        break;
      case Condition::averaged_both: {
        double unconditioned = 0.0, averaged = 0.0;
        for (const auto& s : all) {
          unconditioned += s.p * s.info;
          for (std::size_t c = 0; c < n_c; ++c) averaged += s.p_context[c] * s.info_context[c];
        }
        if (differ(averaged, unconditioned)) found = true;
        break;
      }
    }
  });
  return found;
}

std::string_view to_string(ExactLabel label) {
  switch (label) {
    case ExactLabel::independent: return "context-independent";
    case ExactLabel::complementary: return "context-complementary";
    case ExactLabel::redundant: return "context-redundant";
    case ExactLabel::mixed: return "mixed";
  }
  return "?";
}

ExactLabel characterize_exact(const JointDistribution& dist, std::size_t m, std::uint32_t context_value) {
  if (context_value >= dist.arity(dist.context())) throw DataError("context value out of range");
  bool increases = false, decreases = false;
  for_each_subset(dist, m, [&](std::size_t, std::span<const std::size_t> given) {
    for (const auto& s : slices(dist, m, given, true)) {
      if (s.p_context[context_value] <= 0.0) continue;
      const double diff = s.info_context[context_value] - s.info;
      if (diff > kInfoTolerance) increases = true;
      if (diff < -kInfoTolerance) decreases = true;
    }
  });
  if (increases && decreases) return ExactLabel::mixed;
  if (increases) return ExactLabel::complementary;
  if (decreases) return ExactLabel::redundant;
  return ExactLabel::independent;
}

bool context_is_relevant(const JointDistribution& dist) {
  const auto c_var = dist.context();
  if (dist.n_inputs() > kMaxInputs) throw GuardError("too many inputs for exact enumeration");
  const std::uint64_t n_masks = std::uint64_t{1} << dist.n_inputs();
  std::vector<std::size_t> given;
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    given.clear();
    for (std::size_t j = 0; j < dist.n_inputs(); ++j) {
      if (mask & (std::uint64_t{1} << j)) given.push_back(j);
    }
    double info = 0.0;
    for (const auto& s : slices(dist, c_var, given, false)) info += s.p * s.info;
    if (info > kInfoTolerance) return true;
  }
  return false;
}

TheoremReport verify_theorems(const JointDistribution& dist) {
  const auto c_var = dist.context();
  const std::size_t n_c = dist.arity(c_var);
  TheoremReport report;

  std::vector<bool> dependent(dist.n_inputs());
  for (std::size_t m = 0; m < dist.n_inputs(); ++m) dependent[m] = is_context_dependent(dist, m);

  // Irrelevant context <=> every input context-independent and I(Y;X_c) = 0.
  {
    double marginal = 0.0;
    for (const auto& s : slices(dist, c_var, {}, false)) marginal += s.p * s.info;
    const bool irrelevant = !context_is_relevant(dist);
    const bool none_dependent = std::none_of(dependent.begin(), dependent.end(), [](bool d) { return d; });
    const bool rhs = none_dependent && marginal <= kInfoTolerance;
    if (irrelevant != rhs) {
      report.irrelevant_context.passed = false;
      report.irrelevant_context.witnesses.push_back(
          fmt::format("context irrelevant={} but all-independent={} and I(Y;X_c)={:.3g}", irrelevant,
                      none_dependent, marginal));
    }
  }

  for (std::size_t m = 0; m < dist.n_inputs(); ++m) {
    bool all_zero = true;
    for (std::uint32_t c = 0; c < n_c; ++c) {
      if (dist.context_probability(c) <= 0.0) continue;
      const auto scores = asymptotic_contextual(dist, m, c);
      if (scores.abs > kInfoTolerance) all_zero = false;

      // |signed| = abs on a dependent input fixes the characterization.
      if (dependent[m] && std::abs(std::abs(scores.signed_score) - scores.abs) <= kInfoTolerance &&
          std::abs(scores.signed_score) > kInfoTolerance) {
        const auto label = characterize_exact(dist, m, c);
        const auto expected = scores.signed_score < 0.0 ? ExactLabel::complementary : ExactLabel::redundant;
        if (label != expected) {
          report.sign_characterizes.passed = false;
          report.sign_characterizes.witnesses.push_back(
              fmt::format("{} at {}={}: signed={:.6g} abs={:.6g} but exact label {}", dist.names()[m],
                          dist.names()[c_var], c, scores.signed_score, scores.abs, to_string(label)));
        }
      }
    }
    if (dependent[m] == all_zero) {
      report.zero_abs.passed = false;
      // Locate the conditioning that makes m dependent, when there is one.
      std::string where;
      if (dependent[m]) {
        for_each_subset(dist, m, [&](std::size_t, std::span<const std::size_t> given) {
          if (!where.empty()) return;
          for (const auto& s : slices(dist, m, given, true)) {
            for (std::size_t c = 0; c < n_c; ++c) {
              if (s.p_context[c] > 0.0 && std::abs(s.info_context[c] - s.info) > kInfoTolerance && where.empty()) {
                where = fmt::format(" ({}, c={})", describe(dist, given, s.b_index), c);
              }
            }
          }
        });
      }
      report.zero_abs.witnesses.push_back(fmt::format("{}: dependent={} but abs all zero={}{}", dist.names()[m],
                                                      dependent[m], all_zero, where));
    }
  }
  return report;
}

JointDistribution random_distribution(std::span<const std::uint32_t> input_arities, std::uint32_t target_arity,
                                      std::uint32_t context_arity, Stream& rng, bool independent_context) {
  std::vector<std::string> names;
  std::vector<std::uint32_t> arities(input_arities.begin(), input_arities.end());
  for (std::size_t i = 0; i < input_arities.size(); ++i) names.push_back(fmt::format("X_{}", i + 1));
  names.emplace_back("Y");
  arities.push_back(target_arity);
  const bool has_context = context_arity > 0;
  if (has_context) {
    names.emplace_back("X_c");
    arities.push_back(context_arity);
  }
  check_guards(names, arities, input_arities.size());
  const auto dirichlet = [&](std::size_t n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
      x = -std::log1p(-uniform_unit(rng));
      total += x;
    }
    for (auto& x : w) x /= total;
    return w;
  };
  std::size_t n_body = 1;
  for (std::size_t i = 0; i <= input_arities.size(); ++i) n_body *= arities[i];

  std::vector<std::pair<std::vector<std::uint32_t>, double>> points;
  const auto body_point = [&](std::size_t index) {
    std::vector<std::uint32_t> pt;
    for (std::size_t i = 0; i <= input_arities.size(); ++i) {
      pt.push_back(static_cast<std::uint32_t>(index % arities[i]));
      index /= arities[i];
    }
    return pt;
  };
  if (!has_context) {
    const auto w = dirichlet(n_body);
    for (std::size_t i = 0; i < n_body; ++i) points.emplace_back(body_point(i), w[i]);
  } else if (independent_context) {
    const auto body = dirichlet(n_body);
    const auto ctx = dirichlet(context_arity);
    for (std::uint32_t c = 0; c < context_arity; ++c) {
      for (std::size_t i = 0; i < n_body; ++i) {
        auto pt = body_point(i);
        pt.push_back(c);
        points.emplace_back(std::move(pt), body[i] * ctx[c]);
      }
    }
  } else {
    const auto w = dirichlet(n_body * context_arity);
    for (std::uint32_t c = 0; c < context_arity; ++c) {
      for (std::size_t i = 0; i < n_body; ++i) {
        auto pt = body_point(i);
        pt.push_back(c);
        points.emplace_back(std::move(pt), w[c * n_body + i]);
      }
    }
  }
  return JointDistribution(std::move(names), std::move(arities), input_arities.size(), has_context, points, 1e-9);
}

// ---------------------------------------------------------------------------
// File format

JointDistribution read_distribution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw DataError("distribution file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto space = line.find(' ');
  if (space == std::string::npos) throw DataError("distribution header must end with 'context' or 'nocontext'");
  const std::string flag = line.substr(space + 1);
  if (flag != "context" && flag != "nocontext") throw DataError("distribution header must end with 'context' or 'nocontext'");
  const bool has_context = flag == "context";

  std::vector<std::string> names;
  std::vector<std::uint32_t> arities;
  std::stringstream header(line.substr(0, space));
  std::string token;
  while (std::getline(header, token, ',')) {
    const auto colon = token.rfind(':');
    if (colon == std::string::npos || colon == 0) throw DataError(fmt::format("bad header token '{}'", token));
    std::uint32_t arity = 0;
    const auto text = std::string_view(token).substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), arity);
    if (ec != std::errc{} || ptr != text.data() + text.size() || arity == 0) {
      throw DataError(fmt::format("bad arity in '{}'", token));
    }
    names.push_back(token.substr(0, colon));
    arities.push_back(arity);
  }
  const std::size_t min_vars = has_context ? 3 : 2;
  if (names.size() < min_vars) throw DataError("distribution needs at least one input and a target");
  const std::size_t n_inputs = names.size() - (has_context ? 2 : 1);

  std::vector<std::pair<std::vector<std::uint32_t>, double>> points;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sep = line.find(' ');
    if (sep == std::string::npos) throw DataError(fmt::format("line {}: expected 'values probability'", line_number));
    std::vector<std::uint32_t> values;
    std::stringstream cells(line.substr(0, sep));
    while (std::getline(cells, token, ',')) {
      std::uint32_t v = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DataError(fmt::format("line {}: bad value '{}'", line_number, token));
      }
      values.push_back(v);
    }
    const std::string prob_text = line.substr(sep + 1);
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(prob_text.data(), prob_text.data() + prob_text.size(), p);
    if (ec != std::errc{} || ptr != prob_text.data() + prob_text.size()) {
      throw DataError(fmt::format("line {}: bad probability '{}'", line_number, prob_text));
    }
    points.emplace_back(std::move(values), p);
  }
  return JointDistribution(std::move(names), std::move(arities), n_inputs, has_context, points, 1e-9);
}

std::string format_distribution(const JointDistribution& dist) {
  std::string out;
  for (std::size_t v = 0; v < dist.n_variables(); ++v) {
    out += fmt::format("{}{}:{}", v ? "," : "", dist.names()[v], dist.arity(v));
  }
  out += dist.has_context() ? " context\n" : " nocontext\n";
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    const auto pt = dist.point(i);
    for (std::size_t v = 0; v < pt.size(); ++v) out += fmt::format("{}{}", v ? "," : "", pt[v]);
    out += fmt::format(" {:.17g}\n", dist.probability(i));
  }
  return out;
}

}  // namespace ctximp::oracle
