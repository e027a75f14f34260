#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctximp/dataset.hpp"
#include "ctximp/rng.hpp"

namespace ctximp::oracle {

/// Enumeration guards. Exact importances cost 2^(p-1) conditional mutual
/// informations per variable.
inline constexpr std::size_t kMaxInputs = 20;
inline constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 24;
/// Absolute tolerance for equality of information quantities.
inline constexpr double kInfoTolerance = 1e-12;

/// Exact probability table over inputs X_1..X_p, the target Y and an optional
/// context X_c, stored in that variable order. Only the support is kept.
class JointDistribution {
 public:
  JointDistribution() = default;
  /// `points` pairs full assignments (one code per variable) with their
  /// probabilities. Duplicate assignments are merged. Probabilities must be
  /// nonnegative and sum to 1 within `sum_tolerance`.
  JointDistribution(std::vector<std::string> names, std::vector<std::uint32_t> arities, std::size_t n_inputs,
                    bool has_context, const std::vector<std::pair<std::vector<std::uint32_t>, double>>& points,
                    double sum_tolerance = 1e-12);

  [[nodiscard]] std::size_t n_inputs() const { return n_inputs_; }
  [[nodiscard]] std::size_t n_variables() const { return names_.size(); }
  [[nodiscard]] std::size_t target() const { return n_inputs_; }
  [[nodiscard]] bool has_context() const { return has_context_; }
  /// Throws DataError if there is no context.
  [[nodiscard]] std::size_t context() const;
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] const std::vector<std::uint32_t>& arities() const { return arities_; }
  [[nodiscard]] std::uint32_t arity(std::size_t variable) const { return arities_.at(variable); }

  [[nodiscard]] std::size_t support_size() const { return probs_.size(); }
  [[nodiscard]] std::span<const std::uint32_t> point(std::size_t i) const {
    return std::span<const std::uint32_t>(values_).subspan(i * names_.size(), names_.size());
  }
  [[nodiscard]] double probability(std::size_t i) const { return probs_.at(i); }
  /// Probability of a full assignment (0 outside the support).
  [[nodiscard]] double probability_of(std::span<const std::uint32_t> assignment) const;
  [[nodiscard]] double context_probability(std::uint32_t value) const;

  /// Distribution of (inputs, Y) given X_c = value.
  [[nodiscard]] JointDistribution condition_on_context(std::uint32_t value) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::uint32_t> arities_;
  std::size_t n_inputs_ = 0;
  bool has_context_ = false;
  std::vector<std::uint32_t> values_;  // support points, row-major
  std::vector<double> probs_;
};

/// Plug-in distribution of a categorical dataset: inputs in table order, then
/// target, then context.
JointDistribution from_dataset(const Dataset& dataset);

/// Partial assignment B=b as (input index, code) pairs.
using Assignment = std::vector<std::pair<std::size_t, std::uint32_t>>;

/// I(Y;X_m | B=b [, X_c=c]) in bits. Empty optional when the conditioning
/// event has probability zero.
std::optional<double> cond_mi(const JointDistribution& dist, std::size_t m, const Assignment& b,
                              std::optional<std::uint32_t> context_value = std::nullopt);

/// I(Y; X_1..X_p) computed directly from the joint.
double joint_mutual_information(const JointDistribution& dist);

/// 1 / (C(p,k) (p-k)), the weight of one conditioning subset of size k.
double subset_weight(std::size_t p, std::size_t k);

/// Asymptotic MDI of input m: sum over B of weight(|B|) I(Y;X_m|B).
double asymptotic_mdi(const JointDistribution& dist, std::size_t m);

/// Exact limits of the contextual scores for input m and context value c.
struct ContextualScores {
  /// Limit of the node-level signed score:
  /// sum_B w sum_b P(b) (I(Y;X_m|b) - I(Y;X_m|b,c)), empty slices counting as 0.
  double signed_score = 0.0;
  /// Same with absolute differences.
  double abs = 0.0;
  /// Imp(X_m | X_c=c): asymptotic MDI of the conditioned distribution.
  double baseline = 0.0;
  /// Two-forest difference sum_B w (I(Y;X_m|B) - I(Y;X_m|B,X_c=c)), which
  /// equals Imp(X_m) - baseline.
  double difference = 0.0;
  /// sum_B w (I(Y;X_m|B) - I(Y;X_m|B,X_c)), independent of c.
  double global_context = 0.0;
};

ContextualScores asymptotic_contextual(const JointDistribution& dist, std::size_t m, std::uint32_t context_value);

/// True iff I(Y;X_m|B) > tolerance for some B.
bool is_relevant(const JointDistribution& dist, std::size_t m);

/// Context-dependence tests. `definition` is the general condition; the
/// other four are the stricter alternatives, in order:
///   pairwise:        exists B,b,c1,c2 with I(.|c1,b) != I(.|c2,b)
///   marginal_b:      exists B,c with I(Y;X_m|X_c=c,B) != I(Y;X_m|B)
///   averaged_context exists B,b with I(Y;X_m|X_c,B=b) != I(Y;X_m|B=b)
///   averaged_both    exists B with I(Y;X_m|X_c,B) != I(Y;X_m|B)
enum class Condition { definition = 1, pairwise = 3, marginal_b = 4, averaged_context = 5, averaged_both = 6 };

/// Maps 1,3,4,5,6 to a Condition; ConfigError otherwise.
Condition condition_from_number(int number);
bool is_context_dependent(const JointDistribution& dist, std::size_t m, Condition condition = Condition::definition);

enum class ExactLabel { independent, complementary, redundant, mixed };
std::string_view to_string(ExactLabel label);

/// Sign audit of I(Y;X_m|B=b,X_c=c) - I(Y;X_m|B=b) over every (B,b) with
/// P(b,c) > 0.
ExactLabel characterize_exact(const JointDistribution& dist, std::size_t m, std::uint32_t context_value);

struct TheoremCheck {
  bool passed = true;
  std::vector<std::string> witnesses;
};

struct TheoremReport {
  TheoremCheck irrelevant_context;    ///< X_c irrelevant <=> all independent and I(Y;X_c)=0
  TheoremCheck zero_abs;              ///< independent <=> abs = 0 for all c
  TheoremCheck sign_characterizes;    ///< |signed| = abs => label follows the sign
  [[nodiscard]] bool all_passed() const {
    return irrelevant_context.passed && zero_abs.passed && sign_characterizes.passed;
  }
};

TheoremReport verify_theorems(const JointDistribution& dist);

/// I(Y;X_c|B) > tolerance for some B subset of the inputs.
bool context_is_relevant(const JointDistribution& dist);

/// Full support over the given arities with probabilities drawn from the flat
/// Dirichlet. With `independent_context`, X_c is drawn independently of
/// (inputs, Y).
JointDistribution random_distribution(std::span<const std::uint32_t> input_arities, std::uint32_t target_arity,
                                      std::uint32_t context_arity, Stream& rng, bool independent_context = false);

/// Text format. First line: comma-separated name:arity for the inputs, the
/// target and the optional context, followed by a space and "context" or
/// "nocontext". Then one line per support point: "v1,...,vp,y[,c] probability".
JointDistribution read_distribution(const std::filesystem::path& path);
std::string format_distribution(const JointDistribution& dist);

}  // namespace ctximp::oracle
