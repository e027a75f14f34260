#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace ctximp {

using Stream = std::mt19937_64;

/// Seed plus the rule used to derive independent per-job streams from it.
///
/// Every stream is a function of (seed, tag, index) only, so trees and
/// permutation replicates can be produced in any order or on any thread and
/// still come out identical.
struct RngSpec {
  std::uint64_t seed = 0;

  /// Stream for tree `tree_index` of the primary forest.
  [[nodiscard]] Stream tree_stream(std::uint64_t tree_index) const;
  /// Generic tagged stream, e.g. ("perm", r) or ("forest", r).
  [[nodiscard]] Stream stream(std::string_view tag, std::uint64_t index) const;
  /// A derived spec whose streams are independent of this one's.
  [[nodiscard]] RngSpec derive(std::string_view tag, std::uint64_t index) const;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform integer in [0, bound). Rejection sampling on the raw 64-bit output
/// so results do not depend on the standard library's distribution code.
std::uint64_t uniform_below(Stream& rng, std::uint64_t bound);

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void shuffle(std::span<T> values, Stream& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

/// Uniform real in [0, 1) with 53 random bits.
double uniform_unit(Stream& rng);

}  // namespace ctximp
