#include "ctximp/rng.hpp"

#include <limits>

namespace ctximp {

namespace {

std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ tag);
  h = splitmix64(h ^ index);
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stream RngSpec::tree_stream(std::uint64_t tree_index) const {
  return stream("tree", tree_index);
}

Stream RngSpec::stream(std::string_view tag, std::uint64_t index) const {
  return Stream{mix(seed, hash_tag(tag), index)};
}

RngSpec RngSpec::derive(std::string_view tag, std::uint64_t index) const {
  return RngSpec{mix(seed ^ 0x5bd1e9955bd1e995ULL, hash_tag(tag), index)};
}

std::uint64_t uniform_below(Stream& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t draw = 0;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

double uniform_unit(Stream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ctximp
