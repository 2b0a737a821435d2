#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cmix {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// All randomness in an experiment flows from one root seed through named
/// sub-streams, so toggling one component never shifts another's draws.
/// Extra salts (e.g. epoch number) fold into the stream key.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name,
                                 std::uint64_t salt = 0) {
  std::uint64_t k = detail::splitmix64(seed ^ detail::fnv1a(name));
  k = detail::splitmix64(k ^ salt);
  return std::mt19937_64(k);
}

/// Fisher-Yates shuffle driven by an explicit engine.
template <typename Vec, typename Engine>
void shuffle_inplace(Vec& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> d(0, i - 1);
    std::swap(v[i - 1], v[d(eng)]);
  }
}

}  // namespace cmix
