#pragma once

#include <cstdint>
#include <string_view>

namespace midword {

/// 64-bit FNV-1a hash.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-stage seed derived from a root seed and a fixed stage label.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return splitmix64(root ^ fnv1a(label));
}

}  // namespace midword
