#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace midword::detail {

// k-means++ selection of `count` distinct indices from [0, n). dist2(i, j)
// is the squared distance between items i and j. When every remaining item
// coincides with a chosen one, the lowest unchosen index is taken.
template <typename Dist2>
std::vector<std::size_t> kmeanspp_select(std::size_t n, std::size_t count,
                                         std::uint64_t seed, Dist2&& dist2) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t idx) {
    chosen.push_back(idx);
    taken[idx] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        nearest[i] = 0.0;
        continue;
      }
      const double d = dist2(i, idx);
      if (d < nearest[i]) nearest[i] = d;
    }
  };

  take(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  while (chosen.size() < count) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : nearest[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest[i] <= 0.0) continue;
        pick = i;
        u -= nearest[i];
        if (u < 0.0) break;
      }
    }
    if (pick == n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
  }
  return chosen;
}

// Uniform selection without replacement.
inline std::vector<std::size_t> random_select(std::size_t n, std::size_t count,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace midword::detail
