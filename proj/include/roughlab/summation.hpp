#pragma once

#include <cstddef>
#include <span>

namespace roughlab {

/// Pairwise (cascade) summation. Error grows like log n instead of n, and
/// the result depends only on the order of the input, never on how the
/// values were produced across threads.
inline double pairwise_sum(std::span<const double> x) {
  constexpr std::size_t kBlock = 32;
  if (x.size() <= kBlock) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_mean(std::span<const double> x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

}  // namespace roughlab
