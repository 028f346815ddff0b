#ifndef BIPARSE_KERNELS_DETAIL_H_
#define BIPARSE_KERNELS_DETAIL_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "biparse/common.h"
#include "biparse/kernels.h"

namespace biparse::kernels::detail {

// Dot product with eight fixed partial sums. The summation order depends only
// on n, which keeps serial and parallel callers bitwise identical while still
// letting the compiler vectorize.
inline real dot(const real* a, const real* b, std::size_t n) {
  real acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[j + l] * b[j + l];
  }
  real tail = 0;
  for (; j < n; ++j) tail += a[j] * b[j];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

inline std::int64_t replicate_statistic(std::span<const std::int64_t> diffs,
                                        std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::int64_t sum = 0;
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (i % 64 == 0) bits = gen();
    sum += (bits & 1) ? diffs[i] : -diffs[i];
    bits >>= 1;
  }
  return sum < 0 ? -sum : sum;
}

}  // namespace biparse::kernels::detail

#endif  // BIPARSE_KERNELS_DETAIL_H_
