#include "biparse/kernels.h"

#include <sstream>
#include <iomanip>

#include "kernels_detail.h"

namespace biparse {

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

namespace kernels {

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (replicate + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace serial {

void matvec(std::span<const real> w, std::size_t rows, std::size_t cols,
            std::span<const real> x, std::span<const real> b,
            std::span<real> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    real v = detail::dot(w.data() + i * cols, x.data(), cols);
    y[i] = b.empty() ? v : v + b[i];
  }
}

void matvec_transpose_acc(std::span<const real> w, std::size_t rows,
                          std::size_t cols, std::span<const real> gy,
                          std::span<real> gx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const real g = gy[i];
    const real* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) gx[j] += row[j] * g;
  }
}

void outer_acc(std::span<const real> gy, std::span<const real> x,
               std::span<real> gw) {
  const std::size_t cols = x.size();
  for (std::size_t i = 0; i < gy.size(); ++i) {
    const real g = gy[i];
    real* row = gw.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += g * x[j];
  }
}

std::size_t count_extreme_replicates(std::span<const std::int64_t> diffs,
                                     std::int64_t observed,
                                     std::size_t shuffles,
                                     std::uint64_t seed) {
  std::size_t count = 0;
  for (std::size_t r = 0; r < shuffles; ++r) {
    if (detail::replicate_statistic(diffs, replicate_seed(seed, r)) >= observed)
      ++count;
  }
  return count;
}

}  // namespace serial
}  // namespace kernels
}  // namespace biparse
