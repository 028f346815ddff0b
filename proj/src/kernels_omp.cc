#include "biparse/kernels.h"

#include <algorithm>

#include <omp.h>

#include "kernels_detail.h"

namespace biparse::kernels {

void set_single_threaded() { omp_set_num_threads(1); }

namespace omp {

void matvec(std::span<const real> w, std::size_t rows, std::size_t cols,
            std::span<const real> x, std::span<const real> b,
            std::span<real> y) {
  const long n = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelThreshold)
  for (long i = 0; i < n; ++i) {
    real v = detail::dot(w.data() + i * cols, x.data(), cols);
    y[i] = b.empty() ? v : v + b[i];
  }
}

void matvec_transpose_acc(std::span<const real> w, std::size_t rows,
                          std::size_t cols, std::span<const real> gy,
                          std::span<real> gx) {
  // Columns are split across threads; each column still sums rows in order.
  constexpr long kBlock = 64;
  const long blocks = static_cast<long>((cols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelThreshold)
  for (long blk = 0; blk < blocks; ++blk) {
    const std::size_t lo = blk * kBlock;
    const std::size_t hi = std::min(cols, lo + kBlock);
    for (std::size_t i = 0; i < rows; ++i) {
      const real g = gy[i];
      const real* row = w.data() + i * cols;
      for (std::size_t j = lo; j < hi; ++j) gx[j] += row[j] * g;
    }
  }
}

void outer_acc(std::span<const real> gy, std::span<const real> x,
               std::span<real> gw) {
  const std::size_t cols = x.size();
  const long n = static_cast<long>(gy.size());
#pragma omp parallel for schedule(static) if (gy.size() * cols >= kParallelThreshold)
  for (long i = 0; i < n; ++i) {
    const real g = gy[i];
    real* row = gw.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += g * x[j];
  }
}

std::size_t count_extreme_replicates(std::span<const std::int64_t> diffs,
                                     std::int64_t observed,
                                     std::size_t shuffles,
                                     std::uint64_t seed) {
  long count = 0;
  const long n = static_cast<long>(shuffles);
#pragma omp parallel for schedule(static) reduction(+ : count)
  for (long r = 0; r < n; ++r) {
    if (detail::replicate_statistic(diffs, replicate_seed(seed, r)) >= observed)
      ++count;
  }
  return static_cast<std::size_t>(count);
}

}  // namespace omp
}  // namespace biparse::kernels
