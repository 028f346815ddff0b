#ifndef BIPARSE_KERNELS_H_
#define BIPARSE_KERNELS_H_

// Dense kernels behind the autodiff affine op and the randomization test.
//
// Every kernel exists twice: serial:: is the reference implementation, omp::
// is the OpenMP version used at runtime. Both accumulate every output element
// in the same order, so their results are bitwise identical for any thread
// count. Matrices are row-major.

#include <cstddef>
#include <cstdint>
#include <span>

#include "biparse/common.h"

namespace biparse::kernels {

namespace serial {

// y = W x + b  (W: rows x cols, b may be empty)
void matvec(std::span<const real> w, std::size_t rows, std::size_t cols,
            std::span<const real> x, std::span<const real> b,
            std::span<real> y);

// gx += W^T gy
void matvec_transpose_acc(std::span<const real> w, std::size_t rows,
                          std::size_t cols, std::span<const real> gy,
                          std::span<real> gx);

// gw += gy x^T
void outer_acc(std::span<const real> gy, std::span<const real> x,
               std::span<real> gw);

// Paired sign-flip replicates: counts r in [0, shuffles) with
// |sum_i s_ri * diffs[i]| >= observed, where s_ri = +-1 is drawn from a
// per-replicate generator seeded from (seed, r).
std::size_t count_extreme_replicates(std::span<const std::int64_t> diffs,
                                     std::int64_t observed,
                                     std::size_t shuffles,
                                     std::uint64_t seed);

}  // namespace serial

namespace omp {

void matvec(std::span<const real> w, std::size_t rows, std::size_t cols,
            std::span<const real> x, std::span<const real> b,
            std::span<real> y);
void matvec_transpose_acc(std::span<const real> w, std::size_t rows,
                          std::size_t cols, std::span<const real> gy,
                          std::span<real> gx);
void outer_acc(std::span<const real> gy, std::span<const real> x,
               std::span<real> gw);
std::size_t count_extreme_replicates(std::span<const std::int64_t> diffs,
                                     std::int64_t observed,
                                     std::size_t shuffles,
                                     std::uint64_t seed);

}  // namespace omp

// Work (rows * cols) below which the omp:: kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1 << 16;

// Generator seed for replicate r; shared by both implementations.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate);

// Restricts OpenMP to one thread in the calling thread (grid workers,
// deterministic mode).
void set_single_threaded();

}  // namespace biparse::kernels

#endif  // BIPARSE_KERNELS_H_
