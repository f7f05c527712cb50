#pragma once

#include "evisec/common.hpp"

// Dense matmul kernels. The serial version is the reference; the OpenMP
// version must produce bit-identical results (same accumulation order per
// output element). matmul() dispatches on problem size.

namespace evisec::kernels {

Mat matmul_serial(const Mat& a, const Mat& b);
Mat matmul_parallel(const Mat& a, const Mat& b);

// Dispatch: parallel above min_parallel_flops, serial below.
Mat matmul(const Mat& a, const Mat& b);

// Flop threshold (2*m*n*k) below which matmul() stays serial.
inline constexpr long long min_parallel_flops = 1LL << 22;

}  // namespace evisec::kernels
