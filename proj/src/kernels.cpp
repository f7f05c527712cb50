#include "evisec/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evisec::kernels {

namespace {

void check_shapes(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ (" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    }
}

// One output row, fixed k-order accumulation shared by both kernels.
inline void row_kernel(const Mat& a, const Mat& b, Mat& out, Eigen::Index i) {
    const Eigen::Index k = a.cols(), n = b.cols();
    for (Eigen::Index j = 0; j < n; ++j) {
        double acc = 0.0;
        for (Eigen::Index p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
        out(i, j) = acc;
    }
}

}  // namespace

Mat matmul_serial(const Mat& a, const Mat& b) {
    check_shapes(a, b);
    Mat out(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) row_kernel(a, b, out, i);
    return out;
}

Mat matmul_parallel(const Mat& a, const Mat& b) {
    check_shapes(a, b);
    Mat out(a.rows(), b.cols());
    const Eigen::Index m = a.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) row_kernel(a, b, out, i);
    return out;
}

Mat matmul(const Mat& a, const Mat& b) {
    const long long flops = 2LL * a.rows() * a.cols() * b.cols();
    if (flops >= min_parallel_flops) return matmul_parallel(a, b);
    return matmul_serial(a, b);
}

}  // namespace evisec::kernels
