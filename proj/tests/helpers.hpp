#pragma once

#include <random>
#include <vector>

#include "evisec/graph.hpp"

namespace testutil {

inline evisec::Mat random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    evisec::Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

inline evisec::GraphSnapshot random_snapshot(int n, double edge_prob, int feature_dim,
                                             std::mt19937_64& rng) {
    evisec::GraphSnapshot snap;
    snap.num_nodes = n;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < edge_prob) snap.add_edge(i, j);
    snap.finalize_edges();
    snap.features = random_matrix(n, feature_dim, rng);
    return snap;
}

// five-point difference d f / d x(i,j) for a scalar-valued function of one matrix entry
template <typename F>
double central_diff(evisec::Mat& x, int i, int j, F f, double h = 1e-4) {
    const double orig = x(i, j);
    auto at = [&](double v) {
        x(i, j) = v;
        return f();
    };
    const double d = (at(orig - 2 * h) - 8.0 * at(orig - h) + 8.0 * at(orig + h) -
                      at(orig + 2 * h)) /
                     (12.0 * h);
    x(i, j) = orig;
    return d;
}

inline double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / denom;
}

}  // namespace testutil
