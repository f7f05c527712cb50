#include "evisec/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace evisec {

Mat laplacian(const GraphSnapshot& snap) {
    const int n = snap.num_nodes;
    return Mat::Identity(n, n) - normalize_propagation(snap);
}

SpectralDecomposition eigendecompose(const Mat& l) {
    if (l.rows() != l.cols()) throw ValidationError("eigendecompose: matrix not square");
    if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("eigendecompose: matrix not symmetric within 1e-10");
    Eigen::SelfAdjointEigenSolver<Mat> solver(l);
    if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Vec vals = solver.eigenvalues();
    Mat vecs = solver.eigenvectors();
    const Eigen::Index n = vals.size();

    // deterministic order inside degenerate groups: node index of the
    // largest-magnitude entry, then original column
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto argmax_entry = [&](Eigen::Index c) {
        Eigen::Index best = 0;
        vecs.col(c).cwiseAbs().maxCoeff(&best);
        return best;
    };
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (std::abs(vals(a) - vals(b)) > 1e-9) return vals(a) < vals(b);
        return argmax_entry(a) < argmax_entry(b);
    });

    SpectralDecomposition dec;
    dec.eigenvalues.resize(n);
    dec.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        dec.eigenvalues(k) = vals(order[k]);
        Vec u = vecs.col(order[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(u(i)) > 1e-10) {
                if (u(i) < 0) u = -u;
                break;
            }
        }
        dec.eigenvectors.col(k) = u;
    }
    return dec;
}

NegativeSample augment(const SpectralDecomposition& dec, double r, AugmentMode mode) {
    if (r < 0.0 || r >= 1.0) throw ValidationError("augment: r must be in [0, 1)");
    const Eigen::Index n = dec.eigenvalues.size();
    const Eigen::Index low_keep = static_cast<Eigen::Index>(std::floor(r * n / 2.0));
    const Eigen::Index high_begin = n / 2;  // 1-based floor(N/2)+1

    NegativeSample neg;
    neg.preserve_ratio = r;
    neg.l_minus = Mat::Zero(n, n);
    auto add_term = [&](Eigen::Index i) {
        const double coeff = mode == AugmentMode::weighted ? dec.eigenvalues(i) : 1.0;
        neg.l_minus.noalias() += coeff * dec.eigenvectors.col(i) * dec.eigenvectors.col(i).transpose();
    };
    for (Eigen::Index i = 0; i < low_keep; ++i) add_term(i);
    for (Eigen::Index j = high_begin; j < n; ++j) add_term(j);
    neg.p_minus = Mat::Identity(n, n) - neg.l_minus;
    return neg;
}

std::uint64_t structure_hash(const GraphSnapshot& snap) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(snap.num_nodes));
    for (auto [s, d] : snap.edges) {
        mix(static_cast<std::uint64_t>(s));
        mix(static_cast<std::uint64_t>(d));
    }
    return h;
}

const SpectralDecomposition& SpectralCache::get(const GraphSnapshot& snap) {
    const std::uint64_t key = structure_hash(snap);
    auto it = entries.find(key);
    if (it == entries.end()) {
        ++decompositions;
        it = entries.emplace(key, eigendecompose(laplacian(snap))).first;
    }
    return it->second;
}

WindowInput window_input(const SnapshotWindow& w) {
    WindowInput input;
    input.reserve(w.snapshots.size());
    for (const auto& snap : w.snapshots)
        input.push_back({normalize_propagation(snap), snap.features});
    return input;
}

WindowInput negative_window(const SnapshotWindow& w, double r, AugmentMode mode,
                            SpectralCache* cache, int dense_threshold) {
    SpectralCache local;
    SpectralCache& c = cache ? *cache : local;
    WindowInput input;
    input.reserve(w.snapshots.size());
    for (const auto& snap : w.snapshots) {
        const SpectralDecomposition& dec = c.get(snap);
        const Eigen::Index n = dec.eigenvalues.size();
        if (n > dense_threshold && mode == AugmentMode::verbatim) {
            // only the low half is needed: high block is I minus the
            // projector onto the first floor(N/2) eigenspaces
            const Eigen::Index low_keep = static_cast<Eigen::Index>(std::floor(r * n / 2.0));
            const Eigen::Index half = n / 2;
            Mat low_proj = Mat::Zero(n, n);
            Mat kept = Mat::Zero(n, n);
            for (Eigen::Index i = 0; i < half; ++i) {
                Mat term = dec.eigenvectors.col(i) * dec.eigenvectors.col(i).transpose();
                low_proj += term;
                if (i < low_keep) kept += term;
            }
            Mat l_minus = kept + Mat::Identity(n, n) - low_proj;
            input.push_back({Mat::Identity(n, n) - l_minus, snap.features});
        } else {
            input.push_back({augment(dec, r, mode).p_minus, snap.features});
        }
    }
    return input;
}

}  // namespace evisec
