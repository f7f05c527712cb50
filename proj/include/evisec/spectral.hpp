#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "evisec/common.hpp"
#include "evisec/graph.hpp"

namespace evisec {

// Eigensystem of a normalized Laplacian, eigenvalues ascending. Within a
// degenerate eigenvalue group columns are ordered by the node index of the
// eigenvector's largest-magnitude entry; each column's first nonzero
// component is made positive.
struct SpectralDecomposition {
    Vec eigenvalues;
    Mat eigenvectors;  // columns are u_i
};

enum class AugmentMode { verbatim, weighted };

// Low-frequency-perturbed Laplacian and the propagation matrix derived
// from it. In verbatim mode l_minus is a projector.
struct NegativeSample {
    Mat l_minus;
    Mat p_minus;  // I - l_minus
    double preserve_ratio = 0.0;
};

// L = I - D~^{-1/2} A~ D~^{-1/2}
Mat laplacian(const GraphSnapshot& snap);

SpectralDecomposition eigendecompose(const Mat& l);

// Keeps the first floor(r*N/2) low-frequency eigenspaces plus all
// high-frequency ones (indices > floor(N/2), 1-based). Verbatim mode uses
// unit coefficients; weighted mode multiplies each kept term by its
// eigenvalue.
NegativeSample augment(const SpectralDecomposition& dec, double r,
                       AugmentMode mode = AugmentMode::verbatim);

// Snapshot eigendecompositions cached by structure hash.
struct SpectralCache {
    std::unordered_map<std::uint64_t, SpectralDecomposition> entries;
    std::size_t decompositions = 0;  // solver invocations, for tests

    const SpectralDecomposition& get(const GraphSnapshot& snap);
};

// Per-timestep propagation/feature pair fed to the encoder; built either
// from a window directly or from its spectral negative.
struct EncoderInput {
    Mat propagation;
    Mat features;
};
using WindowInput = std::vector<EncoderInput>;

WindowInput window_input(const SnapshotWindow& w);
WindowInput negative_window(const SnapshotWindow& w, double r,
                            AugmentMode mode = AugmentMode::verbatim,
                            SpectralCache* cache = nullptr,
                            int dense_threshold = 2000);

std::uint64_t structure_hash(const GraphSnapshot& snap);

}  // namespace evisec
