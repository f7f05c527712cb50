#pragma once

#include <cstdint>
#include <vector>

#include "evisec/common.hpp"
#include "evisec/graph.hpp"

namespace evisec {

// Structure manipulation: resample edges from a stochastic block model.
// When p_in < 0 it is calibrated so the expected edge count matches the
// input snapshot, holding p_out = p_in / 5.
struct SBMSpec {
    int num_blocks = 4;
    std::vector<double> block_probs;  // empty = uniform
    double p_in = -1.0;
    double p_out = -1.0;
    std::uint64_t seed = 0;
};

// Feature interpolation: x'_i = lambda_i x_i + (1 - lambda_i) x_{pi(i)}.
struct FISpec {
    double fixed_lambda = -1.0;  // < 0 = draw per node from U[0,1]
    std::uint64_t seed = 0;
};

enum class OodKind { sm, fi };

GraphSnapshot sm_generate(const GraphSnapshot& snap, const SBMSpec& spec);
GraphSnapshot fi_generate(const GraphSnapshot& snap, const FISpec& spec);

// Per-snapshot application with derived seeds (seed + t); provenance
// recorded on the output sequence.
DynamicGraphSequence make_ood_testset(const DynamicGraphSequence& seq, OodKind kind,
                                      const SBMSpec& sm, const FISpec& fi);

// exposed for the calibration test
double calibrate_p_in(const std::vector<int>& block_sizes, long target_edges, double out_ratio);

}  // namespace evisec
