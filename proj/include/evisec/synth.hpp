#pragma once

#include <cstdint>

#include "evisec/common.hpp"
#include "evisec/graph.hpp"

namespace evisec {

// Bundled benchmark generator: two-community dynamic SBM with
// community-correlated node labels and slowly drifting feature means.
struct SynthSpec {
    int num_nodes = 60;
    int total_timesteps = 12;
    int feature_dim = 8;
    double p_in = 0.25;
    double p_out = 0.03;
    double feature_scale = 1.2;   // community mean separation
    double feature_noise = 0.4;   // per-entry gaussian noise
    double drift = 0.12;          // radians of mean rotation per timestep
    std::uint64_t seed = 1;
};

DynamicGraphSequence generate_synthetic(const SynthSpec& spec);

}  // namespace evisec
