#include "evisec/synth.hpp"

#include <cmath>
#include <random>

namespace evisec {

DynamicGraphSequence generate_synthetic(const SynthSpec& spec) {
    if (spec.num_nodes < 4 || spec.feature_dim < 2)
        throw ValidationError("generate_synthetic: spec too small");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int n = spec.num_nodes;
    const int half = n / 2;
    DynamicGraphSequence seq;
    seq.feature_dim = spec.feature_dim;
    seq.num_classes = 2;
    seq.node_ids.reserve(n);
    for (int i = 0; i < n; ++i) seq.node_ids.push_back("n" + std::to_string(i));

    for (int t = 0; t < spec.total_timesteps; ++t) {
        GraphSnapshot snap;
        snap.timestep = t;
        snap.num_nodes = n;
        snap.node_labels.resize(n);
        snap.features.resize(n, spec.feature_dim);
        // community mean rotates in the (0,1) feature plane over time
        const double angle = spec.drift * t;
        Vec mean = Vec::Zero(spec.feature_dim);
        mean(0) = std::cos(angle);
        mean(1) = std::sin(angle);
        mean *= spec.feature_scale;
        for (int i = 0; i < n; ++i) {
            const int community = i < half ? 0 : 1;
            snap.node_labels(i) = community;
            const double sign = community == 0 ? 1.0 : -1.0;
            for (int j = 0; j < spec.feature_dim; ++j)
                snap.features(i, j) = sign * mean(j) + spec.feature_noise * gauss(rng);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const bool same = (i < half) == (j < half);
                if (coin(rng) < (same ? spec.p_in : spec.p_out)) snap.add_edge(i, j);
            }
        snap.finalize_edges();
        seq.snapshots.push_back(std::move(snap));
    }
    seq.validate();
    return seq;
}

}  // namespace evisec
