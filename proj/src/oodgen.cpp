#include "evisec/oodgen.hpp"

#include <algorithm>
#include <random>

namespace evisec {

double calibrate_p_in(const std::vector<int>& block_sizes, long target_edges, double out_ratio) {
    long intra = 0, total_pairs = 0;
    long n = 0;
    for (int b : block_sizes) {
        intra += static_cast<long>(b) * (b - 1) / 2;
        n += b;
    }
    total_pairs = n * (n - 1) / 2;
    const long inter = total_pairs - intra;
    const double denom = static_cast<double>(intra) + out_ratio * static_cast<double>(inter);
    if (denom <= 0.0) throw ValidationError("sm_generate: no candidate pairs");
    const double p_in = static_cast<double>(target_edges) / denom;
    if (p_in > 1.0)
        throw ValidationError("sm_generate: target edge count infeasible for block sizes");
    return p_in;
}

GraphSnapshot sm_generate(const GraphSnapshot& snap, const SBMSpec& spec) {
    snap.validate();
    if (spec.num_blocks < 2) throw ValidationError("sm_generate: need at least 2 blocks");
    const int n = snap.num_nodes;
    std::mt19937_64 rng(spec.seed);

    std::vector<double> probs = spec.block_probs;
    if (probs.empty()) probs.assign(spec.num_blocks, 1.0 / spec.num_blocks);
    if (static_cast<int>(probs.size()) != spec.num_blocks)
        throw ValidationError("sm_generate: block_probs length != num_blocks");
    std::discrete_distribution<int> block_dist(probs.begin(), probs.end());
    std::vector<int> block(n);
    std::vector<int> sizes(spec.num_blocks, 0);
    for (int i = 0; i < n; ++i) ++sizes[block[i] = block_dist(rng)];

    double p_in = spec.p_in, p_out = spec.p_out;
    if (p_in < 0.0) {
        p_in = calibrate_p_in(sizes, static_cast<long>(snap.edges.size()), 0.2);
        p_out = p_in / 5.0;
    } else if (p_out < 0.0) {
        p_out = p_in / 5.0;
    }
    if (p_in > 1.0 || p_out > p_in)
        throw ValidationError("sm_generate: require 0 <= p_out <= p_in <= 1");

    GraphSnapshot out;
    out.timestep = snap.timestep;
    out.num_nodes = n;
    out.features = snap.features;
    out.node_labels = snap.node_labels;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < (block[i] == block[j] ? p_in : p_out)) out.add_edge(i, j);
    out.finalize_edges();
    return out;
}

GraphSnapshot fi_generate(const GraphSnapshot& snap, const FISpec& spec) {
    snap.validate();
    const int n = snap.num_nodes;
    std::mt19937_64 rng(spec.seed);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GraphSnapshot out = snap;
    for (int i = 0; i < n; ++i) {
        const double lambda = spec.fixed_lambda >= 0.0 ? spec.fixed_lambda : unit(rng);
        out.features.row(i) =
            lambda * snap.features.row(i) + (1.0 - lambda) * snap.features.row(perm[i]);
    }
    return out;
}

DynamicGraphSequence make_ood_testset(const DynamicGraphSequence& seq, OodKind kind,
                                      const SBMSpec& sm, const FISpec& fi) {
    seq.validate();
    DynamicGraphSequence out = seq;
    out.provenance = kind == OodKind::sm ? "sm" : "fi";
    for (size_t i = 0; i < out.snapshots.size(); ++i) {
        const auto t = static_cast<std::uint64_t>(seq.snapshots[i].timestep);
        if (kind == OodKind::sm) {
            SBMSpec s = sm;
            s.seed = sm.seed + t;
            out.snapshots[i] = sm_generate(seq.snapshots[i], s);
        } else {
            FISpec f = fi;
            f.seed = fi.seed + t;
            out.snapshots[i] = fi_generate(seq.snapshots[i], f);
        }
    }
    return out;
}

}  // namespace evisec
