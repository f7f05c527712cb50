#include "evisec/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evisec/kernels.hpp"

namespace evisec {

namespace {

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

Mat uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

}  // namespace

std::vector<std::pair<std::string, Mat*>> EncoderParams::named_tensors() {
    std::vector<std::pair<std::string, Mat*>> out;
    for (size_t l = 0; l < init.layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        out.emplace_back(p + "w0", &init.layers[l]);
        GruCell& c = cells[l];
        out.emplace_back(p + "wz", &c.wz);
        out.emplace_back(p + "uz", &c.uz);
        out.emplace_back(p + "bz", &c.bz);
        out.emplace_back(p + "wr", &c.wr);
        out.emplace_back(p + "ur", &c.ur);
        out.emplace_back(p + "br", &c.br);
        out.emplace_back(p + "wh", &c.wh);
        out.emplace_back(p + "uh", &c.uh);
        out.emplace_back(p + "bh", &c.bh);
        out.emplace_back(p + "q", &c.q);
    }
    out.emplace_back("head.weight", &head.weight);
    return out;
}

std::vector<std::pair<std::string, const Mat*>> EncoderParams::named_tensors() const {
    auto mut = const_cast<EncoderParams*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Mat*>> out;
    out.reserve(mut.size());
    for (auto& [k, v] : mut) out.emplace_back(k, v);
    return out;
}

EncoderParams init_params(const std::vector<int>& layer_dims, int num_classes, HeadKind kind,
                          std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ValidationError("need at least one layer");
    std::mt19937_64 rng(seed);
    EncoderParams params;
    params.head.kind = kind;
    for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int din = layer_dims[l], dout = layer_dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(din));
        params.init.layers.push_back(uniform_matrix(din, dout, bound, rng));
        GruCell c;
        c.wz = uniform_matrix(din, din, bound, rng);
        c.uz = uniform_matrix(din, din, bound, rng);
        c.bz = uniform_matrix(din, dout, bound, rng);
        c.wr = uniform_matrix(din, din, bound, rng);
        c.ur = uniform_matrix(din, din, bound, rng);
        c.br = uniform_matrix(din, dout, bound, rng);
        c.wh = uniform_matrix(din, din, bound, rng);
        c.uh = uniform_matrix(din, din, bound, rng);
        c.bh = uniform_matrix(din, dout, bound, rng);
        c.q = uniform_matrix(din, 1, bound, rng);
        params.cells.push_back(std::move(c));
    }
    const int d_last = layer_dims.back();
    const int head_in = kind == HeadKind::node_classification ? d_last : 2 * d_last;
    const int k = kind == HeadKind::link_prediction ? 2 : num_classes;
    params.head.weight =
        uniform_matrix(head_in, k, 1.0 / std::sqrt(static_cast<double>(head_in)), rng);
    return params;
}

Mat gcn_layer(const Mat& propagation, const Mat& z_prev, const Mat& w, Activation act) {
    if (propagation.cols() != z_prev.rows() || z_prev.cols() != w.rows())
        throw DimensionError("gcn_layer: incompatible shapes");
    Mat out = kernels::matmul(kernels::matmul(propagation, z_prev), w);
    if (act == Activation::relu) out = out.cwiseMax(0.0);
    return out;
}

Mat summarize_embeddings(const Mat& z, const Vec& q, int k) {
    if (q.size() != z.cols()) throw DimensionError("summarize: q length != feature dim");
    const double qnorm = q.norm();
    const Vec qhat = qnorm > 1e-12 ? Vec(q / qnorm) : q;
    Vec s = z * qhat;
    std::vector<Eigen::Index> order(z.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
    Mat out = Mat::Zero(k, z.cols());
    const Eigen::Index take = std::min<Eigen::Index>(k, z.rows());
    for (Eigen::Index i = 0; i < take; ++i)
        out.row(i) = std::tanh(s(order[i])) * z.row(order[i]);
    return out;
}

Mat evolve_weights(const Mat& z_prev, const Mat& w_prev, const GruCell& cell) {
    if (cell.wz.rows() != w_prev.rows() || cell.bz.cols() != w_prev.cols())
        throw DimensionError("evolve_weights: cell shapes incompatible with W");
    const int dout = static_cast<int>(w_prev.cols());
    Mat x = summarize_embeddings(z_prev, cell.q.col(0), dout).transpose();  // d_in x d_out
    Mat z = sigmoid(cell.wz * x + cell.uz * w_prev + cell.bz);
    Mat r = sigmoid(cell.wr * x + cell.ur * w_prev + cell.br);
    Mat cand = (cell.wh * x + cell.uh * r.cwiseProduct(w_prev) + cell.bh).array().tanh().matrix();
    return (Mat::Ones(z.rows(), z.cols()) - z).cwiseProduct(w_prev) + z.cwiseProduct(cand);
}

EmbeddingState encode_window(const WindowInput& input, const EvolvingWeights& init,
                             const std::vector<GruCell>& cells, EncodeStats* stats) {
    if (input.empty()) throw ValidationError("encode_window: empty window");
    if (init.layers.size() != cells.size())
        throw DimensionError("encode_window: layer/cell count mismatch");
    const size_t num_layers = cells.size();
    EvolvingWeights weights = init;
    EmbeddingState state;
    for (const EncoderInput& step : input) {
        state.activations.assign(1, step.features);
        for (size_t l = 0; l < num_layers; ++l) {
            weights.layers[l] = evolve_weights(state.activations[l], weights.layers[l], cells[l]);
            if (stats) ++stats->evolve_calls;
            const Activation act = l + 1 == num_layers ? Activation::identity : Activation::relu;
            state.activations.push_back(
                gcn_layer(step.propagation, state.activations[l], weights.layers[l], act));
            if (stats) ++stats->gcn_calls;
        }
    }
    state.final_embedding = state.activations.back();
    state.final_weights = std::move(weights);
    return state;
}

Mat apply_head(const Mat& embedding, const TaskHead& head, const std::vector<int>& nodes) {
    if (head.kind != HeadKind::node_classification)
        throw ValidationError("node targets require a node-classification head");
    Mat sel(static_cast<Eigen::Index>(nodes.size()), embedding.cols());
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] < 0 || nodes[i] >= embedding.rows())
            throw ValidationError("unknown target node " + std::to_string(nodes[i]));
        sel.row(static_cast<Eigen::Index>(i)) = embedding.row(nodes[i]);
    }
    return kernels::matmul(sel, head.weight);
}

Mat apply_head(const Mat& embedding, const TaskHead& head,
               const std::vector<std::pair<int, int>>& pairs) {
    if (head.kind == HeadKind::node_classification)
        throw ValidationError("pair targets require an edge or link head");
    const Eigen::Index d = embedding.cols();
    Mat fwd(static_cast<Eigen::Index>(pairs.size()), 2 * d);
    Mat rev(static_cast<Eigen::Index>(pairs.size()), 2 * d);
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [a, b] = pairs[i];
        if (a < 0 || b < 0 || a >= embedding.rows() || b >= embedding.rows())
            throw ValidationError("unknown target pair");
        fwd.row(static_cast<Eigen::Index>(i)) << embedding.row(a), embedding.row(b);
        rev.row(static_cast<Eigen::Index>(i)) << embedding.row(b), embedding.row(a);
    }
    // symmetric combination: mean of both endpoint orders
    return 0.5 * (kernels::matmul(fwd, head.weight) + kernels::matmul(rev, head.weight));
}

}  // namespace evisec
