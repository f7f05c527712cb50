#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "evisec/common.hpp"
#include "evisec/spectral.hpp"

namespace evisec {

enum class Activation { relu, identity };

// Matrix-GRU cell evolving one layer's weight matrix. Gate matrices act
// from the left (d_in x d_in), biases are full d_in x d_out matrices, and
// q scores rows of the layer input for top-k summarization.
struct GruCell {
    Mat wz, uz, bz;  // update gate
    Mat wr, ur, br;  // reset gate
    Mat wh, uh, bh;  // candidate
    Mat q;           // d_in x 1 summarization score vector
};

struct EvolvingWeights {
    std::vector<Mat> layers;  // W^(l), d_{l-1} x d_l
};

enum class HeadKind { node_classification, edge_classification, link_prediction };

struct TaskHead {
    HeadKind kind = HeadKind::node_classification;
    Mat weight;  // d_L x K for node tasks, 2*d_L x K for pair tasks
};

struct EncoderParams {
    EvolvingWeights init;
    std::vector<GruCell> cells;  // one per layer
    TaskHead head;

    std::vector<std::pair<std::string, Mat*>> named_tensors();
    std::vector<std::pair<std::string, const Mat*>> named_tensors() const;
};

// uniform(-1/sqrt(d_in), 1/sqrt(d_in)) init for every tensor
EncoderParams init_params(const std::vector<int>& layer_dims, int num_classes, HeadKind kind,
                          std::uint64_t seed);

struct EmbeddingState {
    std::vector<Mat> activations;  // Z^(0)..Z^(L) at the final timestep
    Mat final_embedding;           // Z^(L)
    EvolvingWeights final_weights;
};

struct EncodeStats {
    int evolve_calls = 0;
    int gcn_calls = 0;
};

Mat gcn_layer(const Mat& propagation, const Mat& z_prev, const Mat& w, Activation act);

// Top-k row pooling: scores s = Z q / ||q||, keep the k highest rows
// (stable ties), scale each by tanh(score); pads zero rows when N < k.
Mat summarize_embeddings(const Mat& z, const Vec& q, int k);

Mat evolve_weights(const Mat& z_prev, const Mat& w_prev, const GruCell& cell);

EmbeddingState encode_window(const WindowInput& input, const EvolvingWeights& init,
                             const std::vector<GruCell>& cells, EncodeStats* stats = nullptr);

Mat apply_head(const Mat& embedding, const TaskHead& head, const std::vector<int>& nodes);
Mat apply_head(const Mat& embedding, const TaskHead& head,
               const std::vector<std::pair<int, int>>& pairs);

}  // namespace evisec
