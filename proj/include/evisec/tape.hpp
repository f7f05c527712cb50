#pragma once

#include <functional>
#include <vector>

#include "evisec/common.hpp"

namespace evisec {

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order; backward() walks them in reverse. Scalars are 1x1 matrices.
class Tape {
public:
    int input(Mat value, bool requires_grad = false);

    const Mat& value(int id) const { return nodes_[id].value; }
    double scalar(int id) const { return nodes_[id].value(0, 0); }
    const Mat& grad(int id) const { return nodes_[id].grad; }

    int matmul(int a, int b);
    int add(int a, int b);
    int scale(int a, double s);
    int hadamard(int a, int b);
    int sigmoid(int a);
    int tanh_op(int a);
    int relu(int a);
    int one_minus(int a);
    // weighted elementwise sum of same-shape nodes
    int linear_combination(const std::vector<int>& ids, const std::vector<double>& coeffs);
    int row_gather(int a, std::vector<int> rows);
    int hconcat(int a, int b);

    // Top-k row summary, transposed: scores s = Z q / ||q||, keep the k
    // highest-score rows (stable on ties), scale row i by tanh(s_i).
    // Result is d_in x k; missing rows pad with zero columns.
    int topk_summary(int z, int q, int k);

    // Batch EDL losses over logit rows (one-hot label rows in y); scalar mean.
    int ce_mean(int logits, const Mat& y, double clamp);
    int kl_mean(int logits, const Mat& y, double clamp);
    // mean over rows of sum_i p_i ln p_neg_i, both branches differentiable
    int contrastive_mean(int logits_orig, int logits_neg, double clamp);

    void backward(int id);

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void()> pull;  // adds into parents' grads
    };

    int push(Mat value, std::function<void()> pull = nullptr);
    void accumulate(int id, const Mat& g) { nodes_[id].grad += g; }

    std::vector<Node> nodes_;
};

}  // namespace evisec
