#include "evisec/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evisec/edl.hpp"
#include "evisec/kernels.hpp"
#include "evisec/losses.hpp"

namespace evisec {

int Tape::push(Mat value, std::function<void()> pull) {
    Node n;
    n.grad = Mat::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Mat value, bool) { return push(std::move(value)); }

int Tape::matmul(int a, int b) {
    Mat v = kernels::matmul(nodes_[a].value, nodes_[b].value);
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, a, b] {
        const Mat& g = nodes_[id].grad;
        accumulate(a, kernels::matmul(g, Mat(nodes_[b].value.transpose())));
        accumulate(b, kernels::matmul(Mat(nodes_[a].value.transpose()), g));
    };
    return id;
}

int Tape::add(int a, int b) {
    int id = push(nodes_[a].value + nodes_[b].value);
    nodes_[id].pull = [this, id, a, b] {
        accumulate(a, nodes_[id].grad);
        accumulate(b, nodes_[id].grad);
    };
    return id;
}

int Tape::scale(int a, double s) {
    int id = push(s * nodes_[a].value);
    nodes_[id].pull = [this, id, a, s] { accumulate(a, s * nodes_[id].grad); };
    return id;
}

int Tape::hadamard(int a, int b) {
    int id = push(nodes_[a].value.cwiseProduct(nodes_[b].value));
    nodes_[id].pull = [this, id, a, b] {
        accumulate(a, nodes_[id].grad.cwiseProduct(nodes_[b].value));
        accumulate(b, nodes_[id].grad.cwiseProduct(nodes_[a].value));
    };
    return id;
}

int Tape::sigmoid(int a) {
    Mat v = (1.0 / (1.0 + (-nodes_[a].value.array()).exp())).matrix();
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, a] {
        const auto& s = nodes_[id].value.array();
        accumulate(a, (nodes_[id].grad.array() * s * (1.0 - s)).matrix());
    };
    return id;
}

int Tape::tanh_op(int a) {
    int id = push(nodes_[a].value.array().tanh().matrix());
    nodes_[id].pull = [this, id, a] {
        const auto& t = nodes_[id].value.array();
        accumulate(a, (nodes_[id].grad.array() * (1.0 - t * t)).matrix());
    };
    return id;
}

int Tape::relu(int a) {
    int id = push(nodes_[a].value.cwiseMax(0.0));
    nodes_[id].pull = [this, id, a] {
        Mat mask = (nodes_[a].value.array() > 0.0).cast<double>().matrix();
        accumulate(a, nodes_[id].grad.cwiseProduct(mask));
    };
    return id;
}

int Tape::one_minus(int a) {
    int id = push(Mat::Ones(nodes_[a].value.rows(), nodes_[a].value.cols()) - nodes_[a].value);
    nodes_[id].pull = [this, id, a] { accumulate(a, -nodes_[id].grad); };
    return id;
}

int Tape::linear_combination(const std::vector<int>& ids, const std::vector<double>& coeffs) {
    Mat v = coeffs[0] * nodes_[ids[0]].value;
    for (size_t i = 1; i < ids.size(); ++i) v += coeffs[i] * nodes_[ids[i]].value;
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, ids, coeffs] {
        for (size_t i = 0; i < ids.size(); ++i)
            accumulate(ids[i], coeffs[i] * nodes_[id].grad);
    };
    return id;
}

int Tape::row_gather(int a, std::vector<int> rows) {
    Mat v(static_cast<Eigen::Index>(rows.size()), nodes_[a].value.cols());
    for (size_t i = 0; i < rows.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = nodes_[a].value.row(rows[i]);
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, a, rows] {
        Mat g = Mat::Zero(nodes_[a].value.rows(), nodes_[a].value.cols());
        for (size_t i = 0; i < rows.size(); ++i)
            g.row(rows[i]) += nodes_[id].grad.row(static_cast<Eigen::Index>(i));
        accumulate(a, g);
    };
    return id;
}

int Tape::hconcat(int a, int b) {
    const Mat& va = nodes_[a].value;
    const Mat& vb = nodes_[b].value;
    Mat v(va.rows(), va.cols() + vb.cols());
    v << va, vb;
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, a, b] {
        const Mat& g = nodes_[id].grad;
        accumulate(a, g.leftCols(nodes_[a].value.cols()));
        accumulate(b, g.rightCols(nodes_[b].value.cols()));
    };
    return id;
}

namespace {

struct TopKPlan {
    std::vector<Eigen::Index> picks;  // selected row per output column
    Vec scores;                       // score of each selected row
    Vec qhat;
    double qnorm = 0.0;
};

TopKPlan topk_plan(const Mat& z, const Vec& q, int k) {
    TopKPlan plan;
    plan.qnorm = q.norm();
    plan.qhat = plan.qnorm > 1e-12 ? Vec(q / plan.qnorm) : q;
    Vec s = z * plan.qhat;
    std::vector<Eigen::Index> order(z.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
    const Eigen::Index take = std::min<Eigen::Index>(k, z.rows());
    plan.picks.assign(order.begin(), order.begin() + take);
    plan.scores.resize(take);
    for (Eigen::Index i = 0; i < take; ++i) plan.scores(i) = s(plan.picks[i]);
    return plan;
}

}  // namespace

int Tape::topk_summary(int z, int q, int k) {
    const Mat& zv = nodes_[z].value;
    Vec qv = nodes_[q].value.col(0);
    TopKPlan plan = topk_plan(zv, qv, k);
    Mat v = Mat::Zero(zv.cols(), k);
    for (size_t j = 0; j < plan.picks.size(); ++j)
        v.col(static_cast<Eigen::Index>(j)) =
            std::tanh(plan.scores(static_cast<Eigen::Index>(j))) * zv.row(plan.picks[j]).transpose();
    int id = push(std::move(v));
    nodes_[id].pull = [this, id, z, q, plan] {
        const Mat& g = nodes_[id].grad;
        const Mat& zv = nodes_[z].value;
        Mat gz = Mat::Zero(zv.rows(), zv.cols());
        Vec gqhat = Vec::Zero(zv.cols());
        for (size_t j = 0; j < plan.picks.size(); ++j) {
            const Eigen::Index i = plan.picks[j];
            const double s = plan.scores(static_cast<Eigen::Index>(j));
            const double th = std::tanh(s);
            const Vec gcol = g.col(static_cast<Eigen::Index>(j));
            const double gdotz = gcol.dot(zv.row(i).transpose());
            gz.row(i) += th * gcol.transpose();
            const double gs = gdotz * (1.0 - th * th);
            gz.row(i) += gs * plan.qhat.transpose();
            gqhat += gs * zv.row(i).transpose();
        }
        accumulate(z, gz);
        Vec gq = plan.qnorm > 1e-12
                     ? Vec((gqhat - plan.qhat * plan.qhat.dot(gqhat)) / plan.qnorm)
                     : gqhat;
        accumulate(q, Mat(gq));
    };
    return id;
}

int Tape::ce_mean(int logits, const Mat& y, double clamp) {
    const Mat& lg = nodes_[logits].value;
    const double m = static_cast<double>(lg.rows());
    double total = 0.0;
    for (Eigen::Index i = 0; i < lg.rows(); ++i) {
        Vec alpha = collect_evidence(lg.row(i).transpose(), clamp).array() + 1.0;
        total += ce_edl(alpha, y.row(i).transpose());
    }
    int id = push(Mat::Constant(1, 1, total / m));
    nodes_[id].pull = [this, id, logits, y, clamp, m] {
        const double g = nodes_[id].grad(0, 0) / m;
        const Mat& lg = nodes_[logits].value;
        Mat gl(lg.rows(), lg.cols());
        for (Eigen::Index i = 0; i < lg.rows(); ++i) {
            Vec row = lg.row(i).transpose();
            Vec alpha = collect_evidence(row, clamp).array() + 1.0;
            Vec ga = ce_edl_grad_alpha(alpha, y.row(i).transpose());
            gl.row(i) = (g * ga.cwiseProduct(collect_evidence_grad(row, clamp))).transpose();
        }
        accumulate(logits, gl);
    };
    return id;
}

int Tape::kl_mean(int logits, const Mat& y, double clamp) {
    const Mat& lg = nodes_[logits].value;
    const double m = static_cast<double>(lg.rows());
    double total = 0.0;
    for (Eigen::Index i = 0; i < lg.rows(); ++i) {
        Vec alpha = collect_evidence(lg.row(i).transpose(), clamp).array() + 1.0;
        total += kl_to_uniform(alpha, y.row(i).transpose());
    }
    int id = push(Mat::Constant(1, 1, total / m));
    nodes_[id].pull = [this, id, logits, y, clamp, m] {
        const double g = nodes_[id].grad(0, 0) / m;
        const Mat& lg = nodes_[logits].value;
        Mat gl(lg.rows(), lg.cols());
        for (Eigen::Index i = 0; i < lg.rows(); ++i) {
            Vec row = lg.row(i).transpose();
            Vec alpha = collect_evidence(row, clamp).array() + 1.0;
            Vec ga = kl_to_uniform_grad_alpha(alpha, y.row(i).transpose());
            gl.row(i) = (g * ga.cwiseProduct(collect_evidence_grad(row, clamp))).transpose();
        }
        accumulate(logits, gl);
    };
    return id;
}

int Tape::contrastive_mean(int logits_orig, int logits_neg, double clamp) {
    const Mat& lo = nodes_[logits_orig].value;
    const Mat& ln = nodes_[logits_neg].value;
    if (lo.rows() != ln.rows() || lo.cols() != ln.cols())
        throw DimensionError("contrastive_mean: branch shapes differ");
    const double m = static_cast<double>(lo.rows());
    auto mean_prob = [clamp](const Mat& lg, Eigen::Index i) {
        Vec alpha = collect_evidence(lg.row(i).transpose(), clamp).array() + 1.0;
        return Vec(alpha / alpha.sum());
    };
    double total = 0.0;
    for (Eigen::Index i = 0; i < lo.rows(); ++i)
        total += contrastive(mean_prob(lo, i), mean_prob(ln, i));
    int id = push(Mat::Constant(1, 1, total / m));
    nodes_[id].pull = [this, id, logits_orig, logits_neg, clamp, m] {
        const double g = nodes_[id].grad(0, 0) / m;
        const Mat& lo = nodes_[logits_orig].value;
        const Mat& ln = nodes_[logits_neg].value;
        Mat go(lo.rows(), lo.cols()), gn(ln.rows(), ln.cols());
        for (Eigen::Index i = 0; i < lo.rows(); ++i) {
            Vec ro = lo.row(i).transpose(), rn = ln.row(i).transpose();
            Vec ao = Vec(collect_evidence(ro, clamp).array() + 1.0);
            Vec an = Vec(collect_evidence(rn, clamp).array() + 1.0);
            Vec po = ao / ao.sum(), pn = an / an.sum();
            Vec ga_o = backprop_mean_probability(ao, contrastive_grad_p(po, pn));
            Vec ga_n = backprop_mean_probability(an, contrastive_grad_p_neg(po, pn));
            go.row(i) = (g * ga_o.cwiseProduct(collect_evidence_grad(ro, clamp))).transpose();
            gn.row(i) = (g * ga_n.cwiseProduct(collect_evidence_grad(rn, clamp))).transpose();
        }
        accumulate(logits_orig, go);
        accumulate(logits_neg, gn);
    };
    return id;
}

void Tape::backward(int id) {
    if (nodes_[id].value.size() != 1)
        throw DimensionError("backward: root must be scalar");
    nodes_[id].grad(0, 0) = 1.0;
    for (int i = id; i >= 0; --i)
        if (nodes_[i].pull) nodes_[i].pull();
}

}  // namespace evisec
