#include "evisec/losses.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

namespace evisec {

namespace {

using boost::math::digamma;
using boost::math::trigamma;

void check_one_hot(const Vec& y, Eigen::Index k) {
    if (y.size() != k) throw ValidationError("label length mismatch");
    int ones = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (y(i) == 1.0) ++ones;
        else if (y(i) != 0.0) throw ValidationError("label not one-hot");
    }
    if (ones != 1) throw ValidationError("label not one-hot");
}

void check_alpha(const Vec& alpha) {
    if (alpha.size() < 2) throw ValidationError("K >= 2 required");
    if ((alpha.array() < 1.0).any()) throw ValidationError("alpha entries must be >= 1");
}

void check_simplex(const Vec& p) {
    if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-6)
        throw ValidationError("probability vector not on the simplex");
}

}  // namespace

double ce_edl(const Vec& alpha, const Vec& y) {
    check_alpha(alpha);
    check_one_hot(y, alpha.size());
    const double psi_sum = digamma(alpha.sum());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        if (y(i) == 1.0) loss += psi_sum - digamma(alpha(i));
    return loss;
}

Vec ce_edl_grad_alpha(const Vec& alpha, const Vec& y) {
    check_alpha(alpha);
    check_one_hot(y, alpha.size());
    const double tri_sum = trigamma(alpha.sum());
    Vec g(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        g(i) = tri_sum - (y(i) == 1.0 ? trigamma(alpha(i)) : 0.0);
    return g;
}

double kl_to_uniform(const Vec& alpha, const Vec& y) {
    check_alpha(alpha);
    check_one_hot(y, alpha.size());
    const Eigen::Index k = alpha.size();
    Vec ah = y + ((Vec::Ones(k) - y).array() * alpha.array()).matrix();
    const double s = ah.sum();
    double kl = std::lgamma(s) - std::lgamma(static_cast<double>(k));
    const double psi_s = digamma(s);
    for (Eigen::Index i = 0; i < k; ++i)
        kl += -std::lgamma(ah(i)) + (ah(i) - 1.0) * (digamma(ah(i)) - psi_s);
    return kl;
}

Vec kl_to_uniform_grad_alpha(const Vec& alpha, const Vec& y) {
    check_alpha(alpha);
    check_one_hot(y, alpha.size());
    const Eigen::Index k = alpha.size();
    Vec ah = y + ((Vec::Ones(k) - y).array() * alpha.array()).matrix();
    const double s = ah.sum();
    const double tail = (s - static_cast<double>(k)) * trigamma(s);
    Vec g(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double d_ah = (ah(i) - 1.0) * trigamma(ah(i)) - tail;
        g(i) = (y(i) == 1.0 ? 0.0 : 1.0) * d_ah;  // alpha_hat masks the target class
    }
    return g;
}

double contrastive(const Vec& p, const Vec& p_neg) {
    if (p.size() != p_neg.size()) throw ValidationError("probability length mismatch");
    check_simplex(p);
    check_simplex(p_neg);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        loss += p(i) * std::log(std::max(p_neg(i), kProbFloor));
    return loss;
}

Vec contrastive_grad_p(const Vec& p, const Vec& p_neg) {
    Vec g(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) g(i) = std::log(std::max(p_neg(i), kProbFloor));
    return g;
}

Vec contrastive_grad_p_neg(const Vec& p, const Vec& p_neg) {
    Vec g(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
        g(i) = p_neg(i) > kProbFloor ? p(i) / p_neg(i) : 0.0;
    return g;
}

LossBreakdown total_loss(std::span<const LossSample> batch, double rho1, double rho2) {
    if (batch.empty()) throw ValidationError("total_loss: empty batch");
    LossBreakdown out;
    out.rho1 = rho1;
    out.rho2 = rho2;
    for (const LossSample& s : batch) {
        out.ce_edl += ce_edl(s.alpha, s.y);
        out.kl += kl_to_uniform(s.alpha, s.y);
        if (s.p_neg.size() != 0) {
            Vec p = s.p.size() != 0 ? s.p : Vec(s.alpha / s.alpha.sum());
            out.cl += contrastive(p, s.p_neg);
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.ce_edl *= inv;
    out.kl *= inv;
    out.cl *= inv;
    out.total = out.ce_edl + rho1 * out.kl + rho2 * out.cl;
    return out;
}

Vec collect_evidence_grad(const Vec& logits, double clamp) {
    Vec g(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double x = logits(i);
        // zero gradient where the clamp or the nonnegativity clip is active
        g(i) = (x > -clamp && x < clamp && x > 0.0) ? std::exp(x) : 0.0;
    }
    return g;
}

Vec backprop_mean_probability(const Vec& alpha, const Vec& gp) {
    const double s = alpha.sum();
    const Vec p = alpha / s;
    const double dot = gp.dot(p);
    return (gp.array() - dot).matrix() / s;
}

}  // namespace evisec
