#pragma once

#include <span>
#include <vector>

#include "evisec/common.hpp"

namespace evisec {

// total = ce_edl + rho1 * kl + rho2 * cl
struct LossBreakdown {
    double ce_edl = 0.0;
    double kl = 0.0;
    double cl = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double total = 0.0;
};

struct LossSample {
    Vec alpha;
    Vec y;      // one-hot
    Vec p;      // Dirichlet mean of the original branch (empty = derive from alpha)
    Vec p_neg;  // Dirichlet mean of the negative branch (empty = no contrastive term)
};

// sum_i y_i (digamma(alpha_sum) - digamma(alpha_i))
double ce_edl(const Vec& alpha, const Vec& y);
Vec ce_edl_grad_alpha(const Vec& alpha, const Vec& y);

// KL(Dir(alpha_hat) || Dir(1)) with alpha_hat = y + (1 - y) .* alpha
double kl_to_uniform(const Vec& alpha, const Vec& y);
Vec kl_to_uniform_grad_alpha(const Vec& alpha, const Vec& y);

// sum_i p_i * ln(p_neg_i)
double contrastive(const Vec& p, const Vec& p_neg);
Vec contrastive_grad_p(const Vec& p, const Vec& p_neg);
Vec contrastive_grad_p_neg(const Vec& p, const Vec& p_neg);

LossBreakdown total_loss(std::span<const LossSample> batch, double rho1, double rho2);

// chain-rule helpers for the logits -> evidence -> alpha -> loss path
Vec collect_evidence_grad(const Vec& logits, double clamp = 10.0);  // d e_i / d logit_i
// given gp = dL/dp with p = alpha / alpha_sum, returns dL/dalpha
Vec backprop_mean_probability(const Vec& alpha, const Vec& gp);

inline constexpr double kProbFloor = 1e-12;

}  // namespace evisec
