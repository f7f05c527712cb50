#pragma once

#include <ostream>

#include "evisec/common.hpp"

namespace evisec {

// Dirichlet posterior under the uniform prior (base rate 1/K, prior
// weight K), so alpha_i = e_i + 1.
struct DirichletOpinion {
    Vec alpha;

    int num_classes() const { return static_cast<int>(alpha.size()); }
    double alpha_sum() const { return alpha.sum(); }
    double uncertainty() const { return num_classes() / alpha_sum(); }
    Vec belief() const { return (alpha.array() - 1.0) / alpha_sum(); }
    Vec base_rate() const { return Vec::Constant(alpha.size(), 1.0 / alpha.size()); }
};

// e_i = max(0, exp(clamped logit) - 1). Negative logits map to zero
// evidence; |logit| is clamped before exp.
Vec collect_evidence(const Vec& logits, double clamp = 10.0);

DirichletOpinion to_opinion(const Vec& evidence);

// Dirichlet mean, p_i = alpha_i / alpha_sum
Vec expected_probability(const DirichletOpinion& op);

double uncertainty(const DirichletOpinion& op);

// Inverse of the opinion->(belief, u) mapping: alpha_i = K * b_i / u + 1.
Vec opinion_to_alpha(const Vec& belief, double u);

// CSV rows alpha_1..alpha_K,u,b_1..b_K
void dump_opinions(std::ostream& out, const std::vector<DirichletOpinion>& ops);

}  // namespace evisec
