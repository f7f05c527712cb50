#include "evisec/edl.hpp"

#include <cmath>
#include <vector>

namespace evisec {

Vec collect_evidence(const Vec& logits, double clamp) {
    if (logits.size() < 2) throw ValidationError("collect_evidence: K >= 2 required");
    if (clamp <= 0) throw ValidationError("collect_evidence: clamp must be positive");
    if (!logits.allFinite()) throw NumericError("collect_evidence: non-finite logit");
    Vec e(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double x = std::min(std::max(logits(i), -clamp), clamp);
        e(i) = std::max(0.0, std::exp(x) - 1.0);
    }
    return e;
}

DirichletOpinion to_opinion(const Vec& evidence) {
    if ((evidence.array() < 0.0).any())
        throw ValidationError("to_opinion: negative evidence");
    return DirichletOpinion{evidence.array() + 1.0};
}

Vec expected_probability(const DirichletOpinion& op) { return op.alpha / op.alpha_sum(); }

double uncertainty(const DirichletOpinion& op) { return op.uncertainty(); }

Vec opinion_to_alpha(const Vec& belief, double u) {
    if (u <= 0.0 || u > 1.0) throw ValidationError("opinion_to_alpha: u must be in (0, 1]");
    const double k = static_cast<double>(belief.size());
    return (belief.array() * (k / u) + 1.0).matrix();
}

void dump_opinions(std::ostream& out, const std::vector<DirichletOpinion>& ops) {
    for (const auto& op : ops) {
        for (Eigen::Index i = 0; i < op.alpha.size(); ++i) out << op.alpha(i) << ",";
        out << op.uncertainty();
        Vec b = op.belief();
        for (Eigen::Index i = 0; i < b.size(); ++i) out << "," << b(i);
        out << "\n";
    }
}

}  // namespace evisec
