#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evisec/edl.hpp"
#include "evisec/losses.hpp"
#include "helpers.hpp"

using namespace evisec;

namespace {

Vec one_hot(int k, int i) {
    Vec y = Vec::Zero(k);
    y(i) = 1.0;
    return y;
}

// logits away from the evidence kink at 0 so finite differences are clean
Vec random_logits(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.2, 2.5);
    std::bernoulli_distribution sign(0.5);
    Vec v(k);
    for (int i = 0; i < k; ++i) v(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    return v;
}

Vec alpha_of(const Vec& logits) { return collect_evidence(logits).array() + 1.0; }

Vec prob_of(const Vec& logits) {
    Vec a = alpha_of(logits);
    return a / a.sum();
}

}  // namespace

TEST_CASE("expected log-likelihood loss oracles") {
    Vec a(3), b(3);
    a << 2, 1, 1;
    CHECK(ce_edl(a, one_hot(3, 0)) == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    b << 1, 1, 1;
    CHECK(ce_edl(b, one_hot(3, 1)) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("loss shrinks with target evidence and vanishes in the limit") {
    Vec y = one_hot(3, 0);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 2.0, 10.0, 100.0, 1e6}) {
        Vec a(3);
        a << t, 1, 1;
        const double loss = ce_edl(a, y);
        CHECK(loss < prev);
        prev = loss;
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("Monte-Carlo estimate agrees with the digamma closed form") {
    Vec a(3);
    a << 2, 1, 1;
    std::mt19937_64 rng(53);
    const int samples = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        double g[3], tot = 0.0;
        for (int i = 0; i < 3; ++i) {
            std::gamma_distribution<double> gd(a(i), 1.0);
            tot += g[i] = gd(rng);
        }
        const double v = -std::log(g[0] / tot);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sumsq / samples - mean * mean) / samples);
    CHECK(std::abs(mean - ce_edl(a, one_hot(3, 0))) < 3.0 * se);
}

TEST_CASE("uniform-prior KL oracles") {
    Vec a(3);
    a << 5, 1, 1;
    CHECK(kl_to_uniform(a, one_hot(3, 0)) == doctest::Approx(0.0).epsilon(1e-12));
    a << 1, 2, 1;
    const double expect = std::log(3.0) - 5.0 / 6.0;
    CHECK(kl_to_uniform(a, one_hot(3, 0)) == doctest::Approx(expect).epsilon(1e-9));
    a << 1, 1, 1;
    CHECK(kl_to_uniform(a, one_hot(3, 2)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("KL cross-checked by sampling the divergence integrand") {
    // adjusted concentrations [1,2,1]: divergence reduces to ln 3 + E[ln p2],
    // p2 ~ Beta(2,2)
    std::mt19937_64 rng(59);
    std::gamma_distribution<double> g2(2.0, 1.0);
    const int samples = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double x = g2(rng), y = g2(rng);
        const double v = std::log(3.0) + std::log(x / (x + y));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sumsq / samples - mean * mean) / samples);
    Vec a(3);
    a << 1, 2, 1;
    CHECK(std::abs(mean - kl_to_uniform(a, one_hot(3, 0))) < 3.0 * se);
}

TEST_CASE("KL ignores the target concentration") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> av(1.0, 9.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec a(4);
        for (int i = 0; i < 4; ++i) a(i) = av(rng);
        Vec b = a;
        b(2) = av(rng);
        CHECK(kl_to_uniform(a, one_hot(4, 2)) ==
              doctest::Approx(kl_to_uniform(b, one_hot(4, 2))).epsilon(1e-14));
    }
}

TEST_CASE("contrastive term values") {
    Vec p(3), pn(3);
    p << 0.5, 0.25, 0.25;
    pn << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
    CHECK(contrastive(p, pn) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
    Vec q(2), qn(2);
    q << 0.5, 0.5;
    qn << 0.9, 0.1;
    CHECK(contrastive(q, qn) ==
          doctest::Approx(0.5 * (std::log(0.9) + std::log(0.1))).epsilon(1e-12));
}

TEST_CASE("input validation") {
    Vec a(3);
    a << 2, 1, 1;
    Vec bad_y(3);
    bad_y << 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(ce_edl(a, bad_y), ValidationError);
    CHECK_THROWS_AS(kl_to_uniform(a, bad_y), ValidationError);
    Vec small(3);
    small << 0.5, 1, 1;
    CHECK_THROWS_AS(ce_edl(small, one_hot(3, 0)), ValidationError);
    Vec off_simplex(2), ok(2);
    off_simplex << 0.6, 0.6;
    ok << 0.5, 0.5;
    CHECK_THROWS_AS(contrastive(off_simplex, ok), ValidationError);
    CHECK_THROWS_AS(contrastive(ok, off_simplex), ValidationError);
    CHECK_THROWS_AS(total_loss(std::span<const LossSample>{}, 0.5, 0.5), ValidationError);
}

TEST_CASE("combined objective") {
    LossSample s;
    s.alpha = Vec(3);
    s.alpha << 2, 3, 1;
    s.y = one_hot(3, 1);
    s.p_neg = Vec::Constant(3, 1.0 / 3.0);

    std::vector<LossSample> one{s};
    LossBreakdown both = total_loss(one, 0.7, 0.4);
    CHECK(both.ce_edl == doctest::Approx(ce_edl(s.alpha, s.y)));
    CHECK(both.kl == doctest::Approx(kl_to_uniform(s.alpha, s.y)));
    Vec p = s.alpha / s.alpha.sum();
    CHECK(both.cl == doctest::Approx(contrastive(p, s.p_neg)));
    CHECK(both.total ==
          doctest::Approx(both.ce_edl + 0.7 * both.kl + 0.4 * both.cl).epsilon(1e-12));

    LossBreakdown ce_only = total_loss(one, 0.0, 0.0);
    CHECK(ce_only.total == doctest::Approx(ce_only.ce_edl).epsilon(1e-12));

    std::vector<LossSample> two{s, s};
    CHECK(total_loss(two, 0.7, 0.4).total == doctest::Approx(both.total).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences through the evidence chain") {
    std::mt19937_64 rng(67);
    const int ks[] = {2, 3, 5};
    for (int trial = 0; trial < 20; ++trial) {
        const int k = ks[trial % 3];
        std::uniform_int_distribution<int> pick(0, k - 1);
        Vec y = one_hot(k, pick(rng));
        Mat logits = random_logits(k, rng);
        Mat logits_neg = random_logits(k, rng);
        const Vec eg = collect_evidence_grad(logits);
        const Vec eg_neg = collect_evidence_grad(logits_neg);
        const Vec alpha = alpha_of(logits);
        const Vec alpha_neg = alpha_of(logits_neg);

        Vec g_ce = ce_edl_grad_alpha(alpha, y).cwiseProduct(eg);
        Vec g_kl = kl_to_uniform_grad_alpha(alpha, y).cwiseProduct(eg);
        Vec p = prob_of(logits), pn = prob_of(logits_neg);
        Vec g_cl = backprop_mean_probability(alpha, contrastive_grad_p(p, pn)).cwiseProduct(eg);
        Vec g_cl_neg = backprop_mean_probability(alpha_neg, contrastive_grad_p_neg(p, pn))
                           .cwiseProduct(eg_neg);

        for (int i = 0; i < k; ++i) {
            const double fd_ce = testutil::central_diff(
                logits, i, 0, [&] { return ce_edl(alpha_of(logits), y); });
            CHECK(testutil::rel_err(g_ce(i), fd_ce) < 1e-4);
            const double fd_kl = testutil::central_diff(
                logits, i, 0, [&] { return kl_to_uniform(alpha_of(logits), y); });
            CHECK(testutil::rel_err(g_kl(i), fd_kl) < 1e-4);
            const double fd_cl = testutil::central_diff(logits, i, 0, [&] {
                return contrastive(prob_of(logits), prob_of(logits_neg));
            });
            CHECK(testutil::rel_err(g_cl(i), fd_cl) < 1e-4);
            const double fd_cl_neg = testutil::central_diff(logits_neg, i, 0, [&] {
                return contrastive(prob_of(logits), prob_of(logits_neg));
            });
            CHECK(testutil::rel_err(g_cl_neg(i), fd_cl_neg) < 1e-4);
        }
    }
}
