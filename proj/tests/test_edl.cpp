#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "evisec/edl.hpp"
#include "helpers.hpp"

using namespace evisec;

TEST_CASE("evidence from logits") {
    Vec zeros = collect_evidence(Vec::Zero(3));
    CHECK(zeros.cwiseAbs().maxCoeff() == 0.0);

    Vec logits(2);
    logits << std::log(2.0), 0.0;
    Vec e = collect_evidence(logits);
    CHECK(e(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e(1) == 0.0);

    Vec big(2);
    big << 100.0, 0.0;
    CHECK(collect_evidence(big, 10.0)(0) == doctest::Approx(std::exp(10.0) - 1.0));
}

TEST_CASE("negative logits clip to zero evidence") {
    Vec logits(3);
    logits << -0.5, -100.0, 0.0;
    Vec e = collect_evidence(logits);
    CHECK(e(0) == 0.0);
    CHECK(e(1) == 0.0);
    CHECK(e(2) == 0.0);
}

TEST_CASE("evidence input validation") {
    Vec one(1);
    one << 0.0;
    CHECK_THROWS_AS(collect_evidence(one), ValidationError);
    Vec nan(2);
    nan << std::nan(""), 0.0;
    CHECK_THROWS_AS(collect_evidence(nan), NumericError);
    CHECK_THROWS_AS(collect_evidence(Vec::Zero(2), 0.0), ValidationError);
}

TEST_CASE("opinions from evidence") {
    DirichletOpinion vac = to_opinion(Vec::Zero(3));
    CHECK(vac.alpha == Vec::Ones(3));
    CHECK(vac.uncertainty() == 1.0);
    CHECK(vac.belief().cwiseAbs().maxCoeff() == 0.0);

    Vec e(3);
    e << 29.0, 0.0, 0.0;
    DirichletOpinion sharp = to_opinion(e);
    CHECK(sharp.alpha(0) == 30.0);
    CHECK(sharp.uncertainty() == doctest::Approx(3.0 / 32.0).epsilon(1e-15));

    Vec e2(2);
    e2 << 1.0, 1.0;
    DirichletOpinion sym = to_opinion(e2);
    CHECK(sym.uncertainty() == 0.5);
    CHECK(sym.belief()(0) == doctest::Approx(0.25));
}

TEST_CASE("expected probability") {
    DirichletOpinion op{Vec::Ones(3)};
    CHECK(expected_probability(op)(1) == doctest::Approx(1.0 / 3.0));
    Vec a(3);
    a << 2, 1, 1;
    CHECK(expected_probability({a})(0) == doctest::Approx(0.5));
    a << 30, 1, 1;
    Vec p = expected_probability({a});
    CHECK(p(0) == doctest::Approx(0.9375));
    CHECK(p(1) == doctest::Approx(0.03125));
}

TEST_CASE("uncertainty shrinks with more evidence") {
    Vec e(3);
    e << 1.0, 2.0, 0.5;
    const double u1 = to_opinion(e).uncertainty();
    const double u2 = to_opinion(Vec(10.0 * e)).uncertainty();
    CHECK(u2 < u1);
    CHECK(uncertainty({Vec::Ones(2)}) == 1.0);
}

TEST_CASE("opinion bijection round-trips") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ev(0.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vec e(4);
        for (int i = 0; i < 4; ++i) e(i) = ev(rng);
        DirichletOpinion op = to_opinion(e);
        CHECK(std::abs(op.uncertainty() + op.belief().sum() - 1.0) < 1e-12);
        Vec back = opinion_to_alpha(op.belief(), op.uncertainty());
        CHECK((back - op.alpha).cwiseAbs().maxCoeff() < 1e-12 * op.alpha.maxCoeff());
    }
}

TEST_CASE("probability argmax follows the logits below the clamp") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> lg(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Vec logits(5);
        for (int i = 0; i < 5; ++i) logits(i) = lg(rng);
        Eigen::Index la, pa;
        logits.maxCoeff(&la);
        // evidence for negative logits clips to zero, so the invariant needs a
        // strictly positive winner
        logits(la) = std::abs(logits(la));
        expected_probability(to_opinion(collect_evidence(logits))).maxCoeff(&pa);
        CHECK(la == pa);
    }
}

TEST_CASE("opinion dump format") {
    Vec e(2);
    e << 1.0, 0.0;
    std::ostringstream out;
    dump_opinions(out, {to_opinion(e)});
    // alpha_1..alpha_K,u,b_1..b_K
    const std::string dumped = out.str();
    CHECK(dumped.find("2") == 0);
    CHECK(std::count(dumped.begin(), dumped.end(), ',') == 4);
}
