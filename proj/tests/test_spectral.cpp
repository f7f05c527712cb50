#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evisec/spectral.hpp"
#include "helpers.hpp"

using namespace evisec;

namespace {

GraphSnapshot path2() {
    GraphSnapshot s;
    s.num_nodes = 2;
    s.add_edge(0, 1);
    s.finalize_edges();
    s.features = Mat::Identity(2, 2);
    return s;
}

GraphSnapshot triangle() {
    GraphSnapshot s;
    s.num_nodes = 3;
    s.add_edge(0, 1);
    s.add_edge(1, 2);
    s.add_edge(0, 2);
    s.finalize_edges();
    s.features = Mat::Identity(3, 3);
    return s;
}

}  // namespace

TEST_CASE("laplacian on small graphs") {
    GraphSnapshot lone;
    lone.num_nodes = 1;
    lone.features = Mat::Zero(1, 1);
    CHECK(laplacian(lone)(0, 0) == doctest::Approx(0.0).epsilon(1e-15));

    Mat l2 = laplacian(path2());
    Mat expect2(2, 2);
    expect2 << 0.5, -0.5, -0.5, 0.5;
    CHECK((l2 - expect2).cwiseAbs().maxCoeff() < 1e-12);

    Mat l3 = laplacian(triangle());
    Mat expect3 = Mat::Identity(3, 3) - Mat::Constant(3, 3, 1.0 / 3.0);
    CHECK((l3 - expect3).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigendecomposition of the 2-node path") {
    SpectralDecomposition dec = eigendecompose(laplacian(path2()));
    CHECK(dec.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dec.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(dec.eigenvectors(0, 0) == doctest::Approx(s));
    CHECK(dec.eigenvectors(1, 0) == doctest::Approx(s));
    CHECK(dec.eigenvectors(0, 1) == doctest::Approx(s));   // first component positive
    CHECK(dec.eigenvectors(1, 1) == doctest::Approx(-s));
}

TEST_CASE("single node decomposes trivially") {
    SpectralDecomposition dec = eigendecompose(Mat::Zero(1, 1));
    CHECK(dec.eigenvalues(0) == 0.0);
    CHECK(dec.eigenvectors(0, 0) == 1.0);
}

TEST_CASE("degenerate eigenspace assertions go through the projector") {
    SpectralDecomposition dec = eigendecompose(laplacian(triangle()));
    Mat proj = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        if (std::abs(dec.eigenvalues(i) - 1.0) < 1e-9)
            proj += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).transpose();
    Mat expect = Mat::Identity(3, 3) - Mat::Constant(3, 3, 1.0 / 3.0);
    CHECK((proj - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("asymmetric input is rejected") {
    Mat bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(eigendecompose(bad), ValidationError);
}

TEST_CASE("augmentation keeps high frequencies and the requested low ones") {
    SpectralDecomposition dec = eigendecompose(laplacian(path2()));
    NegativeSample neg = augment(dec, 0.0);
    Mat expect(2, 2);
    expect << 0.5, -0.5, -0.5, 0.5;
    CHECK((neg.l_minus - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((neg.p_minus - (Mat::Identity(2, 2) - expect)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("triangle at r=0.8 keeps everything") {
    SpectralDecomposition dec = eigendecompose(laplacian(triangle()));
    NegativeSample neg = augment(dec, 0.8);
    CHECK((neg.l_minus - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("r approaching 1 on a simple even spectrum reconstructs identity") {
    std::mt19937_64 rng(17);
    GraphSnapshot snap = testutil::random_snapshot(6, 0.6, 2, rng);
    SpectralDecomposition dec = eigendecompose(laplacian(snap));
    NegativeSample neg = augment(dec, 0.999);  // floor(0.999*3) = 2 low + 3 high = all 6? no: floor(0.999*6/2)=2
    // keeps floor(2.997)=2 low eigenspaces plus indices 4..6 (1-based): 5 of 6 kept
    Mat kept = Mat::Zero(6, 6);
    for (int i : {0, 1, 3, 4, 5}) kept += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).transpose();
    CHECK((neg.l_minus - kept).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("invalid preservation ratio is rejected") {
    SpectralDecomposition dec = eigendecompose(laplacian(path2()));
    CHECK_THROWS_AS(augment(dec, 1.0), ValidationError);
    CHECK_THROWS_AS(augment(dec, -0.1), ValidationError);
}

TEST_CASE("verbatim mode yields a projector, weighted mode does not in general") {
    std::mt19937_64 rng(23);
    GraphSnapshot snap = testutil::random_snapshot(10, 0.4, 2, rng);
    SpectralDecomposition dec = eigendecompose(laplacian(snap));
    NegativeSample neg = augment(dec, 0.3);
    CHECK((neg.l_minus * neg.l_minus - neg.l_minus).cwiseAbs().maxCoeff() < 1e-8);
    NegativeSample weighted = augment(dec, 0.3, AugmentMode::weighted);
    CHECK(weighted.l_minus != neg.l_minus);
}

TEST_CASE("reconstruction and eigenvalue range on random graphs") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 10 + 15 * trial;
        GraphSnapshot snap = testutil::random_snapshot(n, 0.15, 2, rng);
        Mat l = laplacian(snap);
        SpectralDecomposition dec = eigendecompose(l);
        Mat recon = dec.eigenvectors * dec.eigenvalues.asDiagonal() * dec.eigenvectors.transpose();
        CHECK((recon - l).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(dec.eigenvalues(0) > -1e-10);
        CHECK(dec.eigenvalues(n - 1) < 2.0);
        Mat gram = dec.eigenvectors.transpose() * dec.eigenvectors;
        CHECK((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("nested preservation ratios move monotonically toward the full operator") {
    std::mt19937_64 rng(31);
    GraphSnapshot snap = testutil::random_snapshot(16, 0.3, 2, rng);
    SpectralDecomposition dec = eigendecompose(laplacian(snap));
    Mat base = augment(dec, 0.9).l_minus;
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.0, 0.3, 0.6, 0.9}) {
        const double dist = (augment(dec, r).l_minus - base).norm();
        CHECK(dist <= prev + 1e-12);
        prev = dist;
    }
}

TEST_CASE("negative window decomposes each distinct snapshot once") {
    std::mt19937_64 rng(37);
    SnapshotWindow w;
    GraphSnapshot a = testutil::random_snapshot(8, 0.4, 3, rng);
    GraphSnapshot b = testutil::random_snapshot(8, 0.4, 3, rng);
    a.timestep = 0;
    b.timestep = 1;
    GraphSnapshot a2 = a;
    a2.timestep = 2;
    w.snapshots = {a, b, a2};
    SpectralCache cache;
    WindowInput neg = negative_window(w, 0.3, AugmentMode::verbatim, &cache);
    REQUIRE(neg.size() == 3);
    CHECK(cache.decompositions == 2);  // a and a2 share structure
    CHECK(neg[0].propagation == neg[2].propagation);
    CHECK(neg[0].features == a.features);
}

TEST_CASE("window input passes propagation and features through unchanged") {
    std::mt19937_64 rng(41);
    SnapshotWindow w;
    w.snapshots = {testutil::random_snapshot(6, 0.5, 2, rng)};
    WindowInput in = window_input(w);
    CHECK(in[0].propagation == normalize_propagation(w.snapshots[0]));
    CHECK(in[0].features == w.snapshots[0].features);
}
